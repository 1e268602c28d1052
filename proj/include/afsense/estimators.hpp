// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <optional>

#include "afsense/channel.hpp"
#include "afsense/signal.hpp"
#include "afsense/types.hpp"

namespace afsense {

enum class LsMode {
  normal_equations,  // unique least-squares solution; error on rank deficiency
  pseudo_inverse     // minimum-norm least-squares solution, always defined
};

struct LsConfig {
  double ridge = 0.0;  // delta added as delta*I to the normal equations
  LsMode mode = LsMode::normal_equations;
};

// Regularizer used inside the reweighting recursion's linear solve.
// half_lambda_bar (lambda*p/2) is the choice whose fixed points satisfy the
// stationarity condition of the penalized cost; lambda_bar (lambda*p) and
// lambda are the two literal readings, kept selectable.
enum class InnerReg { half_lambda_bar, lambda_bar, lambda };

enum class SparseInit { ls_solution, ones };

enum class SparseAlgo { irls, l1 };

struct SparseSolverConfig {
  double p = 0.5;             // in (0, 1]
  double lambda = 1e-3;       // penalty weight, > 0
  bool auto_lambda = true;    // indirect_sparse only: scale lambda from the
                              // recovered relay signal's noise estimate
  Index max_iter = 200;
  double tol = 1e-8;          // relative iterate-change stopping threshold
  double eps_floor = 1e-12;   // magnitude floor inside the reweighting
  SparseInit init = SparseInit::ls_solution;
  InnerReg inner_reg = InnerReg::half_lambda_bar;
  SparseAlgo algo = SparseAlgo::irls;

  double lambda_bar() const { return lambda * p; }
  void validate() const;
};

struct StageDiagnostics {
  double stage1_residual_norm = 0.0;
  double stage2_residual_norm = 0.0;
  // Per-degree-of-freedom stage-1 residual variance (noise estimate).
  double stage1_noise_variance = 0.0;
  double lambda_used = 0.0;
};

struct EstimateResult {
  Vec h_hat;
  Index iterations = 0;
  double final_cost = 0.0;
  bool converged = false;
  StageDiagnostics diagnostics;
};

// Magnitudes below this make |h|^(p-2) meaningless in the analytic gradient.
inline constexpr double kGradientMagnitudeFloor = 1e-10;

// argmin ||b - A h||^2 (+ ridge ||h||^2 when ridge > 0). normal_equations
// mode refuses rank-deficient systems (SingularSystem) rather than silently
// regularizing; pseudo_inverse returns the minimum-norm solution.
Vec ls_solve(const Mat& A, const Vec& b, const LsConfig& cfg = {});

// LS estimate of the reporting channel h3 from a known probe and the observed
// relay response. The convolution mode is inferred from len(observed):
// len(probe)+n_taps-1 selects full, len(probe) selects truncated.
ChannelImpulseResponse estimate_reporting_channel(const TrainingSignal& probe,
                                                  const Vec& observed,
                                                  Index n_taps,
                                                  const LsConfig& cfg = {});

// Two-stage LS: recover the relay signal through H3, then the primary channel
// through X. The X mode is inferred from len(z) and len(x).
EstimateResult indirect_ls(const Vec& z, const TrainingSignal& x,
                           const ChannelImpulseResponse& h3,
                           const LsConfig& cfg = {}, double relay_gain = 1.0);

// ||b - A h||^2 + lambda * sum_i |h_i|^p
double sparse_cost(const Vec& h, const Mat& A, const Vec& b, double p,
                   double lambda);

// 2 A^H A h - 2 A^H b + lambda * p * diag(|h_i|^(p-2)) h. Throws
// SingularGradient if any |h_i| < kGradientMagnitudeFloor while p < 2.
Vec sparse_gradient(const Vec& h, const Mat& A, const Vec& b, double p,
                    double lambda);

// Observes the iterate trajectory (initial point, then each update).
using IterationObserver = std::function<void(Index, const Vec&)>;

// Reweighting recursion for the Lp-penalized least-squares cost:
//   h <- W^2 A^H (A W^2 A^H + mu I)^(-1) b,  W = diag(max(|h_i|,
//   eps_floor)^(1-p/2)),
// solved on the cheaper normal-equation side; mu per cfg.inner_reg.
EstimateResult irls_sparse_solve(const Mat& A, const Vec& b,
                                 const SparseSolverConfig& cfg,
                                 const IterationObserver& observer = {});

// min ||b - A h||^2 + lambda ||h||_1 by accelerated proximal gradient
// (soft-thresholding steps, step size from a power-iteration estimate of
// ||A||_2, momentum restart on non-monotonicity).
EstimateResult l1_sparse_solve(const Mat& A, const Vec& b, double lambda,
                               Index max_iter = 5000, double tol = 1e-10);

// Stage 1 as indirect_ls; stage 2 runs the configured sparse solver on the
// recovered relay signal. With cfg.auto_lambda the penalty weight is
// sigma2_hat * log(N) from the stage-1 residual, floored at 1e-12.
EstimateResult indirect_sparse(const Vec& z, const TrainingSignal& x,
                               const ChannelImpulseResponse& h3,
                               const LsConfig& ls_cfg,
                               const SparseSolverConfig& sp_cfg,
                               double relay_gain = 1.0);

}  // namespace afsense

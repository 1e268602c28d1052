// SPDX-License-Identifier: Apache-2.0

#include "afsense/estimators.hpp"

#include <algorithm>
#include <cmath>

namespace afsense {

namespace {

// Ridge normal equations are positive definite whenever ridge > 0.
Vec solve_ridge(const Mat& A, const Vec& b, double ridge) {
  Mat g = A.adjoint() * A;
  g.diagonal().array() += ridge;
  Eigen::LLT<Mat> llt(g);
  if (llt.info() != Eigen::Success)
    throw SingularSystem("ls_solve: ridge normal equations not positive definite");
  return llt.solve(A.adjoint() * b);
}

struct Stage1 {
  Vec y_hat;  // relay signal estimate, relay gain divided out
  double residual_norm = 0.0;
  double noise_variance = 0.0;  // residual power per degree of freedom
  Index n_taps = 0;
  MatrixMode x_mode = MatrixMode::full;
};

// Invert the reporting-channel convolution to recover the relay signal,
// then work out which training-matrix mode matches the remaining dimensions.
Stage1 recover_relay_signal(const Vec& z, const TrainingSignal& x,
                            const ChannelImpulseResponse& h3,
                            const LsConfig& cfg, double relay_gain) {
  if (!(relay_gain > 0.0))
    throw InvalidArgument("indirect estimator: relay_gain must be positive");
  const Index n = h3.length();
  const Index m = x.length();
  const Index len_y = z.size() - n + 1;
  if (len_y < 1)
    throw InvalidArgument("indirect estimator: z shorter than h3 allows");

  Stage1 s;
  s.n_taps = n;
  if (len_y == m + n - 1)
    s.x_mode = MatrixMode::full;
  else if (len_y == m)
    s.x_mode = MatrixMode::truncated;
  else
    throw InvalidArgument(
        "indirect estimator: z length inconsistent with x and h3 lengths");

  const Mat H3 = ConvolutionMatrix(h3.taps, len_y, MatrixMode::full).dense();
  const Vec y_scaled = ls_solve(H3, z, cfg);
  const double res = (z - H3 * y_scaled).norm();
  s.y_hat = y_scaled / relay_gain;
  s.residual_norm = res;
  const Index dof = std::max<Index>(H3.rows() - H3.cols(), 1);
  s.noise_variance = res * res / static_cast<double>(dof);
  return s;
}

Vec reweighting_weights(const Vec& h, double p, double eps_floor) {
  Vec w(h.size());
  const double expo = 1.0 - p / 2.0;
  for (Index i = 0; i < h.size(); ++i)
    w[i] = Complex(std::pow(std::max(std::abs(h[i]), eps_floor), expo), 0.0);
  return w;
}

// Largest singular value of A, squared, by power iteration on A^H A.
double spectral_norm_sq(const Mat& A) {
  const Index n = A.cols();
  Vec v = Vec::Ones(n);
  v /= v.norm();
  double eig = 0.0;
  for (int it = 0; it < 200; ++it) {
    Vec w = A.adjoint() * (A * v);
    const double nw = w.norm();
    if (nw == 0.0) return 0.0;
    w /= nw;
    const double prev = eig;
    eig = nw;
    v = w;
    if (it > 2 && std::abs(eig - prev) <= 1e-13 * eig) break;
  }
  return eig;
}

Complex soft_threshold(Complex v, double tau) {
  const double mag = std::abs(v);
  if (mag <= tau) return Complex(0.0, 0.0);
  return v * ((mag - tau) / mag);
}

}  // namespace

void SparseSolverConfig::validate() const {
  if (!(p > 0.0) || p > 1.0)
    throw InvalidArgument("SparseSolverConfig: p must lie in (0, 1]");
  if (!(lambda > 0.0))
    throw InvalidArgument("SparseSolverConfig: lambda must be positive");
  if (max_iter < 1)
    throw InvalidArgument("SparseSolverConfig: max_iter must be >= 1");
  if (!(tol > 0.0)) throw InvalidArgument("SparseSolverConfig: tol must be positive");
  if (!(eps_floor > 0.0))
    throw InvalidArgument("SparseSolverConfig: eps_floor must be positive");
}

Vec ls_solve(const Mat& A, const Vec& b, const LsConfig& cfg) {
  if (A.rows() != b.size())
    throw InvalidArgument("ls_solve: A.rows() != len(b)");
  if (A.rows() == 0 || A.cols() == 0)
    throw InvalidArgument("ls_solve: empty system");
  if (cfg.ridge < 0.0) throw InvalidArgument("ls_solve: ridge must be >= 0");

  if (cfg.ridge > 0.0) return solve_ridge(A, b, cfg.ridge);

  if (cfg.mode == LsMode::pseudo_inverse)
    return A.completeOrthogonalDecomposition().solve(b);

  // Unique-solution path: rank-revealing QR on A itself, so the conditioning
  // of the normal equations is never squared.
  Eigen::ColPivHouseholderQR<Mat> qr(A);
  if (qr.rank() < A.cols())
    throw SingularSystem(
        "ls_solve: rank-deficient system; use ridge > 0 or pseudo_inverse mode");
  return qr.solve(b);
}

ChannelImpulseResponse estimate_reporting_channel(const TrainingSignal& probe,
                                                  const Vec& observed,
                                                  Index n_taps,
                                                  const LsConfig& cfg) {
  if (n_taps < 1)
    throw InvalidArgument("estimate_reporting_channel: n_taps must be >= 1");
  const Index lp = probe.length();
  MatrixMode mode;
  if (observed.size() == lp + n_taps - 1)
    mode = MatrixMode::full;
  else if (observed.size() == lp)
    mode = MatrixMode::truncated;
  else
    throw InvalidArgument(
        "estimate_reporting_channel: observed length matches neither mode");

  const Mat Xp = ConvolutionMatrix(probe.samples, n_taps, mode).dense();
  ChannelImpulseResponse cir;
  cir.taps = ls_solve(Xp, observed, cfg);
  cir.kind = ChannelKind::dense;
  return cir;
}

EstimateResult indirect_ls(const Vec& z, const TrainingSignal& x,
                           const ChannelImpulseResponse& h3,
                           const LsConfig& cfg, double relay_gain) {
  const Stage1 s1 = recover_relay_signal(z, x, h3, cfg, relay_gain);
  const Mat X = ConvolutionMatrix(x.samples, s1.n_taps, s1.x_mode).dense();
  EstimateResult r;
  r.h_hat = ls_solve(X, s1.y_hat, cfg);
  r.iterations = 1;
  r.converged = true;
  r.diagnostics.stage1_residual_norm = s1.residual_norm;
  r.diagnostics.stage2_residual_norm = (s1.y_hat - X * r.h_hat).norm();
  r.diagnostics.stage1_noise_variance = s1.noise_variance;
  r.final_cost = r.diagnostics.stage2_residual_norm *
                 r.diagnostics.stage2_residual_norm;
  return r;
}

double sparse_cost(const Vec& h, const Mat& A, const Vec& b, double p,
                   double lambda) {
  if (A.rows() != b.size() || A.cols() != h.size())
    throw InvalidArgument("sparse_cost: shape mismatch");
  if (!(p > 0.0) || p > 1.0)
    throw InvalidArgument("sparse_cost: p must lie in (0, 1]");
  if (lambda < 0.0) throw InvalidArgument("sparse_cost: lambda must be >= 0");
  double penalty = 0.0;
  for (Index i = 0; i < h.size(); ++i) penalty += std::pow(std::abs(h[i]), p);
  return (b - A * h).squaredNorm() + lambda * penalty;
}

Vec sparse_gradient(const Vec& h, const Mat& A, const Vec& b, double p,
                    double lambda) {
  if (A.rows() != b.size() || A.cols() != h.size())
    throw InvalidArgument("sparse_gradient: shape mismatch");
  if (!(p > 0.0) || p > 1.0)
    throw InvalidArgument("sparse_gradient: p must lie in (0, 1]");
  if (lambda < 0.0) throw InvalidArgument("sparse_gradient: lambda must be >= 0");

  Vec grad = 2.0 * (A.adjoint() * (A * h - b));
  if (lambda == 0.0) return grad;
  for (Index i = 0; i < h.size(); ++i) {
    const double mag = std::abs(h[i]);
    if (mag < kGradientMagnitudeFloor)
      throw SingularGradient(
          "sparse_gradient: |h_i| below the penalty singularity floor");
    grad[i] += lambda * p * std::pow(mag, p - 2.0) * h[i];
  }
  return grad;
}

EstimateResult irls_sparse_solve(const Mat& A, const Vec& b,
                                 const SparseSolverConfig& cfg,
                                 const IterationObserver& observer) {
  cfg.validate();
  if (A.rows() != b.size())
    throw InvalidArgument("irls_sparse_solve: A.rows() != len(b)");
  if (A.rows() == 0 || A.cols() == 0)
    throw InvalidArgument("irls_sparse_solve: empty system");

  double mu = 0.0;
  switch (cfg.inner_reg) {
    case InnerReg::half_lambda_bar: mu = 0.5 * cfg.lambda_bar(); break;
    case InnerReg::lambda_bar: mu = cfg.lambda_bar(); break;
    case InnerReg::lambda: mu = cfg.lambda; break;
  }

  const Index n = A.cols();
  Vec h;
  if (cfg.init == SparseInit::ls_solution)
    h = solve_ridge(A, b, cfg.lambda_bar());
  else
    h = Vec::Ones(n);
  if (observer) observer(0, h);

  const Mat gram = A.adjoint() * A;
  const Vec atb = A.adjoint() * b;

  EstimateResult r;
  for (Index k = 0; k < cfg.max_iter; ++k) {
    const Vec w = reweighting_weights(h, cfg.p, cfg.eps_floor);
    Mat gw = w.asDiagonal() * gram * w.asDiagonal();

    // Solve (W G W + mu I) v = W A^H b; escalate the ridge a little before
    // declaring breakdown.
    Vec v;
    bool solved = false;
    double boost = 0.0;
    for (int attempt = 0; attempt < 4 && !solved; ++attempt) {
      Mat sys = gw;
      sys.diagonal().array() += Complex(mu + boost, 0.0);
      Eigen::LLT<Mat> llt(sys);
      if (llt.info() == Eigen::Success) {
        v = llt.solve(w.cwiseProduct(atb));
        solved = v.allFinite();
      }
      if (!solved) {
        const double scale = std::max(gw.diagonal().real().maxCoeff(), mu);
        boost = (boost == 0.0 ? 1e-14 * scale : boost * 100.0);
      }
    }
    if (!solved)
      throw SolverBreakdown("irls_sparse_solve: inner solve failed",
                            static_cast<std::size_t>(k));

    const Vec h_next = w.cwiseProduct(v);
    const double step = (h_next - h).norm();
    h = h_next;
    r.iterations = k + 1;
    if (observer) observer(k + 1, h);
    if (step <= cfg.tol * std::max(h.norm(), 1e-300)) {
      r.converged = true;
      break;
    }
  }

  r.h_hat = std::move(h);
  r.final_cost = sparse_cost(r.h_hat, A, b, cfg.p, cfg.lambda);
  return r;
}

EstimateResult l1_sparse_solve(const Mat& A, const Vec& b, double lambda,
                               Index max_iter, double tol) {
  if (A.rows() != b.size())
    throw InvalidArgument("l1_sparse_solve: A.rows() != len(b)");
  if (!(lambda > 0.0))
    throw InvalidArgument("l1_sparse_solve: lambda must be positive");
  if (max_iter < 1 || !(tol > 0.0))
    throw InvalidArgument("l1_sparse_solve: bad iteration controls");

  // Gradient Lipschitz constant of ||b - Ah||^2 is 2 sigma_max(A)^2; the
  // small headroom keeps the step valid when power iteration stops early.
  const double lips = 2.0 * spectral_norm_sq(A) * 1.02;
  if (lips == 0.0) {
    EstimateResult r;
    r.h_hat = Vec::Zero(A.cols());
    r.converged = true;
    r.final_cost = b.squaredNorm();
    return r;
  }
  const double step = 1.0 / lips;

  Vec h = Vec::Zero(A.cols());
  Vec momentum = h;
  double theta = 1.0;

  EstimateResult r;
  for (Index k = 0; k < max_iter; ++k) {
    const Vec grad = 2.0 * (A.adjoint() * (A * momentum - b));
    Vec h_next(h.size());
    for (Index i = 0; i < h.size(); ++i)
      h_next[i] = soft_threshold(momentum[i] - step * grad[i], step * lambda);

    // Restart the momentum when it points against the latest progress.
    const double align =
        ((momentum - h_next).adjoint() * (h_next - h)).real()(0, 0);
    if (align > 0.0) {
      theta = 1.0;
      momentum = h_next;
    } else {
      const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
      momentum = h_next + ((theta - 1.0) / theta_next) * (h_next - h);
      theta = theta_next;
    }

    const double change = (h_next - h).norm();
    h = h_next;
    r.iterations = k + 1;
    if (change <= tol * std::max(h.norm(), 1e-300)) {
      r.converged = true;
      break;
    }
  }

  r.h_hat = std::move(h);
  r.final_cost = sparse_cost(r.h_hat, A, b, 1.0, lambda);
  return r;
}

namespace {

// Penalty weight from the data: lambda = c * sigma_hat * sqrt(2 P ln N),
// where sigma_hat^2 is the per-degree-of-freedom residual variance of a plain
// LS fit on (X, y_hat) and P the mean squared column norm. sigma_hat tracks
// the effective noise floor in the recovered relay signal, and sqrt(P ln N)
// converts it to the scale on which the L1 term competes with the quadratic.
double auto_penalty_weight(const Mat& X, const Vec& y_hat,
                           double stage1_variance) {
  const double n = static_cast<double>(X.cols());
  double sigma_sq = stage1_variance;
  if (X.rows() > X.cols()) {
    LsConfig pinv;
    pinv.mode = LsMode::pseudo_inverse;
    const Vec fit = ls_solve(X, y_hat, pinv);
    sigma_sq = (y_hat - X * fit).squaredNorm() /
               static_cast<double>(X.rows() - X.cols());
  }
  const double col_power = X.squaredNorm() / n;
  constexpr double kPenaltyScale = 0.25;
  return std::max(kPenaltyScale * std::sqrt(sigma_sq) *
                      std::sqrt(2.0 * col_power * std::log(n)),
                  1e-12);
}

}  // namespace

EstimateResult indirect_sparse(const Vec& z, const TrainingSignal& x,
                               const ChannelImpulseResponse& h3,
                               const LsConfig& ls_cfg,
                               const SparseSolverConfig& sp_cfg,
                               double relay_gain) {
  sp_cfg.validate();
  const Stage1 s1 = recover_relay_signal(z, x, h3, ls_cfg, relay_gain);
  const Mat X = ConvolutionMatrix(x.samples, s1.n_taps, s1.x_mode).dense();

  SparseSolverConfig stage2 = sp_cfg;
  if (sp_cfg.auto_lambda)
    stage2.lambda = auto_penalty_weight(X, s1.y_hat, s1.noise_variance);

  EstimateResult r = stage2.algo == SparseAlgo::irls
                         ? irls_sparse_solve(X, s1.y_hat, stage2)
                         : l1_sparse_solve(X, s1.y_hat, stage2.lambda,
                                           stage2.max_iter, stage2.tol);
  r.diagnostics.stage1_residual_norm = s1.residual_norm;
  r.diagnostics.stage1_noise_variance = s1.noise_variance;
  r.diagnostics.stage2_residual_norm = (s1.y_hat - X * r.h_hat).norm();
  r.diagnostics.lambda_used = stage2.lambda;
  return r;
}

}  // namespace afsense

// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "afsense/estimators.hpp"

namespace afsense {

enum class EstimatorKind { indirect_ls, indirect_sparse_irls, indirect_sparse_l1 };

std::string estimator_name(EstimatorKind kind);
std::optional<EstimatorKind> estimator_from_name(const std::string& name);

struct H3Knowledge {
  enum class Kind { oracle, estimated };
  Kind kind = Kind::oracle;
  Index probe_len = 200;
  double probe_snr_db = 20.0;
};

struct ExperimentConfig {
  Index n_taps = 100;
  Index training_len = 50;
  ChannelKind channel_kind = ChannelKind::sparse;
  Index sparse_k = 15;
  Index head_region = 10;
  Index head_count = 10;
  double decay_rate = 0.05;
  ChannelSnr snr1 = ChannelSnr::db(10.0);
  ChannelSnr snr2 = ChannelSnr::db(10.0);
  ChannelSnr snr3 = ChannelSnr::db(10.0);
  Index trials = 1000;
  std::uint64_t master_seed = 1;
  std::vector<EstimatorKind> estimators = {EstimatorKind::indirect_ls,
                                           EstimatorKind::indirect_sparse_irls};
  H3Knowledge h3_knowledge;
  MatrixMode x_mode = MatrixMode::full;
  MatrixMode h3_mode = MatrixMode::full;
  double relay_gain = 1.0;
  TrainingScheme training_scheme = TrainingScheme::bpsk;
  LsConfig ls;
  SparseSolverConfig sparse;

  void validate() const;
};

// One estimator's outcome in one trial. A failed solve is recorded as
// converged=false with NaN metrics and excluded from the CDFs.
struct EstimatorTrial {
  double rmse_overall = 0.0;
  double rmse_nonzero = 0.0;
  Index iterations = 0;
  bool converged = false;

  bool failed() const { return std::isnan(rmse_overall); }
};

struct TrialResult {
  Index trial_index = 0;
  std::vector<EstimatorTrial> per_estimator;
};

enum class Metric { overall, nonzero };

std::string metric_name(Metric m);

struct CdfTable {
  std::vector<double> values;  // sorted ascending
  std::vector<double> probabilities;  // k/L, strictly within (0, 1]
};

struct MetricSummary {
  double median = 0.0;
  double mean = 0.0;
  // sqrt(sum over converged trials of the squared tap-error norm / count):
  // the one-number aggregate, not normalized by tap count.
  double aggregate_rmse = 0.0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<TrialResult> trials;
  // keyed by (estimator, metric)
  std::map<std::pair<EstimatorKind, Metric>, CdfTable> cdfs;
  std::map<std::pair<EstimatorKind, Metric>, MetricSummary> summary;
  std::map<EstimatorKind, Index> failures;
};

// Everything one trial draws and observes; also what cmd_simulate writes out.
struct TrialData {
  ChannelImpulseResponse h1, h2, h3;
  ChannelImpulseResponse h3_known;  // oracle h3 or the probe-based estimate
  TrainingSignal x;
  LinkObservation link;
};

// Draws trial `trial` of the experiment from streams keyed by (master, trial)
// only. cmd_simulate shares this, so a dataset equals experiment trial 0.
TrialData simulate_trial(const ExperimentConfig& cfg, Index trial,
                         const RandomStream& master);

// sqrt(mean over S of |h_hat_i - h_true_i|^2); S = index_set when given,
// otherwise all indices.
double trial_rmse(const Vec& h_true, const Vec& h_hat,
                  const std::optional<std::vector<Index>>& index_set = {});

CdfTable empirical_cdf(std::vector<double> values);

// Runs cfg.trials independent trials; each draws its randomness from a stream
// keyed only by (master_seed, trial index), so results do not depend on
// scheduling. n_threads = 0 uses the hardware count.
ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                unsigned n_threads = 0);

}  // namespace afsense

// SPDX-License-Identifier: Apache-2.0

#include "afsense/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace afsense {

namespace {

constexpr std::uint64_t kStreamH1 = 0;
constexpr std::uint64_t kStreamH2 = 1;
constexpr std::uint64_t kStreamH3 = 2;
constexpr std::uint64_t kStreamTraining = 3;
constexpr std::uint64_t kStreamLinkNoise = 4;
constexpr std::uint64_t kStreamProbe = 5;

double median_of_sorted(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

EstimatorTrial failed_trial() {
  EstimatorTrial t;
  t.rmse_overall = std::numeric_limits<double>::quiet_NaN();
  t.rmse_nonzero = std::numeric_limits<double>::quiet_NaN();
  t.converged = false;
  return t;
}

TrialResult run_trial(const ExperimentConfig& cfg, Index trial,
                      const RandomStream& master) {
  const TrialData data = simulate_trial(cfg, trial, master);

  const std::optional<std::vector<Index>> support =
      data.h1.kind == ChannelKind::sparse
          ? std::optional<std::vector<Index>>(data.h1.support)
          : std::nullopt;

  TrialResult result;
  result.trial_index = trial;
  result.per_estimator.reserve(cfg.estimators.size());
  for (EstimatorKind kind : cfg.estimators) {
    try {
      EstimateResult est;
      switch (kind) {
        case EstimatorKind::indirect_ls:
          est = indirect_ls(data.link.z, data.x, data.h3_known, cfg.ls,
                            cfg.relay_gain);
          break;
        case EstimatorKind::indirect_sparse_irls: {
          SparseSolverConfig sp = cfg.sparse;
          sp.algo = SparseAlgo::irls;
          est = indirect_sparse(data.link.z, data.x, data.h3_known, cfg.ls, sp,
                                cfg.relay_gain);
          break;
        }
        case EstimatorKind::indirect_sparse_l1: {
          SparseSolverConfig sp = cfg.sparse;
          sp.algo = SparseAlgo::l1;
          est = indirect_sparse(data.link.z, data.x, data.h3_known, cfg.ls, sp,
                                cfg.relay_gain);
          break;
        }
      }
      EstimatorTrial t;
      t.rmse_overall = trial_rmse(data.h1.taps, est.h_hat);
      t.rmse_nonzero = trial_rmse(data.h1.taps, est.h_hat, support);
      t.iterations = est.iterations;
      t.converged = est.converged;
      result.per_estimator.push_back(t);
    } catch (const SolverBreakdown&) {
      result.per_estimator.push_back(failed_trial());
    } catch (const SingularSystem&) {
      result.per_estimator.push_back(failed_trial());
    }
  }
  return result;
}

}  // namespace

TrialData simulate_trial(const ExperimentConfig& cfg, Index trial,
                         const RandomStream& master) {
  const RandomStream trial_stream =
      master.substream(static_cast<std::uint64_t>(trial));
  RandomStream s_h1 = trial_stream.substream(kStreamH1);
  RandomStream s_h2 = trial_stream.substream(kStreamH2);
  RandomStream s_h3 = trial_stream.substream(kStreamH3);
  RandomStream s_train = trial_stream.substream(kStreamTraining);
  RandomStream s_noise = trial_stream.substream(kStreamLinkNoise);
  RandomStream s_probe = trial_stream.substream(kStreamProbe);

  TrialData data;
  data.h1 = cfg.channel_kind == ChannelKind::sparse
                ? generate_sparse_channel(cfg.n_taps, cfg.sparse_k,
                                          cfg.head_region, cfg.head_count, s_h1)
                : generate_dense_channel(cfg.n_taps, cfg.decay_rate, s_h1);
  data.h2 = generate_dense_channel(cfg.n_taps, cfg.decay_rate, s_h2);
  data.h3 = generate_dense_channel(cfg.n_taps, cfg.decay_rate, s_h3);

  data.x = cfg.training_scheme == TrainingScheme::bpsk
               ? make_training_signal(cfg.training_len, TrainingScheme::bpsk,
                                      &s_train)
               : make_training_signal(cfg.training_len, TrainingScheme::ramp);

  const NoiseSpec noise{cfg.snr1, cfg.snr2, cfg.snr3};
  data.link = simulate_link(data.x, data.h1, data.h2, data.h3, noise,
                            cfg.relay_gain, {cfg.x_mode, cfg.h3_mode}, s_noise);

  data.h3_known = data.h3;
  if (cfg.h3_knowledge.kind == H3Knowledge::Kind::estimated) {
    const TrainingSignal probe = make_training_signal(
        cfg.h3_knowledge.probe_len, TrainingScheme::bpsk, &s_probe);
    const Vec clean = convolve(probe.samples, data.h3.taps);
    const Vec observed =
        clean + sample_awgn(
                    clean.size(),
                    snr_to_noise_variance(clean, cfg.h3_knowledge.probe_snr_db),
                    s_probe);
    data.h3_known = estimate_reporting_channel(probe, observed, cfg.n_taps, cfg.ls);
  }
  return data;
}

std::string estimator_name(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::indirect_ls: return "indirect_ls";
    case EstimatorKind::indirect_sparse_irls: return "indirect_sparse_irls";
    case EstimatorKind::indirect_sparse_l1: return "indirect_sparse_l1";
  }
  return "unknown";
}

std::optional<EstimatorKind> estimator_from_name(const std::string& name) {
  if (name == "indirect_ls") return EstimatorKind::indirect_ls;
  if (name == "indirect_sparse_irls") return EstimatorKind::indirect_sparse_irls;
  if (name == "indirect_sparse_l1") return EstimatorKind::indirect_sparse_l1;
  return std::nullopt;
}

std::string metric_name(Metric m) {
  return m == Metric::overall ? "overall" : "nonzero";
}

void ExperimentConfig::validate() const {
  if (n_taps < 1) throw InvalidArgument("config: n_taps must be >= 1");
  if (training_len < 1) throw InvalidArgument("config: training_len must be >= 1");
  if (trials < 1) throw InvalidArgument("config: trials must be >= 1");
  if (estimators.empty()) throw InvalidArgument("config: no estimators selected");
  if (!(relay_gain > 0.0)) throw InvalidArgument("config: relay_gain must be > 0");
  if (!(decay_rate >= 0.0)) throw InvalidArgument("config: decay_rate must be >= 0");
  if (channel_kind == ChannelKind::sparse) {
    if (sparse_k < 1 || sparse_k > n_taps)
      throw InvalidArgument("config: sparse_k must lie in [1, n_taps]");
    if (head_region < 1 || head_region > n_taps)
      throw InvalidArgument("config: head_region must lie in [1, n_taps]");
    if (head_count < 0 || head_count > head_region || head_count > sparse_k)
      throw InvalidArgument("config: head_count infeasible");
    if (sparse_k - head_count > n_taps - head_region)
      throw InvalidArgument("config: tail region too small for sparse_k - head_count");
  }
  if (h3_knowledge.kind == H3Knowledge::Kind::estimated &&
      h3_knowledge.probe_len < 1)
    throw InvalidArgument("config: probe_len must be >= 1");
  sparse.validate();
}

double trial_rmse(const Vec& h_true, const Vec& h_hat,
                  const std::optional<std::vector<Index>>& index_set) {
  if (h_true.size() != h_hat.size())
    throw InvalidArgument("trial_rmse: length mismatch");
  if (h_true.size() == 0) throw InvalidArgument("trial_rmse: empty vectors");

  if (!index_set.has_value()) {
    return std::sqrt((h_hat - h_true).squaredNorm() /
                     static_cast<double>(h_true.size()));
  }
  const auto& s = *index_set;
  if (s.empty()) throw InvalidArgument("trial_rmse: empty index set");
  double acc = 0.0;
  for (Index i : s) {
    if (i < 0 || i >= h_true.size())
      throw InvalidArgument("trial_rmse: index out of range");
    acc += std::norm(h_hat[i] - h_true[i]);
  }
  return std::sqrt(acc / static_cast<double>(s.size()));
}

CdfTable empirical_cdf(std::vector<double> values) {
  if (values.empty()) throw InvalidArgument("empirical_cdf: empty input");
  std::sort(values.begin(), values.end());
  CdfTable cdf;
  const double n = static_cast<double>(values.size());
  cdf.probabilities.resize(values.size());
  for (std::size_t k = 0; k < values.size(); ++k)
    cdf.probabilities[k] = static_cast<double>(k + 1) / n;
  cdf.values = std::move(values);
  return cdf;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, unsigned n_threads) {
  cfg.validate();
  const RandomStream master(cfg.master_seed);

  ExperimentResult result;
  result.config = cfg;
  result.trials.resize(static_cast<std::size_t>(cfg.trials));

  unsigned workers = n_threads != 0 ? n_threads : std::thread::hardware_concurrency();
  if (workers == 0) workers = 1;
  workers = std::min<unsigned>(workers, static_cast<unsigned>(cfg.trials));

  std::atomic<Index> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&]() {
    for (;;) {
      const Index t = next.fetch_add(1);
      if (t >= cfg.trials) return;
      try {
        result.trials[static_cast<std::size_t>(t)] = run_trial(cfg, t, master);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  // Aggregate in trial order (already sorted by construction).
  for (std::size_t e = 0; e < cfg.estimators.size(); ++e) {
    const EstimatorKind kind = cfg.estimators[e];
    Index failed = 0;
    for (Metric metric : {Metric::overall, Metric::nonzero}) {
      std::vector<double> values;
      std::vector<double> norm_sq;  // squared tap-error norms for the aggregate
      values.reserve(result.trials.size());
      for (const TrialResult& tr : result.trials) {
        const EstimatorTrial& et = tr.per_estimator[e];
        if (et.failed()) continue;
        const double v = metric == Metric::overall ? et.rmse_overall : et.rmse_nonzero;
        values.push_back(v);
        const double tap_count =
            metric == Metric::overall
                ? static_cast<double>(cfg.n_taps)
                : static_cast<double>(cfg.channel_kind == ChannelKind::sparse
                                          ? cfg.sparse_k
                                          : cfg.n_taps);
        norm_sq.push_back(v * v * tap_count);
      }
      MetricSummary summary;
      if (!values.empty()) {
        summary.mean = 0.0;
        double agg = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) {
          summary.mean += values[i];
          agg += norm_sq[i];
        }
        summary.mean /= static_cast<double>(values.size());
        summary.aggregate_rmse = std::sqrt(agg / static_cast<double>(values.size()));
        std::vector<double> sorted = values;
        std::sort(sorted.begin(), sorted.end());
        summary.median = median_of_sorted(sorted);
        result.cdfs[{kind, metric}] = empirical_cdf(std::move(values));
      } else {
        summary.median = std::numeric_limits<double>::quiet_NaN();
        summary.mean = std::numeric_limits<double>::quiet_NaN();
        summary.aggregate_rmse = std::numeric_limits<double>::quiet_NaN();
        result.cdfs[{kind, metric}] = CdfTable{};
      }
      result.summary[{kind, metric}] = summary;
    }
    for (const TrialResult& tr : result.trials)
      if (tr.per_estimator[e].failed()) ++failed;
    result.failures[kind] = failed;

    if (static_cast<double>(failed) >
        0.1 * static_cast<double>(cfg.trials)) {
      throw ExperimentFailure("run_experiment: estimator " +
                              estimator_name(kind) + " failed on " +
                              std::to_string(failed) + " of " +
                              std::to_string(cfg.trials) + " trials");
    }
  }

  return result;
}

}  // namespace afsense

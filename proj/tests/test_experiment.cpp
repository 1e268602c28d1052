// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "afsense/experiment.hpp"
#include "afsense/io.hpp"

using namespace afsense;

namespace {

Vec real_vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = Complex(x, 0.0);
  return v;
}

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.n_taps = 20;
  cfg.training_len = 30;
  cfg.sparse_k = 3;
  cfg.head_region = 6;
  cfg.head_count = 2;
  cfg.trials = 16;
  cfg.master_seed = 11;
  return cfg;
}

std::string result_bytes(const ExperimentResult& r) {
  std::string s = trials_to_csv(r);
  for (const auto& [key, cdf] : r.cdfs) s += cdf_to_csv(cdf);
  s += summary_to_json(r).dump();
  return s;
}

}  // namespace

TEST_SUITE_BEGIN("experiment");

TEST_CASE("trial_rmse hand values") {
  CHECK(trial_rmse(real_vec({1, 0}), real_vec({1, 0})) == 0.0);
  CHECK(trial_rmse(real_vec({1, 0}), real_vec({0, 0})) ==
        doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
  CHECK(trial_rmse(real_vec({1, 0}), real_vec({0, 0}),
                   std::vector<Index>{0}) == doctest::Approx(1.0));
}

TEST_CASE("trial_rmse argument errors") {
  CHECK_THROWS_AS(trial_rmse(real_vec({1, 0}), real_vec({1})), InvalidArgument);
  CHECK_THROWS_AS(
      trial_rmse(real_vec({1, 0}), real_vec({1, 0}), std::vector<Index>{}),
      InvalidArgument);
  CHECK_THROWS_AS(
      trial_rmse(real_vec({1, 0}), real_vec({1, 0}), std::vector<Index>{5}),
      InvalidArgument);
}

TEST_CASE("empirical_cdf sorts and assigns k/L probabilities") {
  const CdfTable cdf = empirical_cdf({3.0, 1.0, 2.0});
  CHECK(cdf.values == std::vector<double>{1.0, 2.0, 3.0});
  REQUIRE(cdf.probabilities.size() == 3);
  CHECK(cdf.probabilities[0] == doctest::Approx(1.0 / 3));
  CHECK(cdf.probabilities[1] == doctest::Approx(2.0 / 3));
  CHECK(cdf.probabilities[2] == doctest::Approx(1.0));
}

TEST_CASE("empirical_cdf of one value") {
  const CdfTable cdf = empirical_cdf({5.0});
  CHECK(cdf.values == std::vector<double>{5.0});
  CHECK(cdf.probabilities == std::vector<double>{1.0});
}

TEST_CASE("empirical_cdf ties share increasing probabilities") {
  const CdfTable cdf = empirical_cdf({2.0, 2.0, 1.0});
  CHECK(cdf.values == std::vector<double>{1.0, 2.0, 2.0});
  CHECK(cdf.probabilities[2] == doctest::Approx(1.0));
  CHECK(cdf.probabilities[1] > cdf.probabilities[0]);
}

TEST_CASE("empirical_cdf rejects empty input") {
  CHECK_THROWS_AS(empirical_cdf({}), InvalidArgument);
}

TEST_CASE("empirical_cdf of uniforms tracks the identity (DKW-style)") {
  RandomStream rng(71);
  std::vector<double> xs(1000);
  for (double& x : xs) x = rng.uniform01();
  const CdfTable cdf = empirical_cdf(std::move(xs));
  double worst = 0.0;
  for (std::size_t i = 0; i < cdf.values.size(); ++i)
    worst = std::max(worst, std::abs(cdf.probabilities[i] - cdf.values[i]));
  CHECK(worst < 0.06);
}

TEST_CASE("noiseless single-trial experiment recovers exactly") {
  ExperimentConfig cfg = small_config();
  cfg.trials = 1;
  cfg.snr1 = cfg.snr2 = cfg.snr3 = ChannelSnr::off();
  cfg.estimators = {EstimatorKind::indirect_ls};
  const auto res = run_experiment(cfg);
  CHECK(res.trials.size() == 1);
  CHECK(res.trials[0].per_estimator[0].rmse_overall < 1e-7);
}

TEST_CASE("experiment output is identical across thread counts") {
  const ExperimentConfig cfg = small_config();
  const auto r1 = run_experiment(cfg, 1);
  const auto r2 = run_experiment(cfg, 2);
  const auto r4 = run_experiment(cfg, 4);
  CHECK(result_bytes(r1) == result_bytes(r2));
  CHECK(result_bytes(r1) == result_bytes(r4));
}

TEST_CASE("per-trial draws do not depend on the estimator set") {
  ExperimentConfig ls_only = small_config();
  ls_only.estimators = {EstimatorKind::indirect_ls};
  ExperimentConfig both = small_config();
  both.estimators = {EstimatorKind::indirect_sparse_irls,
                     EstimatorKind::indirect_ls};

  const auto ra = run_experiment(ls_only, 2);
  const auto rb = run_experiment(both, 2);
  for (std::size_t t = 0; t < ra.trials.size(); ++t) {
    CHECK(ra.trials[t].per_estimator[0].rmse_overall ==
          rb.trials[t].per_estimator[1].rmse_overall);
  }
}

TEST_CASE("cdf tables are valid distributions over converged trials") {
  ExperimentConfig cfg = small_config();
  cfg.estimators = {EstimatorKind::indirect_ls,
                    EstimatorKind::indirect_sparse_irls,
                    EstimatorKind::indirect_sparse_l1};
  const auto res = run_experiment(cfg, 2);
  for (const auto& [key, cdf] : res.cdfs) {
    REQUIRE(!cdf.values.empty());
    CHECK(std::is_sorted(cdf.values.begin(), cdf.values.end()));
    CHECK(cdf.probabilities.front() > 0.0);
    CHECK(cdf.probabilities.back() == doctest::Approx(1.0));
    CHECK(std::is_sorted(cdf.probabilities.begin(), cdf.probabilities.end()));
  }
  CHECK(res.trials.size() == static_cast<std::size_t>(cfg.trials));
}

TEST_CASE("estimated h3 knowledge runs end to end") {
  ExperimentConfig cfg = small_config();
  cfg.trials = 8;
  cfg.h3_knowledge.kind = H3Knowledge::Kind::estimated;
  cfg.h3_knowledge.probe_len = 60;
  cfg.h3_knowledge.probe_snr_db = 20.0;
  const auto res = run_experiment(cfg, 2);
  for (const auto& tr : res.trials)
    for (const auto& et : tr.per_estimator) CHECK(std::isfinite(et.rmse_overall));
}

TEST_CASE("an all-failing estimator trips the experiment gate") {
  ExperimentConfig cfg = small_config();
  // truncated training matrix with M < N is rank-deficient; plain
  // normal-equations LS refuses every trial
  cfg.n_taps = 25;
  cfg.training_len = 10;
  cfg.x_mode = MatrixMode::truncated;
  cfg.estimators = {EstimatorKind::indirect_ls};
  CHECK_THROWS_AS(run_experiment(cfg, 2), ExperimentFailure);
}

TEST_CASE("config validation names the offending keys") {
  ExperimentConfig cfg = small_config();
  cfg.sparse_k = 50;  // > n_taps
  try {
    run_experiment(cfg, 1);
    FAIL("expected InvalidArgument");
  } catch (const InvalidArgument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("sparse_k") != std::string::npos);
  }
}

TEST_SUITE_END();

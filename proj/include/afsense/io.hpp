// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "afsense/experiment.hpp"

namespace afsense {

using nlohmann::json;

// --- config ---------------------------------------------------------------

// Every field explicit; see docs/config.md for the schema.
json config_to_json(const ExperimentConfig& cfg);

// Strict: unknown keys and out-of-domain values raise ConfigError naming the
// offending key. Accepts either a bare config object or a manifest that
// embeds one under "config".
ExperimentConfig config_from_json(const json& j);

// Parses a JSON document; parse failures raise ConfigError with a
// line-anchored message ("<path>:<line>: ...").
json parse_json_file(const std::string& path);

// Applies a "dotted.key=value" override in place, e.g. "sparse.p=0.8".
void apply_override(json& config, const std::string& assignment);

// --- vectors and datasets ---------------------------------------------------

json vec_to_json(const Vec& v);
Vec vec_from_json(const json& j, const std::string& key_for_errors);

struct SimulationDataset {
  std::uint64_t seed = 0;
  ExperimentConfig config;
  TrainingSignal x;
  ChannelImpulseResponse h1, h2, h3;
  LinkObservation link;
  bool has_ground_truth = true;
};

json dataset_to_json(const SimulationDataset& ds);
SimulationDataset dataset_from_json(const json& j);

// --- CSV -------------------------------------------------------------------

// Canonical number formatting shared by every CSV emitter: 17 significant
// digits, so parse -> re-emit is byte-identical.
std::string format_double(double v);

std::string trials_to_csv(const ExperimentResult& result);
std::string cdf_to_csv(const CdfTable& cdf);

struct TrialCsvRow {
  long long trial = 0;
  std::string estimator;
  double rmse_overall = 0.0;
  double rmse_nonzero = 0.0;
  long long iterations = 0;
  bool converged = false;
};

std::vector<TrialCsvRow> parse_trials_csv(const std::string& text);
std::string trials_rows_to_csv(const std::vector<TrialCsvRow>& rows);
CdfTable parse_cdf_csv(const std::string& text);

// --- manifest & summary ------------------------------------------------------

json summary_to_json(const ExperimentResult& result);
json make_manifest(const ExperimentConfig& cfg,
                   const std::vector<std::string>& output_files);

// --- files -------------------------------------------------------------------

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace afsense

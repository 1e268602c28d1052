// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "afsense/io.hpp"

namespace afsense {

// Stable exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitNumerical = 4;
inline constexpr int kExitExperimentGate = 5;

// Built-in full configs: "paper-10db", "paper-20db".
json preset_config(const std::string& name);
std::vector<std::string> preset_names();

struct CommonOptions {
  std::string config_path;              // JSON config file
  std::string preset;                   // preset name, exclusive with config
  std::optional<std::uint64_t> seed;    // master_seed override
  std::vector<std::string> overrides;   // dotted key.path=value assignments
};

int cmd_simulate(const CommonOptions& opts, const std::string& out_path,
                 std::ostream& out, std::ostream& err);

int cmd_estimate(const std::string& dataset_path, const std::string& estimator,
                 const std::vector<std::string>& overrides,
                 const std::string& out_path, std::ostream& out,
                 std::ostream& err);

int cmd_experiment(const CommonOptions& opts, const std::string& out_dir,
                   unsigned threads, std::ostream& out, std::ostream& err);

// Full argv-style entry point (excluding the program name).
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace afsense

// SPDX-License-Identifier: Apache-2.0

#include "afsense/cli.hpp"

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

namespace afsense {

namespace {

json base_preset() {
  ExperimentConfig cfg;  // library defaults
  cfg.trials = 1000;
  cfg.master_seed = 1;
  return config_to_json(cfg);
}

struct Resolved {
  ExperimentConfig cfg;
  json resolved;
};

Resolved resolve_config(const CommonOptions& opts) {
  if (!opts.preset.empty() && !opts.config_path.empty())
    throw ConfigError("config error: --preset and --config are exclusive");
  json j;
  if (!opts.preset.empty())
    j = preset_config(opts.preset);
  else if (!opts.config_path.empty())
    j = parse_json_file(opts.config_path);
  else
    throw ConfigError("config error: provide --config PATH or --preset NAME");
  if (j.is_object() && j.contains("config") && j.at("config").is_object())
    j = j.at("config");  // accept a manifest in place of a config
  for (const std::string& o : opts.overrides) apply_override(j, o);
  if (opts.seed) j["master_seed"] = *opts.seed;

  Resolved r;
  r.cfg = config_from_json(j);
  r.resolved = config_to_json(r.cfg);
  return r;
}

// Maps thrown errors onto the documented exit codes.
int report(std::ostream& err, const std::exception& e) {
  err << "afsense: " << e.what() << "\n";
  if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
  if (dynamic_cast<const InvalidArgument*>(&e)) return kExitConfig;
  if (dynamic_cast<const IoError*>(&e)) return kExitIo;
  if (dynamic_cast<const ExperimentFailure*>(&e)) return kExitExperimentGate;
  if (dynamic_cast<const SingularSystem*>(&e)) {
    err << "afsense: hint: set ls.ridge > 0 or ls.mode=pseudo_inverse\n";
    return kExitNumerical;
  }
  if (dynamic_cast<const SingularGradient*>(&e)) return kExitNumerical;
  if (dynamic_cast<const SolverBreakdown*>(&e)) return kExitNumerical;
  return kExitNumerical;
}

}  // namespace

std::vector<std::string> preset_names() { return {"paper-10db", "paper-20db"}; }

json preset_config(const std::string& name) {
  json j = base_preset();
  if (name == "paper-10db") {
    j["snr1_db"] = 10.0;
    j["snr2_db"] = 10.0;
    j["snr3_db"] = 10.0;
    return j;
  }
  if (name == "paper-20db") {
    j["snr1_db"] = 20.0;
    j["snr2_db"] = 20.0;
    j["snr3_db"] = 20.0;
    return j;
  }
  throw ConfigError("config error: unknown preset '" + name +
                    "' (valid: paper-10db, paper-20db)");
}

int cmd_simulate(const CommonOptions& opts, const std::string& out_path,
                 std::ostream& out, std::ostream& err) {
  try {
    const Resolved r = resolve_config(opts);
    const RandomStream master(r.cfg.master_seed);
    const TrialData data = simulate_trial(r.cfg, 0, master);

    SimulationDataset ds;
    ds.seed = r.cfg.master_seed;
    ds.config = r.cfg;
    ds.x = data.x;
    ds.h1 = data.h1;
    ds.h2 = data.h2;
    ds.h3 = data.h3;
    ds.link = data.link;
    write_text_file(out_path, dataset_to_json(ds).dump(2) + "\n");
    write_text_file(out_path + ".manifest.json",
                    make_manifest(r.cfg, {out_path}).dump(2) + "\n");
    out << "wrote " << out_path << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    return report(err, e);
  }
}

int cmd_estimate(const std::string& dataset_path, const std::string& estimator,
                 const std::vector<std::string>& overrides,
                 const std::string& out_path, std::ostream& out,
                 std::ostream& err) {
  try {
    const auto kind = estimator_from_name(estimator);
    if (!kind)
      throw ConfigError("config error: unknown estimator '" + estimator +
                        "' (valid: indirect_ls, indirect_sparse_irls, "
                        "indirect_sparse_l1)");

    const json dataset_json = parse_json_file(dataset_path);
    SimulationDataset ds = dataset_from_json(dataset_json);

    json cfg_json = config_to_json(ds.config);
    for (const std::string& o : overrides) apply_override(cfg_json, o);
    const ExperimentConfig cfg = config_from_json(cfg_json);

    EstimateResult est;
    switch (*kind) {
      case EstimatorKind::indirect_ls:
        est = indirect_ls(ds.link.z, ds.x, ds.h3, cfg.ls, ds.link.relay_gain);
        break;
      case EstimatorKind::indirect_sparse_irls: {
        SparseSolverConfig sp = cfg.sparse;
        sp.algo = SparseAlgo::irls;
        est = indirect_sparse(ds.link.z, ds.x, ds.h3, cfg.ls, sp,
                              ds.link.relay_gain);
        break;
      }
      case EstimatorKind::indirect_sparse_l1: {
        SparseSolverConfig sp = cfg.sparse;
        sp.algo = SparseAlgo::l1;
        est = indirect_sparse(ds.link.z, ds.x, ds.h3, cfg.ls, sp,
                              ds.link.relay_gain);
        break;
      }
    }

    json result;
    result["schema"] = "afsense.estimate/1";
    result["estimator"] = estimator;
    result["h_hat"] = vec_to_json(est.h_hat);
    result["iterations"] = est.iterations;
    result["converged"] = est.converged;
    result["final_cost"] = est.final_cost;
    result["diagnostics"] = {
        {"stage1_residual_norm", est.diagnostics.stage1_residual_norm},
        {"stage2_residual_norm", est.diagnostics.stage2_residual_norm},
        {"stage1_noise_variance", est.diagnostics.stage1_noise_variance},
        {"lambda_used", est.diagnostics.lambda_used}};
    if (ds.has_ground_truth) {
      const std::optional<std::vector<Index>> support =
          ds.h1.kind == ChannelKind::sparse
              ? std::optional<std::vector<Index>>(ds.h1.support)
              : std::nullopt;
      result["rmse_overall"] = trial_rmse(ds.h1.taps, est.h_hat);
      result["rmse_nonzero"] = trial_rmse(ds.h1.taps, est.h_hat, support);
    } else {
      result["rmse_overall"] = nullptr;
      result["rmse_nonzero"] = nullptr;
    }
    result["config"] = config_to_json(cfg);

    write_text_file(out_path, result.dump(2) + "\n");
    write_text_file(out_path + ".manifest.json",
                    make_manifest(cfg, {out_path}).dump(2) + "\n");
    out << "wrote " << out_path << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    return report(err, e);
  }
}

int cmd_experiment(const CommonOptions& opts, const std::string& out_dir,
                   unsigned threads, std::ostream& out, std::ostream& err) {
  try {
    const Resolved r = resolve_config(opts);

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + out_dir + "'");

    const ExperimentResult result = run_experiment(r.cfg, threads);

    const auto path_in = [&](const std::string& name) {
      return (std::filesystem::path(out_dir) / name).string();
    };
    std::vector<std::string> files;
    write_text_file(path_in("trials.csv"), trials_to_csv(result));
    files.push_back("trials.csv");
    for (EstimatorKind kind : r.cfg.estimators) {
      for (Metric metric : {Metric::overall, Metric::nonzero}) {
        const std::string name =
            "cdf_" + estimator_name(kind) + "_" + metric_name(metric) + ".csv";
        write_text_file(path_in(name), cdf_to_csv(result.cdfs.at({kind, metric})));
        files.push_back(name);
      }
    }
    write_text_file(path_in("summary.json"), summary_to_json(result).dump(2) + "\n");
    files.push_back("summary.json");
    write_text_file(path_in("manifest.json"),
                    make_manifest(r.cfg, files).dump(2) + "\n");

    for (EstimatorKind kind : r.cfg.estimators) {
      const MetricSummary& s = result.summary.at({kind, Metric::overall});
      out << estimator_name(kind) << ": median rmse_overall "
          << format_double(s.median) << ", failed trials "
          << result.failures.at(kind) << "\n";
    }
    out << "wrote " << out_dir << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    return report(err, e);
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"indirect primary-channel estimation over an AF relay link"};
  app.require_subcommand(1);

  CommonOptions sim_opts;
  std::string sim_out = "dataset.json";
  CLI::App* sim = app.add_subcommand("simulate", "generate one link dataset");
  sim->add_option("--config", sim_opts.config_path, "JSON config path");
  sim->add_option("--preset", sim_opts.preset, "preset name");
  sim->add_option("--seed", sim_opts.seed, "master seed override");
  sim->add_option("--out", sim_out, "output dataset path");
  sim->add_option("--set", sim_opts.overrides, "dotted key=value override");
  sim->allow_extras();

  std::string est_data, est_name = "indirect_ls", est_out = "estimate.json";
  std::vector<std::string> est_overrides;
  CLI::App* est = app.add_subcommand("estimate", "estimate h1 from a dataset");
  est->add_option("--data", est_data, "dataset path")->required();
  est->add_option("--estimator", est_name, "estimator name");
  est->add_option("--out", est_out, "output path");
  est->add_option("--set", est_overrides, "dotted key=value override");
  est->allow_extras();

  CommonOptions exp_opts;
  std::string exp_out = "experiment_out";
  unsigned exp_threads = 0;
  CLI::App* exp = app.add_subcommand("experiment", "run a Monte Carlo experiment");
  exp->add_option("--config", exp_opts.config_path, "JSON config path");
  exp->add_option("--preset", exp_opts.preset, "preset name");
  exp->add_option("--seed", exp_opts.seed, "master seed override");
  exp->add_option("--out", exp_out, "output directory");
  exp->add_option("--threads", exp_threads, "worker thread cap (0 = hardware)");
  exp->add_option("--set", exp_opts.overrides, "dotted key=value override");
  exp->allow_extras();

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "afsense: " << e.what() << "\n";
    return kExitConfig;
  }

  // Leftover tokens are treated as dotted-path overrides: --sparse.p=0.8 or
  // --sparse.p 0.8.
  const auto collect_extras = [&err](CLI::App* cmd,
                                     std::vector<std::string>& overrides) {
    const std::vector<std::string> extras = cmd->remaining();
    for (std::size_t i = 0; i < extras.size(); ++i) {
      std::string tok = extras[i];
      if (tok.rfind("--", 0) == 0) tok = tok.substr(2);
      if (tok.find('=') == std::string::npos) {
        if (i + 1 >= extras.size()) {
          err << "afsense: override '" << tok << "' is missing a value\n";
          return false;
        }
        tok += "=" + extras[++i];
      }
      overrides.push_back(tok);
    }
    return true;
  };

  if (sim->parsed()) {
    if (!collect_extras(sim, sim_opts.overrides)) return kExitConfig;
    return cmd_simulate(sim_opts, sim_out, out, err);
  }
  if (est->parsed()) {
    if (!collect_extras(est, est_overrides)) return kExitConfig;
    return cmd_estimate(est_data, est_name, est_overrides, est_out, out, err);
  }
  if (exp->parsed()) {
    if (!collect_extras(exp, exp_opts.overrides)) return kExitConfig;
    return cmd_experiment(exp_opts, exp_out, exp_threads, out, err);
  }
  err << "afsense: no subcommand\n";
  return kExitConfig;
}

}  // namespace afsense

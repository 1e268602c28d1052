// SPDX-License-Identifier: Apache-2.0

#include "afsense/io.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

namespace afsense {

namespace {

constexpr const char* kToolName = "afsense";
constexpr const char* kToolVersion = "0.1.0";

[[noreturn]] void config_fail(const std::string& msg) { throw ConfigError("config error: " + msg); }

void expect_keys(const json& obj, const std::set<std::string>& allowed,
                 const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key()))
      config_fail("unknown key '" + (where.empty() ? it.key() : where + "." + it.key()) + "'");
  }
}

double get_number(const json& obj, const std::string& key) {
  if (!obj.contains(key)) config_fail("missing key '" + key + "'");
  const json& v = obj.at(key);
  if (!v.is_number()) config_fail("key '" + key + "' must be a number");
  return v.get<double>();
}

Index get_index(const json& obj, const std::string& key) {
  if (!obj.contains(key)) config_fail("missing key '" + key + "'");
  const json& v = obj.at(key);
  if (!v.is_number_integer()) config_fail("key '" + key + "' must be an integer");
  return v.get<Index>();
}

std::string get_string(const json& obj, const std::string& key) {
  if (!obj.contains(key)) config_fail("missing key '" + key + "'");
  const json& v = obj.at(key);
  if (!v.is_string()) config_fail("key '" + key + "' must be a string");
  return v.get<std::string>();
}

json snr_to_json(const ChannelSnr& s) {
  if (s.noiseless) return json("noiseless");
  return json(s.snr_db);
}

ChannelSnr snr_from_json(const json& v, const std::string& key) {
  if (v.is_string()) {
    if (v.get<std::string>() != "noiseless")
      config_fail("key '" + key + "' must be a number or \"noiseless\"");
    return ChannelSnr::off();
  }
  if (!v.is_number()) config_fail("key '" + key + "' must be a number or \"noiseless\"");
  const double db = v.get<double>();
  if (!std::isfinite(db)) config_fail("key '" + key + "' must be finite");
  return ChannelSnr::db(db);
}

std::string timestamp_utc() {
  const std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

}  // namespace

json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["n_taps"] = cfg.n_taps;
  j["training_len"] = cfg.training_len;
  j["channel_kind"] = cfg.channel_kind == ChannelKind::sparse ? "sparse" : "dense";
  j["sparse_k"] = cfg.sparse_k;
  j["head_region"] = cfg.head_region;
  j["head_count"] = cfg.head_count;
  j["decay_rate"] = cfg.decay_rate;
  j["snr1_db"] = snr_to_json(cfg.snr1);
  j["snr2_db"] = snr_to_json(cfg.snr2);
  j["snr3_db"] = snr_to_json(cfg.snr3);
  j["trials"] = cfg.trials;
  j["master_seed"] = cfg.master_seed;
  json est = json::array();
  for (EstimatorKind k : cfg.estimators) est.push_back(estimator_name(k));
  j["estimators"] = est;
  if (cfg.h3_knowledge.kind == H3Knowledge::Kind::oracle) {
    j["h3_knowledge"] = "oracle";
  } else {
    j["h3_knowledge"] = {{"probe_len", cfg.h3_knowledge.probe_len},
                         {"probe_snr_db", cfg.h3_knowledge.probe_snr_db}};
  }
  j["x_mode"] = cfg.x_mode == MatrixMode::full ? "full" : "truncated";
  j["h3_mode"] = cfg.h3_mode == MatrixMode::full ? "full" : "truncated";
  j["relay_gain"] = cfg.relay_gain;
  j["training_scheme"] =
      cfg.training_scheme == TrainingScheme::bpsk ? "bpsk" : "ramp";
  j["ls"] = {{"ridge", cfg.ls.ridge},
             {"mode", cfg.ls.mode == LsMode::normal_equations ? "normal_equations"
                                                              : "pseudo_inverse"}};
  json sp;
  sp["p"] = cfg.sparse.p;
  if (cfg.sparse.auto_lambda)
    sp["lambda"] = "auto";
  else
    sp["lambda"] = cfg.sparse.lambda;
  sp["max_iter"] = cfg.sparse.max_iter;
  sp["tol"] = cfg.sparse.tol;
  sp["eps_floor"] = cfg.sparse.eps_floor;
  sp["init"] = cfg.sparse.init == SparseInit::ls_solution ? "ls_solution" : "ones";
  switch (cfg.sparse.inner_reg) {
    case InnerReg::half_lambda_bar: sp["inner_reg"] = "half_lambda_bar"; break;
    case InnerReg::lambda_bar: sp["inner_reg"] = "lambda_bar"; break;
    case InnerReg::lambda: sp["inner_reg"] = "lambda"; break;
  }
  sp["algo"] = cfg.sparse.algo == SparseAlgo::irls ? "irls" : "l1";
  j["sparse"] = sp;
  return j;
}

ExperimentConfig config_from_json(const json& input) {
  const json* jp = &input;
  if (input.is_object() && input.contains("config") && input.at("config").is_object())
    jp = &input.at("config");
  const json& j = *jp;
  if (!j.is_object()) config_fail("top level must be an object");

  expect_keys(j, {"n_taps", "training_len", "channel_kind", "sparse_k",
                  "head_region", "head_count", "decay_rate", "snr1_db",
                  "snr2_db", "snr3_db", "trials", "master_seed", "estimators",
                  "h3_knowledge", "x_mode", "h3_mode", "relay_gain",
                  "training_scheme", "ls", "sparse"},
              "");

  ExperimentConfig cfg;
  if (j.contains("n_taps")) cfg.n_taps = get_index(j, "n_taps");
  if (j.contains("training_len")) cfg.training_len = get_index(j, "training_len");
  if (j.contains("channel_kind")) {
    const std::string kind = get_string(j, "channel_kind");
    if (kind == "sparse") cfg.channel_kind = ChannelKind::sparse;
    else if (kind == "dense") cfg.channel_kind = ChannelKind::dense;
    else config_fail("channel_kind must be \"sparse\" or \"dense\"");
  }
  if (j.contains("sparse_k")) cfg.sparse_k = get_index(j, "sparse_k");
  if (j.contains("head_region")) cfg.head_region = get_index(j, "head_region");
  if (j.contains("head_count")) cfg.head_count = get_index(j, "head_count");
  if (j.contains("decay_rate")) cfg.decay_rate = get_number(j, "decay_rate");
  if (j.contains("snr1_db")) cfg.snr1 = snr_from_json(j.at("snr1_db"), "snr1_db");
  if (j.contains("snr2_db")) cfg.snr2 = snr_from_json(j.at("snr2_db"), "snr2_db");
  if (j.contains("snr3_db")) cfg.snr3 = snr_from_json(j.at("snr3_db"), "snr3_db");
  if (j.contains("trials")) cfg.trials = get_index(j, "trials");
  if (j.contains("master_seed")) {
    const json& v = j.at("master_seed");
    if (!v.is_number_unsigned() && !v.is_number_integer())
      config_fail("master_seed must be a non-negative integer");
    cfg.master_seed = v.get<std::uint64_t>();
  }
  if (j.contains("estimators")) {
    const json& v = j.at("estimators");
    if (!v.is_array() || v.empty())
      config_fail("estimators must be a non-empty array of names");
    cfg.estimators.clear();
    for (const json& e : v) {
      if (!e.is_string()) config_fail("estimators entries must be strings");
      auto kind = estimator_from_name(e.get<std::string>());
      if (!kind)
        config_fail("unknown estimator '" + e.get<std::string>() +
                    "' (valid: indirect_ls, indirect_sparse_irls, indirect_sparse_l1)");
      cfg.estimators.push_back(*kind);
    }
  }
  if (j.contains("h3_knowledge")) {
    const json& v = j.at("h3_knowledge");
    if (v.is_string()) {
      if (v.get<std::string>() != "oracle")
        config_fail("h3_knowledge must be \"oracle\" or an object");
      cfg.h3_knowledge.kind = H3Knowledge::Kind::oracle;
    } else if (v.is_object()) {
      expect_keys(v, {"probe_len", "probe_snr_db"}, "h3_knowledge");
      cfg.h3_knowledge.kind = H3Knowledge::Kind::estimated;
      cfg.h3_knowledge.probe_len = get_index(v, "probe_len");
      cfg.h3_knowledge.probe_snr_db = get_number(v, "probe_snr_db");
    } else {
      config_fail("h3_knowledge must be \"oracle\" or an object");
    }
  }
  auto mode_from = [](const std::string& s, const std::string& key) {
    if (s == "full") return MatrixMode::full;
    if (s == "truncated") return MatrixMode::truncated;
    config_fail("key '" + key + "' must be \"full\" or \"truncated\"");
  };
  if (j.contains("x_mode")) cfg.x_mode = mode_from(get_string(j, "x_mode"), "x_mode");
  if (j.contains("h3_mode"))
    cfg.h3_mode = mode_from(get_string(j, "h3_mode"), "h3_mode");
  if (j.contains("relay_gain")) cfg.relay_gain = get_number(j, "relay_gain");
  if (j.contains("training_scheme")) {
    const std::string s = get_string(j, "training_scheme");
    if (s == "bpsk") cfg.training_scheme = TrainingScheme::bpsk;
    else if (s == "ramp") cfg.training_scheme = TrainingScheme::ramp;
    else config_fail("training_scheme must be \"bpsk\" or \"ramp\"");
  }
  if (j.contains("ls")) {
    const json& v = j.at("ls");
    if (!v.is_object()) config_fail("ls must be an object");
    expect_keys(v, {"ridge", "mode"}, "ls");
    if (v.contains("ridge")) cfg.ls.ridge = get_number(v, "ridge");
    if (v.contains("mode")) {
      const std::string m = get_string(v, "mode");
      if (m == "normal_equations") cfg.ls.mode = LsMode::normal_equations;
      else if (m == "pseudo_inverse") cfg.ls.mode = LsMode::pseudo_inverse;
      else config_fail("ls.mode must be \"normal_equations\" or \"pseudo_inverse\"");
    }
  }
  if (j.contains("sparse")) {
    const json& v = j.at("sparse");
    if (!v.is_object()) config_fail("sparse must be an object");
    expect_keys(v, {"p", "lambda", "max_iter", "tol", "eps_floor", "init",
                    "inner_reg", "algo"},
                "sparse");
    if (v.contains("p")) cfg.sparse.p = get_number(v, "p");
    if (v.contains("lambda")) {
      const json& lam = v.at("lambda");
      if (lam.is_string()) {
        if (lam.get<std::string>() != "auto")
          config_fail("sparse.lambda must be a positive number or \"auto\"");
        cfg.sparse.auto_lambda = true;
      } else if (lam.is_number()) {
        cfg.sparse.auto_lambda = false;
        cfg.sparse.lambda = lam.get<double>();
      } else {
        config_fail("sparse.lambda must be a positive number or \"auto\"");
      }
    }
    if (v.contains("max_iter")) cfg.sparse.max_iter = get_index(v, "max_iter");
    if (v.contains("tol")) cfg.sparse.tol = get_number(v, "tol");
    if (v.contains("eps_floor")) cfg.sparse.eps_floor = get_number(v, "eps_floor");
    if (v.contains("init")) {
      const std::string s = get_string(v, "init");
      if (s == "ls_solution") cfg.sparse.init = SparseInit::ls_solution;
      else if (s == "ones") cfg.sparse.init = SparseInit::ones;
      else config_fail("sparse.init must be \"ls_solution\" or \"ones\"");
    }
    if (v.contains("inner_reg")) {
      const std::string s = get_string(v, "inner_reg");
      if (s == "half_lambda_bar") cfg.sparse.inner_reg = InnerReg::half_lambda_bar;
      else if (s == "lambda_bar") cfg.sparse.inner_reg = InnerReg::lambda_bar;
      else if (s == "lambda") cfg.sparse.inner_reg = InnerReg::lambda;
      else
        config_fail(
            "sparse.inner_reg must be \"half_lambda_bar\", \"lambda_bar\" or \"lambda\"");
    }
    if (v.contains("algo")) {
      const std::string s = get_string(v, "algo");
      if (s == "irls") cfg.sparse.algo = SparseAlgo::irls;
      else if (s == "l1") cfg.sparse.algo = SparseAlgo::l1;
      else config_fail("sparse.algo must be \"irls\" or \"l1\"");
    }
  }

  try {
    cfg.validate();
  } catch (const InvalidArgument& e) {
    config_fail(e.what());
  }
  return cfg;
}

json parse_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // Convert the byte offset into a line number for the message.
    std::size_t line = 1;
    const std::size_t limit = std::min(text.size(), e.byte);
    for (std::size_t i = 0; i < limit; ++i)
      if (text[i] == '\n') ++line;
    throw ConfigError(path + ":" + std::to_string(line) + ": " + e.what());
  }
}

void apply_override(json& config, const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    config_fail("override '" + assignment + "' is not of the form key.path=value");
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);

  json* node = &config;
  std::size_t start = 0;
  for (;;) {
    const std::size_t dot = path.find('.', start);
    const std::string key = path.substr(start, dot - start);
    if (key.empty()) config_fail("override '" + assignment + "' has an empty key segment");
    if (dot == std::string::npos) {
      json value;
      try {
        value = json::parse(raw);
      } catch (const json::parse_error&) {
        value = raw;  // bare strings like full/bpsk need no quotes
      }
      (*node)[key] = value;
      return;
    }
    if (!node->contains(key) || !(*node)[key].is_object()) (*node)[key] = json::object();
    node = &(*node)[key];
    start = dot + 1;
  }
}

json vec_to_json(const Vec& v) {
  json re = json::array();
  json im = json::array();
  for (Index i = 0; i < v.size(); ++i) {
    re.push_back(v[i].real());
    im.push_back(v[i].imag());
  }
  return json{{"re", re}, {"im", im}};
}

Vec vec_from_json(const json& j, const std::string& key) {
  if (!j.is_object() || !j.contains("re") || !j.contains("im"))
    config_fail("vector '" + key + "' must be {\"re\": [...], \"im\": [...]}" );
  const json& re = j.at("re");
  const json& im = j.at("im");
  if (!re.is_array() || !im.is_array() || re.size() != im.size())
    config_fail("vector '" + key + "' re/im arrays must match");
  Vec v(static_cast<Index>(re.size()));
  for (std::size_t i = 0; i < re.size(); ++i)
    v[static_cast<Index>(i)] = Complex(re[i].get<double>(), im[i].get<double>());
  return v;
}

json dataset_to_json(const SimulationDataset& ds) {
  json j;
  j["schema"] = "afsense.dataset/1";
  j["seed"] = ds.seed;
  j["config"] = config_to_json(ds.config);
  j["x"] = vec_to_json(ds.x.samples);
  if (ds.has_ground_truth) {
    j["h1"] = vec_to_json(ds.h1.taps);
    j["h1_kind"] = ds.h1.kind == ChannelKind::sparse ? "sparse" : "dense";
    json support = json::array();
    for (Index i : ds.h1.support) support.push_back(i);
    j["h1_support"] = support;
  }
  j["h2"] = vec_to_json(ds.h2.taps);
  j["h3"] = vec_to_json(ds.h3.taps);
  j["y"] = vec_to_json(ds.link.y);
  j["z"] = vec_to_json(ds.link.z);
  j["direct"] = vec_to_json(ds.link.direct);
  j["n1"] = vec_to_json(ds.link.n1);
  j["n3"] = vec_to_json(ds.link.n3);
  j["n_direct"] = vec_to_json(ds.link.n_direct);
  j["relay_gain"] = ds.link.relay_gain;
  return j;
}

SimulationDataset dataset_from_json(const json& j) {
  if (!j.is_object()) config_fail("dataset: top level must be an object");
  for (const char* key : {"x", "z", "h3", "relay_gain"})
    if (!j.contains(key)) config_fail(std::string("dataset: missing key '") + key + "'");

  SimulationDataset ds;
  if (j.contains("seed")) ds.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("config")) ds.config = config_from_json(j.at("config"));
  ds.x = custom_training_signal(vec_from_json(j.at("x"), "x"));
  ds.h3.taps = vec_from_json(j.at("h3"), "h3");
  ds.h3.kind = ChannelKind::dense;
  if (j.contains("h2")) {
    ds.h2.taps = vec_from_json(j.at("h2"), "h2");
    ds.h2.kind = ChannelKind::dense;
  }
  ds.link.z = vec_from_json(j.at("z"), "z");
  if (j.contains("y")) ds.link.y = vec_from_json(j.at("y"), "y");
  if (j.contains("direct")) ds.link.direct = vec_from_json(j.at("direct"), "direct");
  if (j.contains("n1")) ds.link.n1 = vec_from_json(j.at("n1"), "n1");
  if (j.contains("n3")) ds.link.n3 = vec_from_json(j.at("n3"), "n3");
  if (j.contains("n_direct"))
    ds.link.n_direct = vec_from_json(j.at("n_direct"), "n_direct");
  ds.link.relay_gain = j.at("relay_gain").get<double>();

  ds.has_ground_truth = j.contains("h1");
  if (ds.has_ground_truth) {
    ds.h1.taps = vec_from_json(j.at("h1"), "h1");
    ds.h1.kind = j.value("h1_kind", "dense") == "sparse" ? ChannelKind::sparse
                                                         : ChannelKind::dense;
    if (j.contains("h1_support"))
      for (const json& v : j.at("h1_support")) ds.h1.support.push_back(v.get<Index>());
  }
  return ds;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string trials_to_csv(const ExperimentResult& result) {
  std::ostringstream out;
  out << "trial,estimator,rmse_overall,rmse_nonzero,iterations,converged\n";
  for (const TrialResult& tr : result.trials) {
    for (std::size_t e = 0; e < result.config.estimators.size(); ++e) {
      const EstimatorTrial& et = tr.per_estimator[e];
      out << tr.trial_index << ',' << estimator_name(result.config.estimators[e])
          << ',' << format_double(et.rmse_overall) << ','
          << format_double(et.rmse_nonzero) << ',' << et.iterations << ','
          << (et.converged ? 1 : 0) << '\n';
    }
  }
  return out.str();
}

std::string cdf_to_csv(const CdfTable& cdf) {
  std::ostringstream out;
  out << "value,probability\n";
  for (std::size_t i = 0; i < cdf.values.size(); ++i)
    out << format_double(cdf.values[i]) << ',' << format_double(cdf.probabilities[i])
        << '\n';
  return out.str();
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

}  // namespace

std::vector<TrialCsvRow> parse_trials_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) ||
      line != "trial,estimator,rmse_overall,rmse_nonzero,iterations,converged")
    throw IoError("trials csv: bad header");
  std::vector<TrialCsvRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 6) throw IoError("trials csv: bad row '" + line + "'");
    TrialCsvRow row;
    row.trial = std::stoll(f[0]);
    row.estimator = f[1];
    row.rmse_overall = std::strtod(f[2].c_str(), nullptr);
    row.rmse_nonzero = std::strtod(f[3].c_str(), nullptr);
    row.iterations = std::stoll(f[4]);
    row.converged = f[5] == "1";
    rows.push_back(row);
  }
  return rows;
}

std::string trials_rows_to_csv(const std::vector<TrialCsvRow>& rows) {
  std::ostringstream out;
  out << "trial,estimator,rmse_overall,rmse_nonzero,iterations,converged\n";
  for (const TrialCsvRow& r : rows) {
    out << r.trial << ',' << r.estimator << ',' << format_double(r.rmse_overall)
        << ',' << format_double(r.rmse_nonzero) << ',' << r.iterations << ','
        << (r.converged ? 1 : 0) << '\n';
  }
  return out.str();
}

CdfTable parse_cdf_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "value,probability")
    throw IoError("cdf csv: bad header");
  CdfTable cdf;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 2) throw IoError("cdf csv: bad row '" + line + "'");
    cdf.values.push_back(std::strtod(f[0].c_str(), nullptr));
    cdf.probabilities.push_back(std::strtod(f[1].c_str(), nullptr));
  }
  return cdf;
}

json summary_to_json(const ExperimentResult& result) {
  json j;
  j["trials"] = result.config.trials;
  json per_estimator;
  for (EstimatorKind kind : result.config.estimators) {
    json e;
    for (Metric metric : {Metric::overall, Metric::nonzero}) {
      const MetricSummary& s = result.summary.at({kind, metric});
      json m;
      m["median"] = s.median;
      m["mean"] = s.mean;
      m["aggregate_rmse"] = s.aggregate_rmse;
      e[metric_name(metric)] = m;
    }
    e["failed_trials"] = result.failures.at(kind);
    per_estimator[estimator_name(kind)] = e;
  }
  j["estimators"] = per_estimator;
  return j;
}

json make_manifest(const ExperimentConfig& cfg,
                   const std::vector<std::string>& output_files) {
  json j;
  j["tool"] = kToolName;
  j["version"] = kToolVersion;
  j["timestamp"] = timestamp_utc();
  j["master_seed"] = cfg.master_seed;
  j["config"] = config_to_json(cfg);
  j["outputs"] = output_files;
  return j;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace afsense

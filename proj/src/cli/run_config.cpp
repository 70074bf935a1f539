#include <fstream>
#include <set>

#include "resdeploy/cli/commands.hpp"
#include "resdeploy/error.hpp"
#include "resdeploy/util/parallel.hpp"

namespace resdeploy::cli {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

const std::set<std::string> kKeys = {
    "grid",       "slack_node", "alpha",        "methods",         "c_viol",         "max_scenarios",
    "adm_iterations", "adm_eps", "gap_tol",     "flagged_lines",   "init_set",       "slack_tol",
    "quantile",   "curtailment", "curtailment_cost", "workers",    "output_dir",     "hours",
    "forecast",   "train",      "test",         "sampler"};

const std::set<std::string> kSamplerKeys = {"nodes",      "covariance_pu2", "base_mva",   "train_seed",
                                            "test_seed",  "train_count",    "test_count"};

template <typename T>
T get(const json& doc, const char* key, const T& fallback) {
  if (!doc.contains(key)) return fallback;
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config field '") + key + "' has the wrong type");
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

// Per-hour seed derived from the configured base seed.
std::uint64_t hour_seed(std::uint64_t base, int hour) { return base + 1000003ull * static_cast<std::uint64_t>(hour); }

}  // namespace

RunConfig parse_run_config(const json& doc, const fs::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  for (auto it = doc.begin(); it != doc.end(); ++it)
    if (!kKeys.count(it.key())) throw ConfigError("unknown config field '" + it.key() + "'");

  RunConfig c;
  if (!doc.contains("grid")) throw ConfigError("config field 'grid' is required");
  c.grid = resolve(base_dir, get<std::string>(doc, "grid", ""));
  if (doc.contains("slack_node")) c.slack_node = get<int>(doc, "slack_node", 0);
  if (doc.contains("alpha")) {
    const json& a = doc.at("alpha");
    if (a.is_number()) c.alphas = {a.get<double>()};
    else if (a.is_array()) c.alphas = get<std::vector<double>>(doc, "alpha", {});
    else throw ConfigError("config field 'alpha' must be a number or a list");
  }
  if (doc.contains("methods")) {
    c.methods.clear();
    for (const auto& name : get<std::vector<std::string>>(doc, "methods", {})) {
      const auto m = evalsim::parse_method(name);
      if (!m) throw ConfigError("unknown method '" + name + "' (expected dsw, ext, ccg or venum)");
      c.methods.push_back(*m);
    }
  }
  c.c_viol = get(doc, "c_viol", c.c_viol);
  c.max_scenarios = get(doc, "max_scenarios", c.max_scenarios);
  c.adm_iterations = get(doc, "adm_iterations", c.adm_iterations);
  c.adm_eps = get(doc, "adm_eps", c.adm_eps);
  c.gap_tol = get(doc, "gap_tol", c.gap_tol);
  c.flagged_lines = get(doc, "flagged_lines", c.flagged_lines);
  if (doc.contains("init_set")) {
    const auto name = get<std::string>(doc, "init_set", "");
    const auto s = evalsim::parse_init_set(name);
    if (!s) throw ConfigError("unknown init_set '" + name + "' (expected all, extremes or lines)");
    c.init_set = *s;
  }
  c.slack_tol = get(doc, "slack_tol", c.slack_tol);
  if (doc.contains("quantile")) {
    const auto q = get<std::string>(doc, "quantile", "");
    if (q == "linear") c.quantile = forecast::QuantileMethod::kLinear;
    else if (q == "nearest-rank") c.quantile = forecast::QuantileMethod::kNearestRank;
    else throw ConfigError("unknown quantile '" + q + "' (expected linear or nearest-rank)");
  }
  c.curtailment = get(doc, "curtailment", c.curtailment);
  c.curtailment_cost = get(doc, "curtailment_cost", c.curtailment_cost);
  c.workers = get(doc, "workers", c.workers);
  c.output_dir = resolve(base_dir, get<std::string>(doc, "output_dir", "out"));

  if (doc.contains("hours")) {
    if (doc.contains("forecast")) throw ConfigError("use either 'hours' or 'forecast', not both");
    for (const auto& h : doc.at("hours")) {
      if (!h.is_object() || !h.contains("forecast")) throw ConfigError("every hour needs a 'forecast' path");
      HourSpec s;
      s.hour = get(h, "hour", static_cast<int>(c.hours.size()));
      s.forecast = resolve(base_dir, get<std::string>(h, "forecast", ""));
      if (h.contains("train")) s.train = resolve(base_dir, get<std::string>(h, "train", ""));
      if (h.contains("test")) s.test = resolve(base_dir, get<std::string>(h, "test", ""));
      c.hours.push_back(std::move(s));
    }
  } else if (doc.contains("forecast")) {
    HourSpec s;
    s.forecast = resolve(base_dir, get<std::string>(doc, "forecast", ""));
    if (doc.contains("train")) s.train = resolve(base_dir, get<std::string>(doc, "train", ""));
    if (doc.contains("test")) s.test = resolve(base_dir, get<std::string>(doc, "test", ""));
    c.hours.push_back(std::move(s));
  }

  if (doc.contains("sampler")) {
    const json& s = doc.at("sampler");
    if (!s.is_object()) throw ConfigError("config field 'sampler' must be an object");
    for (auto it = s.begin(); it != s.end(); ++it)
      if (!kSamplerKeys.count(it.key())) throw ConfigError("unknown sampler field '" + it.key() + "'");
    SamplerConfig sc;
    sc.node_ids = get<std::vector<int>>(s, "nodes", {});
    const auto cov = get<std::vector<std::vector<double>>>(s, "covariance_pu2", {});
    const auto d = static_cast<Eigen::Index>(sc.node_ids.size());
    if (static_cast<Eigen::Index>(cov.size()) != d) throw ConfigError("sampler covariance must have one row per node");
    sc.covariance.resize(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      if (static_cast<Eigen::Index>(cov[i].size()) != d) throw ConfigError("sampler covariance must be square");
      for (Eigen::Index j = 0; j < d; ++j) sc.covariance(i, j) = cov[i][j];
    }
    sc.base_mva = get(s, "base_mva", sc.base_mva);
    sc.train_seed = get(s, "train_seed", sc.train_seed);
    sc.test_seed = get(s, "test_seed", sc.test_seed);
    sc.train_count = get(s, "train_count", sc.train_count);
    sc.test_count = get(s, "test_count", sc.test_count);
    c.sampler = std::move(sc);
  }
  return c;
}

RunConfig load_run_config(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot read config " + file.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
  if (doc.is_object() && doc.contains("config") && doc.contains("artifacts")) doc = doc.at("config");
  return parse_run_config(doc, fs::absolute(file).parent_path());
}

void check_run_config(const RunConfig& c) {
  if (c.alphas.empty()) throw ConfigError("at least one alpha is required");
  for (double a : c.alphas)
    if (!(a > 0.0 && a < 1.0)) throw ConfigError("alpha must lie in (0, 1), got " + std::to_string(a));
  if (c.methods.empty()) throw ConfigError("at least one method is required");
  if (!(c.c_viol > 0.0)) throw ConfigError("c_viol must be positive");
  if (c.max_scenarios < 0) throw ConfigError("max_scenarios must be nonnegative");
  if (c.adm_iterations < 1) throw ConfigError("adm_iterations must be at least 1");
  if (!(c.adm_eps > 0.0) || !(c.gap_tol >= 0.0) || !(c.slack_tol >= 0.0)) throw ConfigError("tolerances must be positive");
  if (c.flagged_lines < 0) throw ConfigError("flagged_lines must be nonnegative");
  if (c.workers < 0) throw ConfigError("workers must be nonnegative");
  if (!fs::exists(c.grid)) throw ConfigError("grid path does not exist: " + c.grid.string());
  if (c.hours.empty()) throw ConfigError("no hours configured (set 'forecast' or 'hours')");
  for (const auto& h : c.hours) {
    if (!fs::exists(h.forecast)) throw ConfigError("forecast file does not exist: " + h.forecast.string());
    for (const auto* p : {&h.train, &h.test}) {
      if (*p && !fs::exists(**p)) throw ConfigError("scenario file does not exist: " + (*p)->string());
      if (!*p && !c.sampler) throw ConfigError("hour " + std::to_string(h.hour) + " has no scenario file and no sampler");
    }
  }
  if (c.sampler) {
    if (c.sampler->train_count < 2) throw ConfigError("sampler train_count must be at least 2");
    if (c.sampler->test_count < 0) throw ConfigError("sampler test_count must be nonnegative");
  }
}

ordered_json RunConfig::to_json() const {
  ordered_json j;
  j["grid"] = grid.string();
  if (slack_node) j["slack_node"] = *slack_node;
  j["alpha"] = alphas;
  auto& ms = j["methods"] = ordered_json::array();
  for (auto m : methods) ms.push_back(evalsim::to_string(m));
  j["c_viol"] = c_viol;
  j["max_scenarios"] = max_scenarios;
  j["adm_iterations"] = adm_iterations;
  j["adm_eps"] = adm_eps;
  j["gap_tol"] = gap_tol;
  j["flagged_lines"] = flagged_lines;
  j["init_set"] = evalsim::to_string(init_set);
  j["slack_tol"] = slack_tol;
  j["quantile"] = quantile == forecast::QuantileMethod::kLinear ? "linear" : "nearest-rank";
  j["curtailment"] = curtailment;
  j["curtailment_cost"] = curtailment_cost;
  j["workers"] = workers;
  j["output_dir"] = output_dir.string();
  auto& hs = j["hours"] = ordered_json::array();
  for (const auto& h : hours) {
    ordered_json e;
    e["hour"] = h.hour;
    e["forecast"] = h.forecast.string();
    if (h.train) e["train"] = h.train->string();
    if (h.test) e["test"] = h.test->string();
    hs.push_back(std::move(e));
  }
  if (sampler) {
    ordered_json s;
    s["nodes"] = sampler->node_ids;
    auto& cov = s["covariance_pu2"] = ordered_json::array();
    for (Eigen::Index i = 0; i < sampler->covariance.rows(); ++i) {
      std::vector<double> row(sampler->covariance.cols());
      for (Eigen::Index k = 0; k < sampler->covariance.cols(); ++k) row[k] = sampler->covariance(i, k);
      cov.push_back(row);
    }
    s["base_mva"] = sampler->base_mva;
    s["train_seed"] = sampler->train_seed;
    s["test_seed"] = sampler->test_seed;
    s["train_count"] = sampler->train_count;
    s["test_count"] = sampler->test_count;
    j["sampler"] = std::move(s);
  }
  return j;
}

evalsim::EvalConfig eval_config(const RunConfig& c, double alpha) {
  evalsim::EvalConfig e;
  e.alpha = alpha;
  e.methods = c.methods;
  e.slack_tol = c.slack_tol;
  e.quantile = c.quantile;
  e.init_set = c.init_set;
  e.flagged_lines = c.flagged_lines;
  e.ccg.c_viol = c.c_viol;
  e.ccg.max_scenarios = c.max_scenarios;
  e.ccg.gap_tol = c.gap_tol;
  e.ccg.adm.max_iterations = c.adm_iterations;
  e.ccg.adm.eps = c.adm_eps;
  e.ccg.workers = c.workers > 0 ? c.workers : util::default_workers();
  e.ccg.scheduling.curtailment = c.curtailment;
  e.ccg.scheduling.curtailment_cost = c.curtailment_cost;
  return e;
}

std::vector<evalsim::HourInput> load_hours(const RunConfig& c, const grid::GridModel& grid) {
  std::vector<int> ids;
  for (const auto& n : grid.nodes()) ids.push_back(n.id);
  std::optional<evalsim::GaussianSampler> sampler;
  if (c.sampler) {
    evalsim::GaussianSampler s;
    s.covariance = c.sampler->covariance;
    for (int id : c.sampler->node_ids) s.nodes.push_back(grid.node_index(id));
    s.num_nodes = grid.num_nodes();
    s.base_mva = c.sampler->base_mva;
    sampler = std::move(s);
  }
  std::vector<evalsim::HourInput> out;
  for (const auto& h : c.hours) {
    evalsim::HourInput in;
    in.hour = h.hour;
    const forecast::PointForecast pf = forecast::load_forecast(h.forecast, ids);
    in.d_hat = pf.d_hat;
    in.vre = pf.vre;
    auto scenarios = [&](const std::optional<fs::path>& file, std::uint64_t seed, int count) {
      forecast::ScenarioSet set;
      set.d_hat = pf.d_hat;
      set.vre = pf.vre;
      if (file) {
        set.errors = forecast::load_scenario_errors(*file, ids);
      } else {
        evalsim::GaussianSampler s = *sampler;
        s.seed = hour_seed(seed, h.hour);
        set.errors = evalsim::sample_errors(s, count);
      }
      return set;
    };
    in.train = scenarios(h.train, c.sampler ? c.sampler->train_seed : 0, c.sampler ? c.sampler->train_count : 0);
    in.test = scenarios(h.test, c.sampler ? c.sampler->test_seed : 0, c.sampler ? c.sampler->test_count : 0);
    out.push_back(std::move(in));
  }
  return out;
}

}  // namespace resdeploy::cli

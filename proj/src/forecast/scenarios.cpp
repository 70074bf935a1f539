#include "resdeploy/forecast/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <unordered_map>

#include "resdeploy/error.hpp"
#include "resdeploy/util/csv.hpp"

namespace resdeploy::forecast {

void ScenarioSet::validate(int expected_nodes) const {
  if (num_scenarios() < 2) {
    throw ValidationError("scenario set needs at least 2 scenarios, got " + std::to_string(num_scenarios()));
  }
  if (num_nodes() != expected_nodes) {
    throw ValidationError("scenario set has " + std::to_string(num_nodes()) + " nodes, grid has " +
                          std::to_string(expected_nodes));
  }
  if (d_hat.size() != expected_nodes) throw ValidationError("point forecast dimension does not match the grid");
  if (vre && vre->size() != expected_nodes) throw ValidationError("VRE forecast dimension does not match the grid");
  if (!errors.allFinite()) throw ValidationError("scenario errors contain NaN or infinite entries");
  if (!d_hat.allFinite()) throw ValidationError("point forecast contains NaN or infinite entries");
  if (vre && !vre->allFinite()) throw ValidationError("VRE forecast contains NaN or infinite entries");
}

double empirical_quantile(std::span<const double> samples, double u, QuantileMethod method) {
  if (samples.empty()) throw ValidationError("quantile of an empty sample");
  if (!(u >= 0.0 && u <= 1.0)) throw ValidationError("quantile level must lie in [0,1]");
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  const std::size_t k = x.size();
  if (method == QuantileMethod::kNearestRank) {
    const auto rank = static_cast<std::size_t>(std::ceil(u * static_cast<double>(k)));
    return x[rank == 0 ? 0 : std::min(rank, k) - 1];
  }
  const double h = (static_cast<double>(k) - 1.0) * u;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= k) return x[k - 1];
  const double frac = h - static_cast<double>(lo);
  if (frac == 0.0) return x[lo];
  return x[lo] + frac * (x[lo + 1] - x[lo]);
}

double empirical_quantile(const Eigen::VectorXd& samples, double u, QuantileMethod method) {
  return empirical_quantile(std::span<const double>(samples.data(), static_cast<std::size_t>(samples.size())), u,
                            method);
}

ReserveRequirement reserve_requirements(const ScenarioSet& scenarios, double alpha, QuantileMethod method) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0,1)");
  const Eigen::VectorXd agg = scenarios.aggregates();
  ReserveRequirement req;
  req.alpha = alpha;
  req.rho_plus = empirical_quantile(agg, 0.5 * (1.0 + alpha), method);
  req.rho_minus = empirical_quantile(agg, 0.5 * (1.0 - alpha), method);
  return req;
}

Eigen::VectorXd nodal_quantiles(const ScenarioSet& scenarios, double u, QuantileMethod method) {
  Eigen::VectorXd q(scenarios.num_nodes());
  for (int n = 0; n < scenarios.num_nodes(); ++n) {
    const Eigen::VectorXd col = scenarios.errors.col(n);
    q[n] = empirical_quantile(col, u, method);
  }
  return q;
}

namespace {

std::unordered_map<int, int> index_of(const std::vector<int>& node_ids) {
  std::unordered_map<int, int> idx;
  for (std::size_t i = 0; i < node_ids.size(); ++i) idx[node_ids[i]] = static_cast<int>(i);
  return idx;
}

std::string where(const util::CsvTable& t, std::size_t r) {
  return t.source() + ":" + std::to_string(t.line_of(r)) + ": ";
}

}  // namespace

Eigen::MatrixXd load_scenario_errors(const std::filesystem::path& file, const std::vector<int>& node_ids) {
  const util::CsvTable t = util::CsvTable::read(file);
  const auto c_s = t.column("scenario_id");
  const auto c_n = t.column("node_id");
  const auto c_e = t.column("error_mw");
  const auto idx = index_of(node_ids);
  std::map<std::string, int> scen_row;
  std::vector<std::string> order;
  std::set<std::pair<int, int>> seen;
  std::vector<std::tuple<int, int, double>> entries;
  for (std::size_t r = 0; r < t.size(); ++r) {
    const std::string& sid = t.cell(r, c_s);
    const int node = t.integer(r, c_n);
    const auto it = idx.find(node);
    if (it == idx.end()) throw ValidationError(where(t, r) + "unknown node id " + std::to_string(node));
    auto [pos, fresh] = scen_row.emplace(sid, static_cast<int>(order.size()));
    if (fresh) order.push_back(sid);
    if (!seen.insert({pos->second, it->second}).second) {
      throw ValidationError(where(t, r) + "repeated entry for scenario " + sid + ", node " + std::to_string(node));
    }
    const double e = t.number(r, c_e);
    if (!std::isfinite(e)) throw ValidationError(where(t, r) + "non-finite error value");
    entries.emplace_back(pos->second, it->second, e);
  }
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<int>(order.size()), static_cast<int>(node_ids.size()));
  for (const auto& [k, n, e] : entries) m(k, n) = e;
  return m;
}

void write_scenario_errors(const std::filesystem::path& file, const Eigen::MatrixXd& errors,
                           const std::vector<int>& node_ids, int first_id) {
  if (errors.cols() != static_cast<int>(node_ids.size())) throw ValidationError("scenario/node dimension mismatch");
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file);
  if (!out) throw Error("cannot write '" + file.string() + "'");
  out << "scenario_id,node_id,error_mw\n";
  for (int k = 0; k < errors.rows(); ++k)
    for (int n = 0; n < errors.cols(); ++n)
      out << first_id + k << ',' << node_ids[n] << ',' << util::format_double(errors(k, n)) << '\n';
}

PointForecast load_forecast(const std::filesystem::path& file, const std::vector<int>& node_ids) {
  const util::CsvTable t = util::CsvTable::read(file);
  const auto c_n = t.column("node_id");
  const auto c_d = t.column("net_demand_mw");
  const auto c_v = t.find_column("vre_mw");
  const auto idx = index_of(node_ids);
  PointForecast f;
  const int n = static_cast<int>(node_ids.size());
  f.d_hat = Eigen::VectorXd::Zero(n);
  if (c_v) f.vre = Eigen::VectorXd::Zero(n);
  std::set<int> seen;
  for (std::size_t r = 0; r < t.size(); ++r) {
    const int node = t.integer(r, c_n);
    const auto it = idx.find(node);
    if (it == idx.end()) throw ValidationError(where(t, r) + "unknown node id " + std::to_string(node));
    if (!seen.insert(node).second) throw ValidationError(where(t, r) + "repeated node id " + std::to_string(node));
    f.d_hat[it->second] = t.number(r, c_d);
    if (c_v) {
      const double v = t.number(r, *c_v);
      if (v < 0.0) throw ValidationError(where(t, r) + "negative VRE forecast");
      (*f.vre)[it->second] = v;
    }
  }
  return f;
}

void write_forecast(const std::filesystem::path& file, const PointForecast& forecast,
                    const std::vector<int>& node_ids) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file);
  if (!out) throw Error("cannot write '" + file.string() + "'");
  out << (forecast.vre ? "node_id,net_demand_mw,vre_mw\n" : "node_id,net_demand_mw\n");
  for (std::size_t n = 0; n < node_ids.size(); ++n) {
    out << node_ids[n] << ',' << util::format_double(forecast.d_hat[static_cast<int>(n)]);
    if (forecast.vre) out << ',' << util::format_double((*forecast.vre)[static_cast<int>(n)]);
    out << '\n';
  }
}

}  // namespace resdeploy::forecast

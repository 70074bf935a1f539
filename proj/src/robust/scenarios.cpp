#include <cmath>

#include "resdeploy/error.hpp"
#include "resdeploy/robust/robust.hpp"

namespace resdeploy::robust {

bool DeploymentScenarioSet::add(Eigen::VectorXd xi, std::string tag) {
  if (contains(xi)) return false;
  entries_.push_back({std::move(xi), std::move(tag)});
  return true;
}

bool DeploymentScenarioSet::contains(const Eigen::VectorXd& xi) const {
  for (const auto& e : entries_)
    if (e.xi.size() == xi.size() && (e.xi - xi).lpNorm<Eigen::Infinity>() <= tol_) return true;
  return false;
}

std::vector<Eigen::VectorXd> DeploymentScenarioSet::vectors() const {
  std::vector<Eigen::VectorXd> v;
  v.reserve(entries_.size());
  for (const auto& e : entries_) v.push_back(e.xi);
  return v;
}

namespace {

Eigen::VectorXd allocation(const Eigen::VectorXd& q, const char* direction, std::vector<std::string>& warnings) {
  const double total = q.sum();
  if (total == 0.0 || !std::isfinite(total)) {
    warnings.push_back(std::string(direction) +
                       " nodal quantiles sum to zero; using a uniform allocation across nodes");
    return Eigen::VectorXd::Constant(q.size(), 1.0 / static_cast<double>(q.size()));
  }
  return q / total;
}

}  // namespace

ExtremeScenarios extreme_scenarios(const ScenarioSet& scenarios, const ReserveRequirement& req,
                                   const UncertaintySet& set, forecast::QuantileMethod method) {
  if (scenarios.num_nodes() != set.dim()) throw ValidationError("scenario set and uncertainty set differ in dimension");
  ExtremeScenarios out;
  const Eigen::VectorXd q_up = forecast::nodal_quantiles(scenarios, 0.5 * (1.0 + req.alpha), method);
  const Eigen::VectorXd q_dn = forecast::nodal_quantiles(scenarios, 0.5 * (1.0 - req.alpha), method);
  out.e_plus = allocation(q_up, "upward", out.warnings);
  out.e_minus = allocation(q_dn, "downward", out.warnings);
  out.raw_up = req.rho_plus * out.e_plus;
  out.raw_down = req.rho_minus * out.e_minus;
  out.scenarios.add(set.project(out.raw_up), "extreme-up");
  if (!out.scenarios.add(set.project(out.raw_down), "extreme-down")) {
    out.warnings.push_back("downward extreme scenario coincides with the upward one after projection");
  }
  return out;
}

LineInit adm_init_for_line(const GridModel& grid, const DaSchedule& da, int line, const UncertaintySet& set) {
  if (line < 0 || line >= grid.num_lines()) throw ValidationError("line index out of range");
  if (set.dim() != grid.num_nodes()) throw ValidationError("uncertainty set dimension does not match the grid");
  LineInit init;
  init.line = line;
  const double f = da.flows[line];
  init.zero_flow = f == 0.0;
  const double s = f < 0.0 ? -1.0 : 1.0;
  const Eigen::RowVectorXd m = grid.ptdf().row(line);
  init.zero_row = (m.array() == 0.0).all();
  Eigen::VectorXd same(set.dim()), counter(set.dim());
  for (int j = 0; j < set.dim(); ++j) {
    const double term = s * m[j];
    same[j] = term > 0.0 ? set.lower()[j] : set.upper()[j];
    counter[j] = term < 0.0 ? set.lower()[j] : set.upper()[j];
  }
  const double dev_same = std::abs(f - m.dot(same));
  const double dev_counter = std::abs(f - m.dot(counter));
  init.opposite = dev_counter > dev_same;
  init.vertex = init.opposite ? counter : same;
  init.xi = set.project(init.vertex);
  return init;
}

std::vector<int> uncertain_dims(const UncertaintySet& set, double tol) {
  std::vector<int> dims;
  for (int n = 0; n < set.dim(); ++n)
    if (set.upper()[n] - set.lower()[n] > tol) dims.push_back(n);
  return dims;
}

std::vector<Eigen::VectorXd> enumerate_vertices(const UncertaintySet& set, const std::vector<int>& dims, int cap) {
  const int d = static_cast<int>(dims.size());
  if (d > cap) {
    throw ConfigError("vertex enumeration over " + std::to_string(d) + " uncertain nodes exceeds the cap of " +
                      std::to_string(cap));
  }
  Eigen::VectorXd base(set.dim());
  for (int n = 0; n < set.dim(); ++n) base[n] = std::clamp(0.0, set.lower()[n], set.upper()[n]);
  double fixed = 0.0;
  {
    std::vector<bool> is_dim(set.dim(), false);
    for (int n : dims) is_dim[n] = true;
    for (int n = 0; n < set.dim(); ++n)
      if (!is_dim[n]) fixed += base[n];
  }
  const double lo_s = set.rho_minus() - fixed;
  const double hi_s = set.rho_plus() - fixed;
  const double tol = 1e-9;

  std::vector<Eigen::VectorXd> out;
  auto push_unique = [&](const Eigen::VectorXd& v) {
    for (const auto& w : out)
      if ((w - v).lpNorm<Eigen::Infinity>() <= tol) return;
    out.push_back(v);
  };
  auto corner = [&](unsigned mask, Eigen::VectorXd& v, double& sum) {
    v = base;
    sum = 0.0;
    for (int i = 0; i < d; ++i) {
      const int n = dims[i];
      v[n] = (mask >> i) & 1u ? set.upper()[n] : set.lower()[n];
      sum += v[n];
    }
  };
  if (d == 0) {
    out.push_back(base);
    return out;
  }
  Eigen::VectorXd v;
  double sum = 0.0;
  // Box corners inside the slab.
  for (unsigned mask = 0; mask < (1u << d); ++mask) {
    corner(mask, v, sum);
    if (sum >= lo_s - tol && sum <= hi_s + tol) push_unique(v);
  }
  // One free coordinate on a slab plane, the rest at bounds.
  for (double c : {lo_s, hi_s}) {
    for (int i = 0; i < d; ++i) {
      const int n = dims[i];
      for (unsigned mask = 0; mask < (1u << d); ++mask) {
        if ((mask >> i) & 1u) continue;  // each assignment of the others once
        corner(mask, v, sum);
        const double value = c - (sum - v[n]);
        if (value > set.lower()[n] + tol && value < set.upper()[n] - tol) {
          v[n] = value;
          push_unique(v);
        }
      }
    }
  }
  return out;
}

}  // namespace resdeploy::robust

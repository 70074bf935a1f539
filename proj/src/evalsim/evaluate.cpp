#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <random>

#include "resdeploy/error.hpp"
#include "resdeploy/evalsim/evalsim.hpp"
#include "resdeploy/util/parallel.hpp"

namespace resdeploy::evalsim {

void GaussianSampler::validate() const {
  const auto d = static_cast<Eigen::Index>(nodes.size());
  if (covariance.rows() != d || covariance.cols() != d)
    throw ValidationError("covariance must be square with one row per uncertain node");
  for (int n : nodes)
    if (n < 0 || n >= num_nodes) throw ValidationError("sampler node index out of range");
  if (!covariance.allFinite()) throw ValidationError("covariance has non-finite entries");
  const double scale = std::max(1.0, covariance.cwiseAbs().maxCoeff());
  if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw ValidationError("covariance is not symmetric");
  if (d > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(covariance, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10 * scale) throw ValidationError("covariance is not positive semi-definite");
  }
  if (!(base_mva > 0.0)) throw ValidationError("base power must be positive");
}

Eigen::MatrixXd sample_errors(const GaussianSampler& sampler, int k) {
  sampler.validate();
  if (k < 0) throw ValidationError("sample count must be nonnegative");
  const auto d = static_cast<Eigen::Index>(sampler.nodes.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(k, sampler.num_nodes);
  if (d == 0) return out;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sampler.covariance);
  const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd factor = sampler.base_mva * es.eigenvectors() * root.asDiagonal();
  std::mt19937_64 rng(sampler.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(d);
  for (int s = 0; s < k; ++s) {
    for (Eigen::Index i = 0; i < d; ++i) z[i] = normal(rng);
    const Eigen::VectorXd e = factor * z;
    for (Eigen::Index i = 0; i < d; ++i) out(s, sampler.nodes[i]) += e[i];
  }
  return out;
}

ScenarioSet sample_scenarios(const GaussianSampler& sampler, int k, const Eigen::VectorXd& d_hat) {
  if (d_hat.size() != sampler.num_nodes) throw ValidationError("point forecast dimension does not match the sampler");
  ScenarioSet set;
  set.errors = sample_errors(sampler, k);
  set.d_hat = d_hat;
  return set;
}

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

const char* to_string(Method method) {
  switch (method) {
    case Method::kDsw: return "DSW";
    case Method::kExt: return "EXT";
    case Method::kCcg: return "CCG";
    case Method::kVenum: return "VENUM";
  }
  return "?";
}

std::optional<Method> parse_method(const std::string& name) {
  const std::string s = lower(name);
  if (s == "dsw") return Method::kDsw;
  if (s == "ext") return Method::kExt;
  if (s == "ccg") return Method::kCcg;
  if (s == "venum" || s == "v-enum") return Method::kVenum;
  return std::nullopt;
}

const char* to_string(InitSet init) {
  switch (init) {
    case InitSet::kExtremesAndLines: return "all";
    case InitSet::kExtremesOnly: return "extremes";
    case InitSet::kLinesOnly: return "lines";
  }
  return "?";
}

std::optional<InitSet> parse_init_set(const std::string& name) {
  const std::string s = lower(name);
  if (s == "all") return InitSet::kExtremesAndLines;
  if (s == "extremes") return InitSet::kExtremesOnly;
  if (s == "lines") return InitSet::kLinesOnly;
  return std::nullopt;
}

Tally& Tally::operator+=(const Tally& o) {
  count += o.count;
  violations += o.violations;
  rt_cost_sum += o.rt_cost_sum;
  return *this;
}

const MethodResult* EvaluationReport::find(Method m) const {
  for (const auto& r : methods)
    if (r.method == m) return &r;
  return nullptr;
}

std::vector<int> flag_congested_lines(const GridModel& grid, const scheduling::DaSchedule& dsw,
                                      const Eigen::MatrixXd& presim_errors, const EvalConfig& config) {
  const int L = grid.num_lines();
  std::vector<int> counts(L, 0);
  auto tally = [&](const Eigen::VectorXd& flows, std::vector<int>& into) {
    for (int l = 0; l < L; ++l)
      if (std::abs(flows[l]) >= config.congestion_ratio * grid.lines()[l].flow_limit_mw) ++into[l];
  };
  tally(dsw.flows, counts);
  if (config.presimulate && presim_errors.rows() > 0) {
    const int k = static_cast<int>(presim_errors.rows());
    std::vector<Eigen::VectorXd> flows(k);
    util::parallel_for(k, config.ccg.workers, [&](int s) {
      flows[s] = scheduling::solve_rt(grid, dsw, presim_errors.row(s).transpose(), config.ccg.c_viol,
                                      config.ccg.scheduling)
                     .flows;
    });
    for (const auto& f : flows) tally(f, counts);
  }
  std::vector<int> order;
  for (int l = 0; l < L; ++l)
    if (counts[l] > 0) order.push_back(l);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return counts[a] > counts[b]; });
  if (static_cast<int>(order.size()) > config.flagged_lines) order.resize(std::max(0, config.flagged_lines));
  return order;
}

namespace {

std::vector<Method> method_order(const EvalConfig& config) {
  std::vector<Method> out{Method::kDsw};
  for (Method m : config.methods)
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  return out;
}

void fill_schedule(MethodResult& r, scheduling::DaSchedule da) {
  r.ok = true;
  r.da_cost = da.cost();
  r.objective = da.objective();
  r.up_reserve = da.up_reserve();
  r.down_reserve = da.down_reserve();
  r.schedule = std::move(da);
}

}  // namespace

EvaluationReport evaluate(const GridModel& grid, const Eigen::VectorXd& d_hat, const ScenarioSet& train,
                          const ScenarioSet& test, const EvalConfig& config, const Eigen::VectorXd* vre) {
  train.validate(grid.num_nodes());
  if (test.num_nodes() != grid.num_nodes()) throw ValidationError("test scenarios do not match the grid");
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");

  EvaluationReport rep;
  rep.req = forecast::reserve_requirements(train, config.alpha, config.quantile);
  const forecast::UncertaintySet set = forecast::UncertaintySet::build(train, rep.req);
  rep.box_lower = set.lower();
  rep.box_upper = set.upper();
  rep.train_count = train.num_scenarios();
  rep.test_count = test.num_scenarios();

  const robust::ExtremeScenarios ext = robust::extreme_scenarios(train, rep.req, set, config.quantile);
  rep.warnings = ext.warnings;
  const robust::CcgConfig& cc = config.ccg;

  for (Method m : method_order(config)) {
    MethodResult r;
    r.method = m;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      switch (m) {
        case Method::kDsw:
          fill_schedule(r, scheduling::solve_da(grid, d_hat, rep.req, cc.scheduling, vre));
          rep.flagged_lines = flag_congested_lines(grid, r.schedule, train.errors, config);
          break;
        case Method::kExt:
          r.scenarios = ext.scenarios;
          fill_schedule(r, scheduling::solve_master(grid, d_hat, rep.req, ext.scenarios.vectors(), cc.c_viol,
                                                    cc.scheduling, vre));
          break;
        case Method::kCcg: {
          robust::CcgInputs in;
          in.grid = &grid;
          in.d_hat = d_hat;
          in.vre = vre;
          in.req = rep.req;
          in.set = &set;
          if (config.init_set != InitSet::kLinesOnly)
            for (const auto& e : ext.scenarios.entries()) in.fixed_inits.push_back({e.tag, e.xi});
          if (config.init_set != InitSet::kExtremesOnly) in.init_lines = rep.flagged_lines;
          robust::CcgResult res = robust::ccg(in, cc);
          r.scenarios = std::move(res.scenarios);
          r.ccg = std::move(res.report);
          fill_schedule(r, std::move(res.schedule));
          break;
        }
        case Method::kVenum: {
          robust::CcgInputs in;
          in.grid = &grid;
          in.d_hat = d_hat;
          in.vre = vre;
          in.req = rep.req;
          in.set = &set;
          std::vector<Eigen::VectorXd> vertices;
          fill_schedule(r, robust::vertex_enumeration_master(in, cc, &vertices));
          r.scenarios = robust::DeploymentScenarioSet(cc.duplicate_tol);
          for (auto& v : vertices) r.scenarios.add(std::move(v), "vertex-enum");
          break;
        }
      }
    } catch (const std::exception& e) {
      r.ok = false;
      r.error = e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rep.methods.push_back(std::move(r));
  }

  const int k = test.num_scenarios();
  std::vector<char> inside(k);
  for (int s = 0; s < k; ++s) inside[s] = set.contains(test.errors.row(s).transpose(), config.membership_tol);
  rep.inside_count = static_cast<int>(std::count(inside.begin(), inside.end(), 1));

  for (auto& r : rep.methods) {
    if (!r.ok) continue;
    std::vector<double> cost(k);
    std::vector<char> violated(k);
    try {
      util::parallel_for(k, cc.workers, [&](int s) {
        const scheduling::RtOutcome rt =
            scheduling::solve_rt(grid, r.schedule, test.errors.row(s).transpose(), cc.c_viol, cc.scheduling);
        violated[s] = rt.violated(config.slack_tol);
        cost[s] = violated[s] ? rt.violation_cost : 0.0;
      });
    } catch (const std::exception& e) {
      r.ok = false;
      r.error = std::string("real-time evaluation failed: ") + e.what();
      continue;
    }
    for (int s = 0; s < k; ++s) {
      Tally& t = inside[s] ? r.inside : r.outside;
      for (Tally* into : {&r.all, &t}) {
        ++into->count;
        into->violations += violated[s];
        into->rt_cost_sum += cost[s];
      }
    }
  }
  return rep;
}

std::vector<MethodAggregate> aggregate(const std::vector<EvaluationReport>& hours, const EvalConfig& config) {
  std::vector<MethodAggregate> out;
  for (Method m : method_order(config)) {
    MethodAggregate a;
    a.method = m;
    double weighted = 0.0, plain = 0.0;
    for (const auto& h : hours) {
      const MethodResult* r = h.find(m);
      if (!r || !r->ok) continue;
      ++a.hours;
      weighted += r->da_cost * r->all.count;
      plain += r->da_cost;
      a.all += r->all;
      a.inside += r->inside;
      a.outside += r->outside;
      if (m == Method::kCcg) {
        const auto n = r->scenarios.size();
        if (a.scenario_histogram.size() <= n) a.scenario_histogram.resize(n + 1, 0);
        ++a.scenario_histogram[n];
      }
    }
    if (a.all.count) a.da_cost = weighted / a.all.count;
    else if (a.hours) a.da_cost = plain / a.hours;
    out.push_back(std::move(a));
  }
  return out;
}

MultiHourReport multi_hour_run(const GridModel& grid, const std::vector<HourInput>& hours, const EvalConfig& config) {
  MultiHourReport out;
  for (const auto& h : hours) {
    EvaluationReport rep = evaluate(grid, h.d_hat, h.train, h.test, config, h.vre ? &*h.vre : nullptr);
    rep.hour = h.hour;
    out.hours.push_back(std::move(rep));
  }
  out.aggregate = aggregate(out.hours, config);
  return out;
}

}  // namespace resdeploy::evalsim

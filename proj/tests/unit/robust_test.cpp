#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>

#include "../common/test_support.hpp"
#include "doctest.h"
#include "resdeploy/error.hpp"
#include "resdeploy/grid/grid_io.hpp"
#include "resdeploy/robust/robust.hpp"

using namespace resdeploy;
using namespace resdeploy::robust;

namespace {

constexpr double kObjTol = 1e-6;         // relative
constexpr double kMembershipTol = 1e-8;  // MW
constexpr double kCrossCheckTol = 1e-6;  // relative to max(1, |Q|)

double rel_gap(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

bool same_point_sets(std::vector<Eigen::VectorXd> a, std::vector<Eigen::VectorXd> b, double tol) {
  if (a.size() != b.size()) return false;
  for (const auto& x : a) {
    auto it = std::find_if(b.begin(), b.end(), [&](const Eigen::VectorXd& y) { return (x - y).lpNorm<Eigen::Infinity>() <= tol; });
    if (it == b.end()) return false;
    b.erase(it);
  }
  return true;
}

double deviation(const Eigen::RowVectorXd& m, double f, const Eigen::VectorXd& v) { return std::abs(f - m.dot(v)); }

// Checks monotone lower bounds, the primal cross-check and membership of
// every evaluated point.
void check_adm_run(const AdmResult& r, const UncertaintySet& set, const grid::GridModel& g, const DaSchedule& da,
                   double c_viol) {
  REQUIRE(r.lb.size() == r.iterates.size());
  for (std::size_t i = 1; i < r.lb.size(); ++i) CHECK(r.lb[i] >= r.lb[i - 1] - 1e-9 * std::max(1.0, std::abs(r.lb[i - 1])));
  for (std::size_t i = 0; i < r.iterates.size(); ++i) {
    CHECK(set.contains(r.iterates[i], kMembershipTol));
    const double primal = scheduling::solve_rt(g, da, r.iterates[i], c_viol).violation_cost;
    CHECK(std::abs(primal - r.lb[i]) <= kCrossCheckTol * std::max(1.0, std::abs(primal)));
  }
  CHECK(set.contains(r.xi, kMembershipTol));
  CHECK(r.iterations <= 20);
}

CcgInputs inputs_for(const testsupport::Instance& inst) {
  CcgInputs in;
  in.grid = &inst.grid;
  in.d_hat = inst.d_hat;
  in.req = inst.req;
  in.set = &inst.set;
  for (int l = 0; l < inst.grid.num_lines(); ++l) in.init_lines.push_back(l);
  return in;
}

}  // namespace

TEST_CASE("deployment scenario set rejects near-duplicates") {
  DeploymentScenarioSet s(1e-6);
  CHECK(s.add(Eigen::Vector2d(1.0, 2.0), "a"));
  CHECK_FALSE(s.add(Eigen::Vector2d(1.0 + 5e-7, 2.0), "b"));
  CHECK(s.add(Eigen::Vector2d(1.0 + 2e-6, 2.0), "c"));
  CHECK(s.size() == 2);
  CHECK(s[1].tag == "c");
  CHECK(s[0].aggregate() == 3.0);
}

TEST_CASE("extreme scenarios on a symmetric two-node set are mirrored") {
  forecast::ScenarioSet sc;
  sc.errors.resize(4, 2);
  sc.errors << -10, -10, -5, -5, 5, 5, 10, 10;
  sc.d_hat = Eigen::Vector2d::Zero();
  const auto req = forecast::reserve_requirements(sc, 0.9);
  const auto set = UncertaintySet::build(sc, req);
  const ExtremeScenarios ext = extreme_scenarios(sc, req, set);
  REQUIRE(ext.scenarios.size() == 2);
  CHECK(ext.scenarios[0].tag == "extreme-up");
  CHECK(ext.scenarios[1].tag == "extreme-down");
  CHECK(ext.scenarios[0].xi[0] == doctest::Approx(ext.scenarios[0].xi[1]));
  CHECK(ext.scenarios[0].xi[0] == doctest::Approx(-ext.scenarios[1].xi[0]));
  CHECK(ext.scenarios[0].aggregate() == doctest::Approx(req.rho_plus));
  CHECK(ext.e_plus.sum() == doctest::Approx(1.0));
  CHECK(ext.warnings.empty());
}

TEST_CASE("extreme scenarios fall back to uniform allocation on zero-sum quantiles") {
  forecast::ScenarioSet sc;
  sc.errors.resize(3, 2);
  sc.errors << -1, 1, 0, 0, 1, -1;
  sc.d_hat = Eigen::Vector2d::Zero();
  const auto req = forecast::reserve_requirements(sc, 0.9);
  const auto set = UncertaintySet::build(sc, req);
  const ExtremeScenarios ext = extreme_scenarios(sc, req, set);
  CHECK_FALSE(ext.warnings.empty());
  CHECK(ext.e_plus[0] == doctest::Approx(0.5));
}

TEST_CASE("vertex enumeration matches the active-set oracle") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    const int n = 2 + t % 4;
    Eigen::VectorXd lo(n), hi(n);
    for (int i = 0; i < n; ++i) {
      lo[i] = -10.0 * u(rng) - 1.0;
      hi[i] = 10.0 * u(rng) + 1.0;
    }
    if (t % 7 == 0) lo[0] = hi[0] = 0.0;
    const double a = lo.sum(), b = hi.sum();
    double r1 = a + u(rng) * (b - a), r2 = a + u(rng) * (b - a);
    if (r1 > r2) std::swap(r1, r2);
    const UncertaintySet set(lo, hi, r1, r2);
    const auto dims = uncertain_dims(set);
    CHECK(same_point_sets(enumerate_vertices(set, dims), testsupport::brute_force_vertices(set, dims), 1e-7));
  }
}

TEST_CASE("vertex enumeration refuses too many dimensions") {
  const int n = 14;
  const UncertaintySet set(Eigen::VectorXd::Constant(n, -1.0), Eigen::VectorXd::Constant(n, 1.0), -3.0, 3.0);
  CHECK_THROWS_AS(enumerate_vertices(set, uncertain_dims(set), 12), ConfigError);
}

TEST_CASE("closed-form line vertex maximizes the flow deviation over all box vertices") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> z(0.0, 50.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    const int n = 2 + t % 9;
    const auto inst = testsupport::random_instance(1000 + t, n, n);
    DaSchedule da;
    da.flows.resize(inst.grid.num_lines());
    for (int l = 0; l < inst.grid.num_lines(); ++l) da.flows[l] = t % 10 == 0 ? 0.0 : z(rng);
    const int line = static_cast<int>(rng() % inst.grid.num_lines());
    const LineInit li = adm_init_for_line(inst.grid, da, line, inst.set);
    const Eigen::RowVectorXd m = inst.grid.ptdf().row(line);
    const double f = da.flows[line];
    double best = -1.0;
    for (int mask = 0; mask < (1 << n); ++mask) {
      Eigen::VectorXd v(n);
      for (int j = 0; j < n; ++j) v[j] = (mask >> j & 1) ? inst.set.upper()[j] : inst.set.lower()[j];
      best = std::max(best, deviation(m, f, v));
    }
    CHECK(deviation(m, f, li.vertex) == best);
    CHECK(li.zero_flow == (f == 0.0));
    CHECK(inst.set.contains(li.xi, kMembershipTol));
  }
}

TEST_CASE("ADM lower bounds are monotone, exact and feasible") {
  int runs = 0;
  for (std::uint64_t seed = 300; seed < 340; ++seed) {
    const auto inst = testsupport::random_instance(seed, 4 + static_cast<int>(seed % 4), 2 + static_cast<int>(seed % 3));
    DaSchedule da;
    try {
      da = scheduling::solve_da(inst.grid, inst.d_hat, inst.req);
    } catch (const InfeasibleError&) {
      continue;
    }
    const auto cs = scheduling::build_compact_forms(inst.grid, inst.d_hat, inst.req, 1000.0);
    const Eigen::VectorXd x = scheduling::stack_first_stage(cs, da);
    std::vector<AdversaryInit> inits{{"lower", inst.set.project(inst.set.lower())},
                                     {"upper", inst.set.project(inst.set.upper())}};
    for (int l = 0; l < inst.grid.num_lines(); ++l)
      inits.push_back({"line", adm_init_for_line(inst.grid, da, l, inst.set).xi});
    AdmConfig cfg;
    for (const auto& init : inits) {
      const AdmResult r = adm(cs, x, inst.set, init.xi, cfg);
      check_adm_run(r, inst.set, inst.grid, da, 1000.0);
      ++runs;
    }
    const auto adv = adversary(inst.grid, da, cs, inst.set, inits, cfg, {}, 2);
    REQUIRE(adv.runs.size() == inits.size());
    for (const auto& r : adv.runs) CHECK(adv.best.q_tilde >= r.q_tilde - 1e-9 * std::max(1.0, std::abs(r.q_tilde)));
    CHECK(adv.best.max_cross_check_gap() <= kCrossCheckTol * std::max(1.0, adv.best.q_tilde));
  }
  CHECK(runs >= 100);
}

TEST_CASE("ADM never exceeds the exact worst case") {
  for (std::uint64_t seed = 400; seed < 420; ++seed) {
    const auto inst = testsupport::random_instance(seed, 5, 3);
    DaSchedule da;
    try {
      da = scheduling::solve_da(inst.grid, inst.d_hat, inst.req);
    } catch (const InfeasibleError&) {
      continue;
    }
    double exact = 0.0;
    for (const auto& v : testsupport::brute_force_vertices(inst.set, uncertain_dims(inst.set)))
      exact = std::max(exact, testsupport::angle_rt_cost(inst.grid, da, v, 1000.0));
    const auto cs = scheduling::build_compact_forms(inst.grid, inst.d_hat, inst.req, 1000.0);
    const AdmResult r = adm(cs, scheduling::stack_first_stage(cs, da), inst.set, inst.set.project(inst.set.upper()), {});
    for (double lb : r.lb) CHECK(lb <= exact * (1.0 + kObjTol) + kObjTol);
  }
}

TEST_CASE("CCG with the vertex adversary reaches the all-vertices optimum") {
  int solved = 0;
  for (std::uint64_t seed = 500; seed < 540 && solved < 20; ++seed) {
    const auto inst = testsupport::random_instance(seed, 4 + static_cast<int>(seed % 3), 2 + static_cast<int>(seed % 2));
    CcgInputs in = inputs_for(inst);
    CcgConfig cfg;
    cfg.mode = AdversaryMode::kVertexEnumeration;
    cfg.max_scenarios = 20;
    CcgResult res;
    try {
      res = ccg(in, cfg);
    } catch (const InfeasibleError&) {
      continue;
    }
    const auto vertices = testsupport::brute_force_vertices(inst.set, uncertain_dims(inst.set));
    const double oracle = testsupport::angle_master_objective(inst.grid, inst.d_hat, inst.req, vertices, cfg.c_viol);
    CHECK(rel_gap(res.schedule.objective(), oracle) <= kObjTol);
    CHECK(rel_gap(vertex_enumeration_master(in, cfg).objective(), oracle) <= kObjTol);
    CHECK(res.report.termination != "max-scenarios");
    ++solved;
  }
  CHECK(solved == 20);
}

TEST_CASE("CCG report invariants with the ADM adversary") {
  for (std::uint64_t seed = 600; seed < 615; ++seed) {
    const auto inst = testsupport::random_instance(seed, 5, 3);
    CcgInputs in = inputs_for(inst);
    CcgConfig cfg;
    CcgResult res;
    try {
      res = ccg(in, cfg);
    } catch (const InfeasibleError&) {
      continue;
    }
    const auto& it = res.report.iterations;
    REQUIRE_FALSE(it.empty());
    CHECK(static_cast<int>(res.scenarios.size()) <= cfg.max_scenarios);
    for (std::size_t j = 1; j < it.size(); ++j) CHECK(it[j].lb >= it[j - 1].lb - 1e-6 * std::max(1.0, it[j - 1].lb));
    for (const auto& i : it) CHECK(i.ub >= i.lb - 1e-6 * std::max(1.0, i.lb));
    for (std::size_t j = 0; j < res.scenarios.size(); ++j) {
      CHECK(res.scenarios[j].tag.rfind("ccg-iteration-", 0) == 0);
      CHECK(inst.set.contains(res.scenarios[j].xi, kMembershipTol));
    }
    CHECK(res.report.max_cross_check_gap <= kCrossCheckTol * std::max(1.0, res.schedule.objective()));
    const auto j = to_json(res.report);
    CHECK(j["iterations"].size() == it.size());
    CHECK(j["termination"] == res.report.termination);
  }
}

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <thread>

#include "doctest.h"
#include "resdeploy/error.hpp"
#include "resdeploy/lp/linear_program.hpp"
#include "resdeploy/lp/mps.hpp"

using namespace resdeploy::lp;

namespace {

// Random LP with box bounds that is feasible by construction.
LinearProgram random_lp(std::mt19937_64& rng, int m, int n, bool with_equalities = true) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::uniform_real_distribution<double> pos(0.0, 1.0);
  LinearProgram lp;
  std::vector<double> x0(n);
  for (int j = 0; j < n; ++j) {
    const double lo = -2.0 * pos(rng);
    const double hi = 2.0 * pos(rng) + 0.1;
    lp.add_variable(lo, hi, unif(rng));
    x0[j] = lo + (hi - lo) * pos(rng);
  }
  for (int i = 0; i < m; ++i) {
    std::vector<Term> terms;
    double act = 0.0;
    for (int j = 0; j < n; ++j) {
      if (pos(rng) < 0.4) continue;
      const double a = unif(rng);
      terms.push_back({j, a});
      act += a * x0[j];
    }
    const int kind = with_equalities ? static_cast<int>(pos(rng) * 3) : static_cast<int>(pos(rng) * 2);
    if (kind == 0) lp.add_row(std::move(terms), Relation::kLessEqual, act + pos(rng));
    else if (kind == 1) lp.add_row(std::move(terms), Relation::kGreaterEqual, act - pos(rng));
    else lp.add_row(std::move(terms), Relation::kEqual, act);
  }
  return lp;
}

// Brute-force oracle: minimum of the objective over all basic feasible
// solutions, found by intersecting every n-subset of constraint hyperplanes
// (rows and finite bounds). Returns NaN when no vertex is feasible.
double vertex_enumeration_min(const LinearProgram& lp) {
  const int n = lp.num_variables();
  struct Plane {
    Eigen::RowVectorXd a;
    double b;
  };
  std::vector<Plane> planes;
  for (const Row& r : lp.rows()) {
    Eigen::RowVectorXd a = Eigen::RowVectorXd::Zero(n);
    for (const Term& t : r.terms) a[t.col] += t.coef;
    planes.push_back({a, r.rhs});
  }
  for (int j = 0; j < n; ++j) {
    Eigen::RowVectorXd a = Eigen::RowVectorXd::Zero(n);
    a[j] = 1.0;
    planes.push_back({a, lp.lower()[j]});
    planes.push_back({a, lp.upper()[j]});
  }
  const int p = static_cast<int>(planes.size());
  double best = std::nan("");
  std::vector<int> pick(n);
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == n) {
      Eigen::MatrixXd a(n, n);
      Eigen::VectorXd b(n);
      for (int k = 0; k < n; ++k) {
        a.row(k) = planes[pick[k]].a;
        b[k] = planes[pick[k]].b;
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
      if (lu.rank() < n) return;
      const Eigen::VectorXd x = lu.solve(b);
      const double tol = 1e-9;
      for (int j = 0; j < n; ++j)
        if (x[j] < lp.lower()[j] - tol || x[j] > lp.upper()[j] + tol) return;
      for (const Row& r : lp.rows()) {
        double s = 0.0;
        for (const Term& t : r.terms) s += t.coef * x[t.col];
        if (r.relation == Relation::kLessEqual && s > r.rhs + tol) return;
        if (r.relation == Relation::kGreaterEqual && s < r.rhs - tol) return;
        if (r.relation == Relation::kEqual && std::abs(s - r.rhs) > tol) return;
      }
      double obj = 0.0;
      for (int j = 0; j < n; ++j) obj += lp.cost()[j] * x[j];
      if (std::isnan(best) || obj < best) best = obj;
      return;
    }
    for (int k = start; k < p; ++k) {
      pick[depth] = k;
      rec(k + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

double max_primal_violation(const LinearProgram& lp, const std::vector<double>& x) {
  double worst = 0.0;
  for (int j = 0; j < lp.num_variables(); ++j) {
    worst = std::max(worst, lp.lower()[j] - x[j]);
    worst = std::max(worst, x[j] - lp.upper()[j]);
  }
  const auto act = lp.row_activity(x);
  for (int i = 0; i < lp.num_rows(); ++i) {
    const Row& r = lp.row(i);
    if (r.relation != Relation::kGreaterEqual) worst = std::max(worst, act[i] - r.rhs);
    if (r.relation != Relation::kLessEqual) worst = std::max(worst, r.rhs - act[i]);
  }
  return worst;
}

}  // namespace

TEST_CASE("single-variable bound") {
  LinearProgram lp;
  const int x = lp.add_variable(-kInf, kInf, 1.0, "x");
  lp.add_row({{x, 1.0}}, Relation::kGreaterEqual, 3.0);
  lp.add_row({{x, 1.0}}, Relation::kLessEqual, 10.0);
  const auto sol = solve_lp_dual_values(lp);
  REQUIRE(sol.optimal());
  CHECK(sol.primal[0] == doctest::Approx(3.0));
  CHECK(sol.objective == doctest::Approx(3.0));
  CHECK(sol.duals[0] == doctest::Approx(1.0));
  CHECK(sol.duals[1] == doctest::Approx(0.0));
}

TEST_CASE("symmetric simplex face") {
  LinearProgram lp;
  const int x = lp.add_variable(0.0, kInf, -1.0);
  const int y = lp.add_variable(0.0, kInf, -1.0);
  lp.add_row({{x, 1.0}, {y, 1.0}}, Relation::kLessEqual, 1.0);
  const auto sol = solve_lp_dual_values(lp);
  REQUIRE(sol.optimal());
  CHECK(sol.objective == doctest::Approx(-1.0));
  CHECK(sol.primal[0] + sol.primal[1] == doctest::Approx(1.0));
  CHECK(sol.duals[0] == doctest::Approx(-1.0));
}

TEST_CASE("maximize, equality rows and free variables") {
  LinearProgram lp(Sense::kMaximize);
  const int x = lp.add_variable(-kInf, kInf, 1.0);
  const int y = lp.add_variable(-kInf, kInf, 2.0);
  lp.add_row({{x, 1.0}, {y, 1.0}}, Relation::kEqual, 4.0);
  lp.add_row({{y, 1.0}}, Relation::kLessEqual, 3.0);
  const auto sol = solve_lp_dual_values(lp);
  REQUIRE(sol.optimal());
  CHECK(sol.primal[0] == doctest::Approx(1.0));
  CHECK(sol.primal[1] == doctest::Approx(3.0));
  CHECK(sol.objective == doctest::Approx(7.0));
  // d obj / d rhs: raising the equality rhs adds one unit of x.
  CHECK(sol.duals[0] == doctest::Approx(1.0));
  CHECK(sol.duals[1] == doctest::Approx(1.0));
  CHECK(dual_objective(lp, sol) == doctest::Approx(7.0));
}

TEST_CASE("infeasible and unbounded are statuses") {
  LinearProgram inf;
  const int x = inf.add_variable(0.0, 1.0, 1.0);
  inf.add_row({{x, 1.0}}, Relation::kGreaterEqual, 2.0);
  CHECK(solve_lp(inf).status == Status::kInfeasible);

  LinearProgram unb;
  const int a = unb.add_variable(0.0, kInf, -1.0);
  const int b = unb.add_variable(0.0, kInf, 0.0);
  unb.add_row({{a, 1.0}, {b, -1.0}}, Relation::kLessEqual, 1.0);
  CHECK(solve_lp(unb).status == Status::kUnbounded);
}

TEST_CASE("no rows: variables go to their cheaper bound") {
  LinearProgram lp;
  lp.add_variable(-1.0, 2.0, 1.0);
  lp.add_variable(-1.0, 2.0, -3.0);
  lp.add_variable(5.0, 5.0, 7.0);
  const auto sol = solve_lp(lp);
  REQUIRE(sol.optimal());
  CHECK(sol.primal[0] == -1.0);
  CHECK(sol.primal[1] == 2.0);
  CHECK(sol.objective == doctest::Approx(-1.0 - 6.0 + 35.0));
}

TEST_CASE("invalid programs are rejected") {
  LinearProgram lp;
  lp.add_variable(1.0, 0.0, 0.0);
  CHECK_THROWS_AS(solve_lp(lp), resdeploy::ValidationError);
  LinearProgram nan_lp;
  const int x = nan_lp.add_variable(0.0, 1.0, 0.0);
  nan_lp.add_row({{x, std::nan("")}}, Relation::kLessEqual, 1.0);
  CHECK_THROWS_AS(solve_lp(nan_lp), resdeploy::ValidationError);
}

TEST_CASE("small random LPs match brute-force vertex enumeration") {
  std::mt19937_64 rng(7);
  int compared = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 1 + trial % 4;
    const int n = 2 + trial % 4;
    const LinearProgram lp = random_lp(rng, m, n);
    const double oracle = vertex_enumeration_min(lp);
    for (PricingRule rule : {PricingRule::kBland, PricingRule::kDantzigWithBlandGuard}) {
      SolverOptions opt;
      opt.pricing = rule;
      const auto sol = solve_lp(lp, opt);
      REQUIRE(sol.optimal());
      CHECK(max_primal_violation(lp, sol.primal) <= 1e-8);
      CHECK(std::abs(sol.objective - oracle) <= 1e-8 * std::max(1.0, std::abs(oracle)));
    }
    ++compared;
  }
  CHECK(compared == 200);
}

TEST_CASE("random 20x40 LPs carry a verified optimality certificate") {
  // Independent certificate: primal feasibility, sign-feasible multipliers
  // and equal primal/dual values prove optimality regardless of pivoting.
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 25; ++trial) {
    const LinearProgram lp = random_lp(rng, 20, 40);
    const auto sol = solve_lp_dual_values(lp);
    REQUIRE(sol.optimal());
    CHECK(max_primal_violation(lp, sol.primal) <= 1e-8);
    // Row multiplier signs for a minimization.
    for (int i = 0; i < lp.num_rows(); ++i) {
      if (lp.row(i).relation == Relation::kLessEqual) CHECK(sol.duals[i] <= 1e-9);
      if (lp.row(i).relation == Relation::kGreaterEqual) CHECK(sol.duals[i] >= -1e-9);
    }
    // Reduced costs recomputed from scratch.
    std::vector<double> z(lp.cost().begin(), lp.cost().end());
    for (int i = 0; i < lp.num_rows(); ++i)
      for (const Term& t : lp.row(i).terms) z[t.col] -= sol.duals[i] * t.coef;
    double dual = 0.0;
    for (int i = 0; i < lp.num_rows(); ++i) dual += sol.duals[i] * lp.row(i).rhs;
    for (int j = 0; j < lp.num_variables(); ++j) dual += z[j] > 0 ? z[j] * lp.lower()[j] : z[j] * lp.upper()[j];
    CHECK(std::abs(dual - sol.objective) <= 1e-8);
  }
}

TEST_CASE("strong duality on 50 random feasible LPs; weak duality bound") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const LinearProgram lp = random_lp(rng, 3 + trial % 10, 4 + trial % 12);
    const auto sol = solve_lp_dual_values(lp);
    REQUIRE(sol.optimal());
    const double d = dual_objective(lp, sol);
    CHECK(std::abs(d - sol.objective) <= 1e-8);
    CHECK(d <= sol.objective + 1e-8);
  }
}

TEST_CASE("re-solving is bitwise deterministic") {
  std::mt19937_64 rng(5);
  const LinearProgram lp = random_lp(rng, 15, 30);
  const auto a = solve_lp(lp);
  const auto b = solve_lp(lp);
  CHECK(a.status == b.status);
  CHECK(a.objective == b.objective);
  CHECK(a.primal == b.primal);
}

TEST_CASE("scaling costs scales the objective and keeps the basis") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    LinearProgram lp = random_lp(rng, 8, 12);
    const auto base = solve_lp(lp);
    REQUIRE(base.optimal());
    for (int j = 0; j < lp.num_variables(); ++j) lp.set_cost(j, 4.0 * lp.cost()[j]);
    const auto scaled = solve_lp(lp);
    REQUIRE(scaled.optimal());
    CHECK(scaled.objective == doctest::Approx(4.0 * base.objective).epsilon(1e-12));
    CHECK(scaled.basis.columns == base.basis.columns);
    CHECK(scaled.basis.rows == base.basis.rows);
  }
}

TEST_CASE("warm start after appending rows matches a cold solve") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    LinearProgram lp = random_lp(rng, 6, 10, false);
    const auto first = solve_lp(lp);
    REQUIRE(first.optimal());
    // Cut off the current optimum with a row that the box still satisfies.
    std::vector<Term> terms;
    double act = 0.0;
    for (int j = 0; j < lp.num_variables(); ++j) {
      terms.push_back({j, 1.0});
      act += first.primal[j];
    }
    lp.add_row(terms, Relation::kLessEqual, act - 0.05);
    const auto cold = solve_lp(lp);
    const auto warm = solve_lp(lp, {}, &first.basis);
    CHECK(cold.status == warm.status);
    if (cold.optimal()) CHECK(warm.objective == doctest::Approx(cold.objective).epsilon(1e-10));
  }
}

TEST_CASE("concurrent solves of distinct programs") {
  std::vector<LinearProgram> lps;
  std::mt19937_64 rng(17);
  for (int k = 0; k < 8; ++k) lps.push_back(random_lp(rng, 10, 20));
  std::vector<double> serial, parallel(lps.size());
  for (auto& lp : lps) serial.push_back(solve_lp(lp).objective);
  std::vector<std::thread> threads;
  for (std::size_t k = 0; k < lps.size(); ++k)
    threads.emplace_back([&, k] { parallel[k] = solve_lp(lps[k]).objective; });
  for (auto& t : threads) t.join();
  CHECK(serial == parallel);
}

TEST_CASE("free MPS dump lists every section") {
  LinearProgram lp(Sense::kMaximize);
  const int x = lp.add_variable(-kInf, 4.0, 1.5, "x");
  const int y = lp.add_variable(-kInf, kInf, 0.0, "y");
  const int z = lp.add_variable(2.0, 2.0, 1.0);
  lp.add_row({{x, 1.0}, {y, 2.0}, {x, 1.0}}, Relation::kLessEqual, 3.0, "cap");
  lp.add_row({{z, -1.0}}, Relation::kEqual, -2.0);
  std::ostringstream os;
  write_mps(lp, os);
  const std::string text = os.str();
  CHECK(text.find("OBJSENSE\n    MAX") != std::string::npos);
  CHECK(text.find(" L cap\n") != std::string::npos);
  CHECK(text.find(" E r1\n") != std::string::npos);
  CHECK(text.find(" x cap 2\n") != std::string::npos);
  CHECK(text.find(" MI BND x\n") != std::string::npos);
  CHECK(text.find(" UP BND x 4\n") != std::string::npos);
  CHECK(text.find(" FR BND y\n") != std::string::npos);
  CHECK(text.find(" FX BND x2 2\n") != std::string::npos);
  CHECK(text.find(" RHS r1 -2\n") != std::string::npos);
  CHECK(text.rfind("ENDATA\n") == text.size() - 7);
}

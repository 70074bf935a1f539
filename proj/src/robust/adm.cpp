#include <algorithm>
#include <cmath>

#include "resdeploy/error.hpp"
#include "resdeploy/robust/robust.hpp"
#include "resdeploy/util/parallel.hpp"

namespace resdeploy::robust {

double AdmResult::max_cross_check_gap() const {
  double gap = 0.0;
  for (std::size_t i = 0; i < primal_check.size() && i < lb.size(); ++i)
    gap = std::max(gap, std::abs(primal_check[i] - lb[i]));
  return gap;
}

namespace {

// Dual of the compact second stage at fixed x:
//   max pi'(H x - E xi - h)  s.t.  D'pi = 0,  0 <= pi <= c_viol on slack rows,
//   pi >= 0 on the balance rows.
class DualStep {
 public:
  DualStep(const CompactSecondStage& cs, const Eigen::VectorXd& x) : cs_(cs), base_(cs.H * x - cs.h) {
    lp_.set_sense(lp::Sense::kMaximize);
    const int R = cs.num_rows();
    for (int i = 0; i < R; ++i) lp_.add_variable(0.0, cs.has_slack[i] ? cs.c_viol : lp::kInf, 0.0);
    for (int k = 0; k < cs.num_generators; ++k) {
      std::vector<lp::Term> t;
      for (int i = 0; i < R; ++i)
        if (cs.D(i, k) != 0.0) t.push_back({i, cs.D(i, k)});
      lp_.add_row(std::move(t), lp::Relation::kEqual, 0.0);
    }
  }

  // Returns the optimal value; pi holds the multipliers.
  double solve(const Eigen::VectorXd& xi, const lp::SolverOptions& options, Eigen::VectorXd& pi) {
    const Eigen::VectorXd a = base_ - cs_.E * xi;
    for (int i = 0; i < cs_.num_rows(); ++i) lp_.set_cost(i, a[i]);
    lp::LpSolution sol = lp::solve_lp(lp_, options, basis_.empty() ? nullptr : &basis_);
    if (!sol.optimal()) {
      throw NumericalError(std::string("deployment dual step ended with status ") + lp::to_string(sol.status));
    }
    basis_ = std::move(sol.basis);
    pi = Eigen::Map<const Eigen::VectorXd>(sol.primal.data(), cs_.num_rows());
    return sol.objective;
  }

  const Eigen::VectorXd& base() const { return base_; }

 private:
  const CompactSecondStage& cs_;
  Eigen::VectorXd base_;  // H x - h
  lp::LinearProgram lp_;
  lp::Basis basis_;
};

}  // namespace

AdmResult adm(const CompactSecondStage& compact, const Eigen::VectorXd& x, const UncertaintySet& set,
              const Eigen::VectorXd& xi_init, const AdmConfig& config, const PrimalEvaluator& primal) {
  if (x.size() != compact.num_x()) throw ValidationError("first-stage vector dimension mismatch");
  if (xi_init.size() != set.dim() || set.dim() != compact.E.cols())
    throw ValidationError("error vector dimension mismatch");
  if (config.max_iterations < 1) throw ConfigError("ADM needs at least one iteration");

  AdmResult out;
  DualStep dual(compact, x);
  Eigen::VectorXd xi = xi_init;
  Eigen::VectorXd pi;
  for (int it = 0; it < config.max_iterations; ++it) {
    const double lb = dual.solve(xi, config.lp, pi);
    out.iterates.push_back(xi);
    out.lb.push_back(lb);
    if (config.cross_check && primal) out.primal_check.push_back(primal(xi));

    const Eigen::VectorXd w = -(compact.E.transpose() * pi);
    const forecast::LinearMaximum step = set.maximize_linear(w);
    const double ub = pi.dot(dual.base()) + step.value;
    out.ub.push_back(ub);
    out.iterations = it + 1;
    out.xi = xi;
    out.q_tilde = 0.5 * (ub + lb);
    if (ub - lb < config.eps) {
      out.converged = true;
      break;
    }
    xi = step.xi;
  }
  return out;
}

AdversaryResult adversary(const GridModel& grid, const DaSchedule& da, const CompactSecondStage& compact,
                          const UncertaintySet& set, const std::vector<AdversaryInit>& inits,
                          const AdmConfig& config, const SchedulingOptions& sched, int workers) {
  if (inits.empty()) throw ConfigError("the adversary needs at least one initialization");
  const Eigen::VectorXd x = scheduling::stack_first_stage(compact, da);
  AdversaryResult out;
  out.runs.resize(inits.size());
  util::parallel_for(static_cast<int>(inits.size()), workers, [&](int i) {
    PrimalEvaluator primal;
    if (config.cross_check) {
      primal = [&](const Eigen::VectorXd& xi) {
        return scheduling::solve_rt(grid, da, xi, compact.c_viol, sched).violation_cost;
      };
    }
    out.runs[i] = adm(compact, x, set, inits[i].xi, config, primal);
    out.runs[i].init_label = inits[i].label;
  });
  for (std::size_t i = 0; i < out.runs.size(); ++i) {
    const double q = out.runs[i].q_tilde;
    if (out.best_index < 0 || q > out.best.q_tilde + 1e-9 * std::max(1.0, std::abs(out.best.q_tilde))) {
      out.best_index = static_cast<int>(i);
      out.best = out.runs[i];
    }
  }
  return out;
}

}  // namespace resdeploy::robust

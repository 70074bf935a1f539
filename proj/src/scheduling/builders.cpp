#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "resdeploy/error.hpp"
#include "resdeploy/scheduling/scheduling.hpp"

namespace resdeploy::scheduling {

using lp::LinearProgram;
using lp::Relation;
using lp::Term;

namespace {

constexpr double kInf = lp::kInf;

void check_dims(const GridModel& grid, const Eigen::VectorXd& d_hat, const Eigen::VectorXd* vre) {
  if (d_hat.size() != grid.num_nodes()) throw ValidationError("point forecast dimension does not match the grid");
  if (vre && vre->size() != grid.num_nodes()) throw ValidationError("VRE forecast dimension does not match the grid");
}

std::vector<int> curtailable_nodes(const GridModel& grid, const SchedulingOptions& opt, const Eigen::VectorXd* vre) {
  std::vector<int> nodes;
  if (!opt.curtailment || !vre) return nodes;
  for (int n = 0; n < grid.num_nodes(); ++n)
    if ((*vre)[n] > 0.0) nodes.push_back(n);
  return nodes;
}

std::string infeasibility_reason(const GridModel& grid, const Eigen::VectorXd& d_hat, const ReserveRequirement& req,
                                 const Eigen::VectorXd* vre) {
  const double demand = d_hat.sum();
  const double cap = grid.p_max().sum();
  const double floor = grid.p_min().sum();
  const double curtail = vre ? vre->sum() : 0.0;
  std::ostringstream os;
  if (demand > cap) {
    os << "demand " << demand << " MW exceeds generation capacity " << cap << " MW";
  } else if (demand + curtail < floor) {
    os << "demand " << demand << " MW is below the total minimum output " << floor << " MW";
  } else if (demand + req.rho_plus > cap) {
    os << "upward reserve requirement " << req.rho_plus << " MW cannot be procured on top of demand " << demand
       << " MW (capacity " << cap << " MW)";
  } else if (demand + curtail - floor < -req.rho_minus) {
    os << "downward reserve requirement " << -req.rho_minus << " MW cannot be procured (headroom above minimum "
       << demand + curtail - floor << " MW)";
  } else {
    os << "network limits leave no feasible dispatch for demand " << demand << " MW";
  }
  return os.str();
}

// Column layout shared by the DA and master problems.
struct FirstStageCols {
  std::vector<int> p, rp, rm, u;
  int eta = -1;
};

struct ScenarioBlock {
  Eigen::VectorXd xi;
  Eigen::VectorXd m_xi;  // M xi
  std::vector<int> prec, gp, gm;
  int eta_row = -1;
  std::set<std::pair<int, int>> flow_rows;  // (line, +1/-1)
};

class MasterProblem {
 public:
  MasterProblem(const GridModel& grid, const Eigen::VectorXd& d_hat, const ReserveRequirement& req,
                const std::vector<Eigen::VectorXd>& scenarios, double c_viol, const SchedulingOptions& opt,
                const Eigen::VectorXd* vre)
      : grid_(grid), d_hat_(d_hat), req_(req), c_viol_(c_viol), opt_(opt), vre_(vre) {
    check_dims(grid, d_hat, vre);
    if (!(c_viol > 0.0)) throw ValidationError("violation cost must be positive");
    curtail_ = curtailable_nodes(grid, opt, vre);
    m_d_ = grid.ptdf() * d_hat;
    build_first_stage();
    for (const auto& xi : scenarios) {
      if (xi.size() != grid.num_nodes()) throw ValidationError("deployment scenario dimension does not match the grid");
      add_scenario(xi);
    }
    if (!opt_.lazy_flows) {
      for (int l = 0; l < grid_.num_lines(); ++l) {
        for (int dir : {1, -1}) {
          add_da_flow_row(l, dir);
          for (std::size_t s = 0; s < blocks_.size(); ++s) add_scenario_flow_row(s, l, dir);
        }
      }
    }
  }

  DaSchedule solve() {
    lp::Basis basis;
    int iterations = 0;
    while (true) {
      const lp::LpSolution sol = lp::solve_lp(lp_, opt_.lp, basis.empty() ? nullptr : &basis);
      iterations += sol.iterations;
      if (sol.status == lp::Status::kInfeasible) {
        throw InfeasibleError("day-ahead problem is infeasible: " + infeasibility_reason(grid_, d_hat_, req_, vre_));
      }
      if (!sol.optimal()) {
        throw NumericalError(std::string("day-ahead LP ended with status ") + lp::to_string(sol.status));
      }
      basis = sol.basis;
      if (!add_violated_rows(sol.primal)) return extract(sol.primal, iterations);
    }
  }

 private:
  void build_first_stage() {
    const int G = grid_.num_generators();
    for (int k = 0; k < G; ++k) {
      const auto& g = grid_.generators()[k];
      cols_.p.push_back(lp_.add_variable(0.0, g.p_max_mw, g.cost_energy, "p_" + g.id));
    }
    for (int k = 0; k < G; ++k) {
      const auto& g = grid_.generators()[k];
      cols_.rp.push_back(lp_.add_variable(0.0, kInf, g.cost_up, "rup_" + g.id));
    }
    for (int k = 0; k < G; ++k) {
      const auto& g = grid_.generators()[k];
      cols_.rm.push_back(lp_.add_variable(0.0, kInf, g.cost_down, "rdn_" + g.id));
    }
    for (int n : curtail_) {
      cols_.u.push_back(lp_.add_variable(0.0, (*vre_)[n], opt_.curtailment_cost + opt_.curtailment_epsilon,
                                         "u_" + std::to_string(grid_.nodes()[n].id)));
    }
    cols_.eta = lp_.add_variable(0.0, kInf, 1.0, "eta");

    std::vector<Term> bal;
    for (int c : cols_.p) bal.push_back({c, 1.0});
    for (int c : cols_.u) bal.push_back({c, -1.0});
    lp_.add_row(std::move(bal), Relation::kEqual, d_hat_.sum(), "balance");
    std::vector<Term> up, dn;
    for (int k = 0; k < G; ++k) {
      up.push_back({cols_.rp[k], 1.0});
      dn.push_back({cols_.rm[k], 1.0});
    }
    lp_.add_row(std::move(up), Relation::kGreaterEqual, req_.rho_plus, "req_up");
    lp_.add_row(std::move(dn), Relation::kGreaterEqual, -req_.rho_minus, "req_down");
    for (int k = 0; k < G; ++k) {
      const auto& g = grid_.generators()[k];
      lp_.add_row({{cols_.p[k], 1.0}, {cols_.rp[k], 1.0}}, Relation::kLessEqual, g.p_max_mw, "cap_" + g.id);
      lp_.add_row({{cols_.p[k], 1.0}, {cols_.rm[k], -1.0}}, Relation::kGreaterEqual, g.p_min_mw, "floor_" + g.id);
    }
  }

  void add_scenario(const Eigen::VectorXd& xi) {
    const int G = grid_.num_generators();
    const int s = static_cast<int>(blocks_.size());
    ScenarioBlock b;
    b.xi = xi;
    b.m_xi = grid_.ptdf() * xi;
    const std::string tag = "_s" + std::to_string(s);
    for (int k = 0; k < G; ++k) b.prec.push_back(lp_.add_variable(-kInf, kInf, 0.0, "prec" + tag + "_" + std::to_string(k)));
    for (int k = 0; k < G; ++k) b.gp.push_back(lp_.add_variable(0.0, kInf, 0.0, "gup" + tag + "_" + std::to_string(k)));
    for (int k = 0; k < G; ++k) b.gm.push_back(lp_.add_variable(0.0, kInf, 0.0, "gdn" + tag + "_" + std::to_string(k)));
    std::vector<Term> bal;
    for (int c : b.prec) bal.push_back({c, 1.0});
    lp_.add_row(std::move(bal), Relation::kEqual, xi.sum(), "rt_balance" + tag);
    for (int k = 0; k < G; ++k) {
      lp_.add_row({{b.prec[k], 1.0}, {cols_.rp[k], -1.0}, {b.gp[k], -1.0}}, Relation::kLessEqual, 0.0);
      lp_.add_row({{b.prec[k], -1.0}, {cols_.rm[k], -1.0}, {b.gm[k], -1.0}}, Relation::kLessEqual, 0.0);
    }
    std::vector<Term> eta{{cols_.eta, 1.0}};
    for (int k = 0; k < G; ++k) {
      eta.push_back({b.gp[k], -c_viol_});
      eta.push_back({b.gm[k], -c_viol_});
    }
    b.eta_row = lp_.add_row(std::move(eta), Relation::kGreaterEqual, 0.0, "eta" + tag);
    blocks_.push_back(std::move(b));
  }

  // Terms of PTDF_l (A p [+ A p_rec]) - M_l,C u, scaled by dir.
  std::vector<Term> flow_terms(int l, int dir, const std::vector<int>* prec) const {
    std::vector<Term> t;
    const auto& pg = grid_.ptdf_generators();
    for (int k = 0; k < grid_.num_generators(); ++k) {
      const double a = pg(l, k);
      if (a == 0.0) continue;
      t.push_back({cols_.p[k], dir * a});
      if (prec) t.push_back({(*prec)[k], dir * a});
    }
    for (std::size_t i = 0; i < curtail_.size(); ++i) {
      const double a = grid_.ptdf()(l, curtail_[i]);
      if (a != 0.0) t.push_back({cols_.u[i], -dir * a});
    }
    return t;
  }

  void add_da_flow_row(int l, int dir) {
    if (!da_flow_rows_.insert({l, dir}).second) return;
    const double fmax = grid_.lines()[l].flow_limit_mw;
    lp_.add_row(flow_terms(l, dir, nullptr), Relation::kLessEqual, fmax + dir * m_d_[l]);
  }

  void add_scenario_flow_row(std::size_t s, int l, int dir) {
    ScenarioBlock& b = blocks_[s];
    if (!b.flow_rows.insert({l, dir}).second) return;
    const double fmax = grid_.lines()[l].flow_limit_mw;
    const int slack = lp_.add_variable(0.0, kInf, 0.0);
    auto terms = flow_terms(l, dir, &b.prec);
    terms.push_back({slack, -1.0});
    lp_.add_row(std::move(terms), Relation::kLessEqual, fmax + dir * (m_d_[l] + b.m_xi[l]));
    lp_.add_term(b.eta_row, {slack, -c_viol_});
  }

  Eigen::VectorXd gather(const std::vector<double>& x, const std::vector<int>& cols) const {
    Eigen::VectorXd v(static_cast<int>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) v[static_cast<int>(i)] = x[cols[i]];
    return v;
  }

  Eigen::VectorXd curtailment_vector(const std::vector<double>& x) const {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(grid_.num_nodes());
    for (std::size_t i = 0; i < curtail_.size(); ++i) u[curtail_[i]] = x[cols_.u[i]];
    return u;
  }

  bool add_violated_rows(const std::vector<double>& x) {
    if (!opt_.lazy_flows) return false;
    const Eigen::VectorXd p = gather(x, cols_.p);
    const Eigen::VectorXd u = curtailment_vector(x);
    const Eigen::VectorXd fe = grid_.ptdf_generators() * p - grid_.ptdf() * u - m_d_;
    bool added = false;
    for (int l = 0; l < grid_.num_lines(); ++l) {
      const double fmax = grid_.lines()[l].flow_limit_mw;
      if (fe[l] > fmax + opt_.flow_tol && !da_flow_rows_.count({l, 1})) {
        add_da_flow_row(l, 1);
        added = true;
      }
      if (-fe[l] > fmax + opt_.flow_tol && !da_flow_rows_.count({l, -1})) {
        add_da_flow_row(l, -1);
        added = true;
      }
    }
    for (std::size_t s = 0; s < blocks_.size(); ++s) {
      const Eigen::VectorXd prec = gather(x, blocks_[s].prec);
      const Eigen::VectorXd f = fe + grid_.ptdf_generators() * prec - blocks_[s].m_xi;
      for (int l = 0; l < grid_.num_lines(); ++l) {
        const double fmax = grid_.lines()[l].flow_limit_mw;
        if (f[l] > fmax + opt_.flow_tol && !blocks_[s].flow_rows.count({l, 1})) {
          add_scenario_flow_row(s, l, 1);
          added = true;
        }
        if (-f[l] > fmax + opt_.flow_tol && !blocks_[s].flow_rows.count({l, -1})) {
          add_scenario_flow_row(s, l, -1);
          added = true;
        }
      }
    }
    return added;
  }

  DaSchedule extract(const std::vector<double>& x, int iterations) const {
    DaSchedule da;
    da.p = gather(x, cols_.p);
    da.r_plus = gather(x, cols_.rp);
    da.r_minus = gather(x, cols_.rm);
    const Eigen::VectorXd u = curtailment_vector(x);
    if (!curtail_.empty()) da.curtailment = u;
    da.flows = grid_.ptdf_generators() * da.p - grid_.ptdf() * u - m_d_;
    for (int k = 0; k < grid_.num_generators(); ++k) {
      const auto& g = grid_.generators()[k];
      da.energy_cost += g.cost_energy * da.p[k];
      da.reserve_cost += g.cost_up * da.r_plus[k] + g.cost_down * da.r_minus[k];
    }
    for (std::size_t i = 0; i < curtail_.size(); ++i)
      da.curtailment_cost += (opt_.curtailment_cost + opt_.curtailment_epsilon) * x[cols_.u[i]];
    da.eta = blocks_.empty() ? 0.0 : x[cols_.eta];
    da.lp_iterations = iterations;
    return da;
  }

  const GridModel& grid_;
  const Eigen::VectorXd& d_hat_;
  ReserveRequirement req_;
  double c_viol_;
  const SchedulingOptions& opt_;
  const Eigen::VectorXd* vre_;
  std::vector<int> curtail_;
  Eigen::VectorXd m_d_;
  LinearProgram lp_;
  FirstStageCols cols_;
  std::vector<ScenarioBlock> blocks_;
  std::set<std::pair<int, int>> da_flow_rows_;
};

class RecourseProblem {
 public:
  RecourseProblem(const GridModel& grid, const DaSchedule& da, const Eigen::VectorXd& xi, double c_viol,
                  const SchedulingOptions& opt)
      : grid_(grid), da_(da), xi_(xi), c_viol_(c_viol), opt_(opt) {
    if (xi.size() != grid.num_nodes()) throw ValidationError("realized error dimension does not match the grid");
    if (da.p.size() != grid.num_generators() || da.flows.size() != grid.num_lines()) {
      throw ValidationError("schedule dimension does not match the grid");
    }
    if (!(c_viol > 0.0)) throw ValidationError("violation cost must be positive");
    const int G = grid.num_generators();
    m_xi_ = grid.ptdf() * xi;
    for (int k = 0; k < G; ++k) prec_.push_back(lp_.add_variable(-kInf, kInf, 0.0));
    for (int k = 0; k < G; ++k) gp_.push_back(lp_.add_variable(0.0, kInf, c_viol));
    for (int k = 0; k < G; ++k) gm_.push_back(lp_.add_variable(0.0, kInf, c_viol));
    std::vector<Term> bal;
    for (int c : prec_) bal.push_back({c, 1.0});
    lp_.add_row(std::move(bal), Relation::kEqual, xi.sum(), "balance");
    for (int k = 0; k < G; ++k) {
      lp_.add_row({{prec_[k], 1.0}, {gp_[k], -1.0}}, Relation::kLessEqual, da.r_plus[k]);
      lp_.add_row({{prec_[k], -1.0}, {gm_[k], -1.0}}, Relation::kLessEqual, da.r_minus[k]);
    }
    lp_plus_.assign(grid.num_lines(), -1);
    lp_minus_.assign(grid.num_lines(), -1);
    if (!opt.lazy_flows) {
      for (int l = 0; l < grid.num_lines(); ++l) {
        add_flow_row(l, 1);
        add_flow_row(l, -1);
      }
    }
  }

  RtOutcome solve(double binding_tol) {
    lp::Basis basis;
    int iterations = 0;
    while (true) {
      const lp::LpSolution sol = lp::solve_lp(lp_, opt_.lp, basis.empty() ? nullptr : &basis);
      iterations += sol.iterations;
      if (!sol.optimal()) {
        throw NumericalError(std::string("real-time LP ended with status ") + lp::to_string(sol.status));
      }
      basis = sol.basis;
      const Eigen::VectorXd prec = gather(sol.primal, prec_);
      const Eigen::VectorXd f = da_.flows + grid_.ptdf_generators() * prec - m_xi_;
      bool added = false;
      if (opt_.lazy_flows) {
        for (int l = 0; l < grid_.num_lines(); ++l) {
          const double fmax = grid_.lines()[l].flow_limit_mw;
          if (f[l] > fmax + opt_.flow_tol && lp_plus_[l] < 0) added |= add_flow_row(l, 1);
          if (-f[l] > fmax + opt_.flow_tol && lp_minus_[l] < 0) added |= add_flow_row(l, -1);
        }
      }
      if (added) continue;

      RtOutcome out;
      out.p_rec = prec;
      out.g_plus = gather(sol.primal, gp_);
      out.g_minus = gather(sol.primal, gm_);
      out.l_plus = Eigen::VectorXd::Zero(grid_.num_lines());
      out.l_minus = Eigen::VectorXd::Zero(grid_.num_lines());
      for (int l = 0; l < grid_.num_lines(); ++l) {
        if (lp_plus_[l] >= 0) out.l_plus[l] = sol.primal[lp_plus_[l]];
        if (lp_minus_[l] >= 0) out.l_minus[l] = sol.primal[lp_minus_[l]];
      }
      out.flows = f;
      out.violation_cost = sol.objective;
      for (int l = 0; l < grid_.num_lines(); ++l)
        if (std::abs(f[l]) >= grid_.lines()[l].flow_limit_mw - binding_tol) out.binding_lines.push_back(l);
      out.lp_iterations = iterations;
      return out;
    }
  }

 private:
  bool add_flow_row(int l, int dir) {
    auto& slot = dir > 0 ? lp_plus_[l] : lp_minus_[l];
    if (slot >= 0) return false;
    const double fmax = grid_.lines()[l].flow_limit_mw;
    slot = lp_.add_variable(0.0, kInf, c_viol_);
    std::vector<Term> t;
    const auto& pg = grid_.ptdf_generators();
    for (int k = 0; k < grid_.num_generators(); ++k)
      if (pg(l, k) != 0.0) t.push_back({prec_[k], dir * pg(l, k)});
    t.push_back({slot, -1.0});
    lp_.add_row(std::move(t), Relation::kLessEqual, fmax - dir * da_.flows[l] + dir * m_xi_[l]);
    return true;
  }

  static Eigen::VectorXd gather(const std::vector<double>& x, const std::vector<int>& cols) {
    Eigen::VectorXd v(static_cast<int>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) v[static_cast<int>(i)] = x[cols[i]];
    return v;
  }

  const GridModel& grid_;
  const DaSchedule& da_;
  const Eigen::VectorXd& xi_;
  double c_viol_;
  const SchedulingOptions& opt_;
  Eigen::VectorXd m_xi_;
  LinearProgram lp_;
  std::vector<int> prec_, gp_, gm_;
  std::vector<int> lp_plus_, lp_minus_;
};

}  // namespace

double RtOutcome::max_slack() const {
  double m = 0.0;
  for (const Eigen::VectorXd* v : {&g_plus, &g_minus, &l_plus, &l_minus})
    if (v->size() > 0) m = std::max(m, v->maxCoeff());
  return m;
}

DaSchedule solve_da(const GridModel& grid, const Eigen::VectorXd& d_hat, const ReserveRequirement& req,
                    const SchedulingOptions& options, const Eigen::VectorXd* vre) {
  return solve_master(grid, d_hat, req, {}, kDefaultViolationCost, options, vre);
}

DaSchedule solve_master(const GridModel& grid, const Eigen::VectorXd& d_hat, const ReserveRequirement& req,
                        const std::vector<Eigen::VectorXd>& scenarios, double c_viol, const SchedulingOptions& options,
                        const Eigen::VectorXd* vre) {
  MasterProblem master(grid, d_hat, req, scenarios, c_viol, options, vre);
  return master.solve();
}

RtOutcome solve_rt(const GridModel& grid, const DaSchedule& da, const Eigen::VectorXd& xi0, double c_viol,
                   const SchedulingOptions& options, double binding_tol) {
  RecourseProblem rt(grid, da, xi0, c_viol, options);
  return rt.solve(binding_tol);
}

}  // namespace resdeploy::scheduling

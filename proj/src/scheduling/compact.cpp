#include "resdeploy/error.hpp"
#include "resdeploy/scheduling/scheduling.hpp"

namespace resdeploy::scheduling {

const char* to_string(RowKind kind) {
  switch (kind) {
    case RowKind::kBalancePlus: return "balance+";
    case RowKind::kBalanceMinus: return "balance-";
    case RowKind::kFlowPlus: return "flow+";
    case RowKind::kFlowMinus: return "flow-";
    case RowKind::kReservePlus: return "reserve+";
    case RowKind::kReserveMinus: return "reserve-";
  }
  return "?";
}

CompactSecondStage build_compact_forms(const GridModel& grid, const Eigen::VectorXd& d_hat,
                                       const ReserveRequirement& req, double c_viol, const Eigen::VectorXd* vre,
                                       const SchedulingOptions& options) {
  if (d_hat.size() != grid.num_nodes()) throw ValidationError("point forecast dimension does not match the grid");
  if (vre && vre->size() != grid.num_nodes()) throw ValidationError("VRE forecast dimension does not match the grid");
  if (!(c_viol > 0.0)) throw ValidationError("violation cost must be positive");
  const int G = grid.num_generators();
  const int L = grid.num_lines();
  const int N = grid.num_nodes();

  CompactSecondStage cs;
  cs.num_generators = G;
  cs.c_viol = c_viol;
  if (options.curtailment && vre) {
    for (int n = 0; n < N; ++n)
      if ((*vre)[n] > 0.0) cs.curtail_nodes.push_back(n);
  }
  const int C = static_cast<int>(cs.curtail_nodes.size());
  const int nx = 3 * G + C;
  const int R = 2 + 2 * L + 2 * G;
  const Eigen::MatrixXd& pg = grid.ptdf_generators();
  Eigen::MatrixXd mc(L, C);  // PTDF columns of curtailable nodes
  for (int i = 0; i < C; ++i) mc.col(i) = grid.ptdf().col(cs.curtail_nodes[i]);
  const Eigen::VectorXd md = grid.ptdf() * d_hat;

  cs.H = Eigen::MatrixXd::Zero(R, nx);
  cs.D = Eigen::MatrixXd::Zero(R, G);
  cs.E = Eigen::MatrixXd::Zero(R, N);
  cs.h = Eigen::VectorXd::Zero(R);
  auto tag = [&](RowKind k, int e, bool slack) {
    cs.kinds.push_back(k);
    cs.element.push_back(e);
    cs.has_slack.push_back(slack);
  };

  cs.D.row(0).setOnes();
  cs.E.row(0).setOnes();
  tag(RowKind::kBalancePlus, -1, false);
  cs.D.row(1).setConstant(-1.0);
  cs.E.row(1).setConstant(-1.0);
  tag(RowKind::kBalanceMinus, -1, false);
  for (int l = 0; l < L; ++l) {
    const int r = 2 + l;
    cs.H.block(r, 0, 1, G) = pg.row(l);
    cs.H.block(r, 3 * G, 1, C) = -mc.row(l);
    cs.D.row(r) = pg.row(l);
    cs.E.row(r) = grid.ptdf().row(l);
    cs.h[r] = grid.lines()[l].flow_limit_mw + md[l];
    tag(RowKind::kFlowPlus, l, true);
  }
  for (int l = 0; l < L; ++l) {
    const int r = 2 + L + l;
    cs.H.block(r, 0, 1, G) = -pg.row(l);
    cs.H.block(r, 3 * G, 1, C) = mc.row(l);
    cs.D.row(r) = -pg.row(l);
    cs.E.row(r) = -grid.ptdf().row(l);
    cs.h[r] = grid.lines()[l].flow_limit_mw - md[l];
    tag(RowKind::kFlowMinus, l, true);
  }
  for (int k = 0; k < G; ++k) {
    const int r = 2 + 2 * L + k;
    cs.H(r, G + k) = -1.0;
    cs.D(r, k) = 1.0;
    tag(RowKind::kReservePlus, k, true);
  }
  for (int k = 0; k < G; ++k) {
    const int r = 2 + 2 * L + G + k;
    cs.H(r, 2 * G + k) = -1.0;
    cs.D(r, k) = -1.0;
    tag(RowKind::kReserveMinus, k, true);
  }

  // First stage B x <= b.
  const int RB = 2 + 2 + 2 * L + 2 * G + nx + C;
  cs.B = Eigen::MatrixXd::Zero(RB, nx);
  cs.b = Eigen::VectorXd::Zero(RB);
  cs.c = Eigen::VectorXd::Zero(nx);
  int r = 0;
  cs.B.block(r, 0, 1, G).setOnes();
  cs.B.block(r, 3 * G, 1, C).setConstant(-1.0);
  cs.b[r++] = d_hat.sum();
  cs.B.block(r, 0, 1, G).setConstant(-1.0);
  cs.B.block(r, 3 * G, 1, C).setOnes();
  cs.b[r++] = -d_hat.sum();
  cs.B.block(r, G, 1, G).setConstant(-1.0);
  cs.b[r++] = -req.rho_plus;
  cs.B.block(r, 2 * G, 1, G).setConstant(-1.0);
  cs.b[r++] = req.rho_minus;
  for (int l = 0; l < L; ++l) {
    cs.B.block(r, 0, 1, G) = pg.row(l);
    cs.B.block(r, 3 * G, 1, C) = -mc.row(l);
    cs.b[r++] = grid.lines()[l].flow_limit_mw + md[l];
    cs.B.block(r, 0, 1, G) = -pg.row(l);
    cs.B.block(r, 3 * G, 1, C) = mc.row(l);
    cs.b[r++] = grid.lines()[l].flow_limit_mw - md[l];
  }
  for (int k = 0; k < G; ++k) {
    const auto& g = grid.generators()[k];
    cs.B(r, k) = 1.0;
    cs.B(r, G + k) = 1.0;
    cs.b[r++] = g.p_max_mw;
    cs.B(r, k) = -1.0;
    cs.B(r, 2 * G + k) = 1.0;
    cs.b[r++] = -g.p_min_mw;
    cs.c[k] = g.cost_energy;
    cs.c[G + k] = g.cost_up;
    cs.c[2 * G + k] = g.cost_down;
  }
  for (int j = 0; j < nx; ++j) cs.B(r++, j) = -1.0;
  for (int i = 0; i < C; ++i) {
    cs.B(r, 3 * G + i) = 1.0;
    cs.b[r++] = (*vre)[cs.curtail_nodes[i]];
    cs.c[3 * G + i] = options.curtailment_cost + options.curtailment_epsilon;
  }
  return cs;
}

Eigen::VectorXd stack_first_stage(const CompactSecondStage& compact, const DaSchedule& da) {
  const int G = compact.num_generators;
  Eigen::VectorXd x(compact.num_x());
  x.segment(0, G) = da.p;
  x.segment(G, G) = da.r_plus;
  x.segment(2 * G, G) = da.r_minus;
  for (std::size_t i = 0; i < compact.curtail_nodes.size(); ++i)
    x[3 * G + static_cast<int>(i)] = da.curtailment.size() ? da.curtailment[compact.curtail_nodes[i]] : 0.0;
  return x;
}

CompactSolution solve_compact(const CompactSecondStage& cs, const Eigen::VectorXd& x, const Eigen::VectorXd& xi,
                              const lp::SolverOptions& options) {
  if (x.size() != cs.num_x() || xi.size() != cs.E.cols()) throw ValidationError("compact solve dimension mismatch");
  const int G = cs.num_generators;
  lp::LinearProgram lp;
  std::vector<int> prec(G);
  for (int k = 0; k < G; ++k) prec[k] = lp.add_variable(-lp::kInf, lp::kInf, 0.0);
  std::vector<int> slack(cs.num_rows(), -1);
  const Eigen::VectorXd rhs = cs.E * xi + cs.h - cs.H * x;
  for (int i = 0; i < cs.num_rows(); ++i) {
    std::vector<lp::Term> t;
    for (int k = 0; k < G; ++k)
      if (cs.D(i, k) != 0.0) t.push_back({prec[k], cs.D(i, k)});
    if (cs.has_slack[i]) {
      slack[i] = lp.add_variable(0.0, lp::kInf, cs.c_viol);
      t.push_back({slack[i], -1.0});
    }
    lp.add_row(std::move(t), lp::Relation::kLessEqual, rhs[i]);
  }
  const lp::LpSolution sol = lp::solve_lp(lp, options);
  if (!sol.optimal()) throw NumericalError(std::string("compact second stage ended with status ") + lp::to_string(sol.status));
  CompactSolution out;
  out.violation_cost = sol.objective;
  out.p_rec.resize(G);
  for (int k = 0; k < G; ++k) out.p_rec[k] = sol.primal[prec[k]];
  out.s = Eigen::VectorXd::Zero(cs.num_rows());
  for (int i = 0; i < cs.num_rows(); ++i)
    if (slack[i] >= 0) out.s[i] = sol.primal[slack[i]];
  return out;
}

}  // namespace resdeploy::scheduling

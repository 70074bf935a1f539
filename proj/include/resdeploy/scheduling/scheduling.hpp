#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "resdeploy/forecast/scenarios.hpp"
#include "resdeploy/grid/grid_model.hpp"
#include "resdeploy/lp/linear_program.hpp"

namespace resdeploy::scheduling {

using forecast::ReserveRequirement;
using grid::GridModel;

inline constexpr double kDefaultViolationCost = 1000.0;  // $/MWh

struct SchedulingOptions {
  // VRE curtailment variables u in [0, vre] raise net demand to d_hat + u.
  // Only active when a VRE forecast is passed to the builders.
  bool curtailment = false;
  double curtailment_cost = 0.0;       // $/MWh
  double curtailment_epsilon = 1e-4;   // added to curtailment_cost
  // Add line-flow rows only once the relaxation violates them.
  bool lazy_flows = true;
  double flow_tol = 1e-9;  // MW violation that triggers a row
  lp::SolverOptions lp;
};

/// First-stage decisions x = (p, r+, r-, u) and their cost.
struct DaSchedule {
  Eigen::VectorXd p;        // MW per generator
  Eigen::VectorXd r_plus;   // MW per generator
  Eigen::VectorXd r_minus;  // MW per generator
  Eigen::VectorXd curtailment;  // MW per node; empty when curtailment is off
  Eigen::VectorXd flows;    // scheduled flows f^e, MW per line
  double energy_cost = 0.0;       // $/h
  double reserve_cost = 0.0;      // $/h
  double curtailment_cost = 0.0;  // $/h, including the epsilon term
  double eta = 0.0;               // worst-case violation cost of the master, $/h
  int lp_iterations = 0;

  double cost() const { return energy_cost + reserve_cost + curtailment_cost; }
  double objective() const { return cost() + eta; }
  double up_reserve() const { return r_plus.sum(); }
  double down_reserve() const { return r_minus.sum(); }
};

/// Real-time recourse for one realized error.
struct RtOutcome {
  Eigen::VectorXd p_rec;    // MW per generator (signed)
  Eigen::VectorXd g_plus;   // MW per generator
  Eigen::VectorXd g_minus;  // MW per generator
  Eigen::VectorXd l_plus;   // MW per line
  Eigen::VectorXd l_minus;  // MW per line
  Eigen::VectorXd flows;    // realized flows f^e + M(A p_rec - xi), MW
  double violation_cost = 0.0;  // $/h
  std::vector<int> binding_lines;  // line indices with |flow| >= f^max - binding_tol
  int lp_iterations = 0;

  double max_slack() const;
  // Any slack above `tol` MW.
  bool violated(double tol = 1e-6) const { return max_slack() > tol; }
};

// Day-ahead problem with system-wide reserve requirements.
DaSchedule solve_da(const GridModel& grid, const Eigen::VectorXd& d_hat, const ReserveRequirement& req,
                    const SchedulingOptions& options = {}, const Eigen::VectorXd* vre = nullptr);

// Day-ahead problem plus one recourse block per deployment scenario and the
// worst-case violation bound eta. With no scenarios this is solve_da.
DaSchedule solve_master(const GridModel& grid, const Eigen::VectorXd& d_hat, const ReserveRequirement& req,
                        const std::vector<Eigen::VectorXd>& scenarios, double c_viol,
                        const SchedulingOptions& options = {}, const Eigen::VectorXd* vre = nullptr);

// Real-time redispatch of the procured reserves against the error xi0.
RtOutcome solve_rt(const GridModel& grid, const DaSchedule& da, const Eigen::VectorXd& xi0, double c_viol,
                   const SchedulingOptions& options = {}, double binding_tol = 1e-6);

// ---- compact forms ---------------------------------------------------------

enum class RowKind { kBalancePlus, kBalanceMinus, kFlowPlus, kFlowMinus, kReservePlus, kReserveMinus };
const char* to_string(RowKind kind);

/// Second stage in the standardized form
///   min c_viol's  s.t.  H x + D p_rec - s <= E xi + h,  s >= 0,
/// with rows ordered balance+, balance-, flow+ (per line), flow- (per line),
/// reserve+ (per generator), reserve- (per generator). The balance rows carry
/// no slack. x stacks (p, r+, r-, u); u covers `curtail_nodes`.
///
/// The first stage B x <= b, cost c (reserve requirement and energy balance
/// as inequality pairs, network and capacity rows) is kept alongside.
struct CompactSecondStage {
  Eigen::MatrixXd H, D, E;
  Eigen::VectorXd h;
  std::vector<RowKind> kinds;
  std::vector<int> element;   // line or generator index of each row, -1 for balance rows
  std::vector<bool> has_slack;
  Eigen::MatrixXd B;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
  std::vector<int> curtail_nodes;
  int num_generators = 0;
  double c_viol = kDefaultViolationCost;

  int num_rows() const { return static_cast<int>(h.size()); }
  int num_x() const { return static_cast<int>(H.cols()); }
};

CompactSecondStage build_compact_forms(const GridModel& grid, const Eigen::VectorXd& d_hat,
                                       const ReserveRequirement& req, double c_viol,
                                       const Eigen::VectorXd* vre = nullptr, const SchedulingOptions& options = {});

// Stacks a schedule into x in the compact ordering.
Eigen::VectorXd stack_first_stage(const CompactSecondStage& compact, const DaSchedule& da);

struct CompactSolution {
  double violation_cost = 0.0;
  Eigen::VectorXd p_rec;
  Eigen::VectorXd s;  // one entry per compact row (0 on balance rows)
};

// Solves the compact second stage for fixed (x, xi) with every row explicit.
CompactSolution solve_compact(const CompactSecondStage& compact, const Eigen::VectorXd& x, const Eigen::VectorXd& xi,
                              const lp::SolverOptions& options = {});

// ---- serialization ---------------------------------------------------------

nlohmann::ordered_json to_json(const DaSchedule& da, const GridModel& grid);
nlohmann::ordered_json to_json(const RtOutcome& rt, const GridModel& grid);

}  // namespace resdeploy::scheduling

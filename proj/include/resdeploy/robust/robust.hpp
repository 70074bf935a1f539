#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "resdeploy/forecast/scenarios.hpp"
#include "resdeploy/forecast/uncertainty_set.hpp"
#include "resdeploy/grid/grid_model.hpp"
#include "resdeploy/scheduling/scheduling.hpp"

namespace resdeploy::robust {

using forecast::ReserveRequirement;
using forecast::ScenarioSet;
using forecast::UncertaintySet;
using grid::GridModel;
using scheduling::CompactSecondStage;
using scheduling::DaSchedule;
using scheduling::SchedulingOptions;

struct DeploymentScenario {
  Eigen::VectorXd xi;  // MW per node
  std::string tag;     // extreme-up | extreme-down | ccg-iteration-<j> | vertex-enum
  double aggregate() const { return xi.sum(); }
};

/// Ordered deployment scenarios without near-duplicates.
class DeploymentScenarioSet {
 public:
  explicit DeploymentScenarioSet(double duplicate_tol = 1e-6) : tol_(duplicate_tol) {}

  // Appends unless an entry lies within the duplicate tolerance (inf-norm).
  bool add(Eigen::VectorXd xi, std::string tag);
  bool contains(const Eigen::VectorXd& xi) const;

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<DeploymentScenario>& entries() const { return entries_; }
  const DeploymentScenario& operator[](std::size_t i) const { return entries_[i]; }
  std::vector<Eigen::VectorXd> vectors() const;

 private:
  double tol_;
  std::vector<DeploymentScenario> entries_;
};

// ---- extreme scenarios -----------------------------------------------------

struct ExtremeScenarios {
  DeploymentScenarioSet scenarios;  // extreme-up then extreme-down, projected onto the set
  Eigen::VectorXd e_plus, e_minus;  // allocation factors
  Eigen::VectorXd raw_up, raw_down; // rho * e before projection
  std::vector<std::string> warnings;
};

ExtremeScenarios extreme_scenarios(const ScenarioSet& scenarios, const ReserveRequirement& req,
                                   const UncertaintySet& set,
                                   forecast::QuantileMethod method = forecast::QuantileMethod::kLinear);

// ---- closed-form line initialization ---------------------------------------

struct LineInit {
  int line = 0;
  Eigen::VectorXd vertex;  // box vertex before projection
  Eigen::VectorXd xi;      // projected onto the set
  bool zero_flow = false;  // scheduled flow was 0; its sign taken as +1
  bool zero_row = false;   // PTDF row is identically 0
  bool opposite = false;   // the counter-flow vertex gave the larger deviation
};

/// Box vertex maximizing |f_l - M_l xi|: per node, the upper bound where
/// sign(f_l) M_lj < 0 (or = 0) and the lower bound where it is > 0. The
/// counter-flow vertex is kept instead when its deviation is strictly larger.
LineInit adm_init_for_line(const GridModel& grid, const DaSchedule& da, int line, const UncertaintySet& set);

// ---- alternating direction method ------------------------------------------

struct AdmConfig {
  int max_iterations = 20;  // L
  double eps = 1e-6;        // stop once UB - LB < eps
  bool cross_check = true;  // compare every lower bound with a primal RT solve
  lp::SolverOptions lp;
};

struct AdmResult {
  double q_tilde = 0.0;               // (UB + LB) / 2 of the last iteration
  Eigen::VectorXd xi;                 // last evaluated error vector
  std::vector<double> lb, ub;         // per iteration
  std::vector<Eigen::VectorXd> iterates;  // xi evaluated at each iteration
  std::vector<double> primal_check;   // primal RT cost at each iterate (cross-check), if enabled
  int iterations = 0;
  bool converged = false;
  std::string init_label;

  double max_cross_check_gap() const;
};

// Primal second-stage cost at xi, used for the cross-check.
using PrimalEvaluator = std::function<double(const Eigen::VectorXd&)>;

AdmResult adm(const CompactSecondStage& compact, const Eigen::VectorXd& x, const UncertaintySet& set,
              const Eigen::VectorXd& xi_init, const AdmConfig& config, const PrimalEvaluator& primal = {});

struct AdversaryInit {
  std::string label;
  Eigen::VectorXd xi;
};

struct AdversaryResult {
  AdmResult best;
  int best_index = -1;
  std::vector<AdmResult> runs;  // one per init, in init order
};

// Runs ADM from every init (concurrently up to `workers`) and keeps the run
// with the largest Q-tilde; ties go to the earlier init.
AdversaryResult adversary(const GridModel& grid, const DaSchedule& da, const CompactSecondStage& compact,
                          const UncertaintySet& set, const std::vector<AdversaryInit>& inits,
                          const AdmConfig& config, const SchedulingOptions& sched, int workers = 1);

// ---- vertex enumeration ----------------------------------------------------

// Coordinates with upper - lower > tol.
std::vector<int> uncertain_dims(const UncertaintySet& set, double tol = 1e-9);

/// Vertices of the set restricted to `dims`; other coordinates are fixed at
/// the point of their box range nearest to 0. Throws ConfigError when
/// |dims| exceeds `cap`.
std::vector<Eigen::VectorXd> enumerate_vertices(const UncertaintySet& set, const std::vector<int>& dims,
                                                int cap = 12);

// ---- column-and-constraint generation --------------------------------------

enum class AdversaryMode { kAdm, kVertexEnumeration };

struct CcgConfig {
  int max_scenarios = 10;  // M_max
  double c_viol = scheduling::kDefaultViolationCost;
  double gap_tol = 1e-6;
  double zero_tol = 1e-6;       // $/h; a Q-tilde at or below this counts as zero
  double duplicate_tol = 1e-6;  // inf-norm
  AdversaryMode mode = AdversaryMode::kAdm;
  AdmConfig adm;
  int vertex_cap = 12;
  int workers = 1;
  SchedulingOptions scheduling;
};

struct CcgIteration {
  int index = 0;
  double lb = 0.0;       // master objective c'x + eta
  double ub = 0.0;       // c'x + Q-tilde
  double eta = 0.0;
  double da_cost = 0.0;  // c'x
  double q_tilde = 0.0;
  bool scenario_added = false;
  int adm_iterations = 0;
  std::string init_label;
};

struct CcgReport {
  std::vector<CcgIteration> iterations;
  std::string termination;  // gap-closed | max-scenarios | duplicate-scenario | adversary-zero
  double final_gap = 0.0;   // UB - LB of the last iteration
  std::vector<int> zero_flow_lines;
  std::vector<std::string> notes;
  double max_cross_check_gap = 0.0;
};

struct CcgResult {
  DaSchedule schedule;
  DeploymentScenarioSet scenarios;
  CcgReport report;
};

struct CcgInputs {
  const GridModel* grid = nullptr;
  Eigen::VectorXd d_hat;
  const Eigen::VectorXd* vre = nullptr;
  ReserveRequirement req;
  const UncertaintySet* set = nullptr;
  std::vector<AdversaryInit> fixed_inits;  // e.g. the extreme scenarios
  std::vector<int> init_lines;             // lines whose closed-form vertex seeds ADM
};

CcgResult ccg(const CcgInputs& inputs, const CcgConfig& config);

// One-shot master over every vertex of the set (exact robust schedule).
DaSchedule vertex_enumeration_master(const CcgInputs& inputs, const CcgConfig& config,
                                     std::vector<Eigen::VectorXd>* vertices_out = nullptr);

nlohmann::ordered_json to_json(const CcgReport& report);
nlohmann::ordered_json to_json(const AdmResult& adm);

}  // namespace resdeploy::robust

#include <algorithm>
#include <cmath>

#include "resdeploy/error.hpp"
#include "resdeploy/robust/robust.hpp"
#include "resdeploy/util/parallel.hpp"

namespace resdeploy::robust {

namespace {

void check_inputs(const CcgInputs& in, const CcgConfig& config) {
  if (!in.grid || !in.set) throw ConfigError("robust scheduling needs a grid and an uncertainty set");
  if (in.set->dim() != in.grid->num_nodes()) throw ValidationError("uncertainty set dimension does not match the grid");
  if (config.max_scenarios < 0) throw ConfigError("max_scenarios must be nonnegative");
  for (int l : in.init_lines)
    if (l < 0 || l >= in.grid->num_lines()) throw ConfigError("initialization line index out of range");
}

struct WorstCase {
  double q = 0.0;
  Eigen::VectorXd xi;
  int adm_iterations = 0;
  std::string label;
  double cross_check_gap = 0.0;
};

WorstCase vertex_adversary(const CcgInputs& in, const CcgConfig& config, const DaSchedule& da,
                           const std::vector<Eigen::VectorXd>& vertices) {
  std::vector<double> cost(vertices.size());
  util::parallel_for(static_cast<int>(vertices.size()), config.workers, [&](int i) {
    cost[i] = scheduling::solve_rt(*in.grid, da, vertices[i], config.c_viol, config.scheduling).violation_cost;
  });
  WorstCase w;
  int best = 0;
  for (std::size_t i = 1; i < cost.size(); ++i)
    if (cost[i] > cost[best] + 1e-9 * std::max(1.0, std::abs(cost[best]))) best = static_cast<int>(i);
  w.q = cost[best];
  w.xi = vertices[best];
  w.label = "vertex-" + std::to_string(best);
  return w;
}

}  // namespace

CcgResult ccg(const CcgInputs& in, const CcgConfig& config) {
  check_inputs(in, config);
  const GridModel& grid = *in.grid;
  const UncertaintySet& set = *in.set;
  const CompactSecondStage compact =
      scheduling::build_compact_forms(grid, in.d_hat, in.req, config.c_viol, in.vre, config.scheduling);

  std::vector<Eigen::VectorXd> vertices;
  if (config.mode == AdversaryMode::kVertexEnumeration)
    vertices = enumerate_vertices(set, uncertain_dims(set), config.vertex_cap);

  CcgResult result{DaSchedule{}, DeploymentScenarioSet(config.duplicate_tol), CcgReport{}};
  CcgReport& report = result.report;
  std::vector<bool> zero_flow(grid.num_lines(), false);

  for (int j = 0;; ++j) {
    DaSchedule master = scheduling::solve_master(grid, in.d_hat, in.req, result.scenarios.vectors(), config.c_viol,
                                                 config.scheduling, in.vre);
    // Closed-form inits follow the flows of the current schedule.
    std::vector<AdversaryInit> inits = in.fixed_inits;
    if (config.mode == AdversaryMode::kAdm) {
      for (int l : in.init_lines) {
        const LineInit li = adm_init_for_line(grid, master, l, set);
        if (li.zero_flow && !zero_flow[l]) {
          zero_flow[l] = true;
          report.zero_flow_lines.push_back(l);
        }
        inits.push_back({"line-" + grid.lines()[l].id, li.xi});
      }
      if (inits.empty()) inits.push_back({"zero", set.project(Eigen::VectorXd::Zero(set.dim()))});
    }

    WorstCase worst;
    if (config.mode == AdversaryMode::kAdm) {
      const AdversaryResult adv = adversary(grid, master, compact, set, inits, config.adm, config.scheduling,
                                            config.workers);
      worst.q = adv.best.q_tilde;
      worst.xi = adv.best.xi;
      worst.adm_iterations = adv.best.iterations;
      worst.label = adv.best.init_label;
      for (const auto& run : adv.runs) worst.cross_check_gap = std::max(worst.cross_check_gap, run.max_cross_check_gap());
    } else {
      worst = vertex_adversary(in, config, master, vertices);
    }
    report.max_cross_check_gap = std::max(report.max_cross_check_gap, worst.cross_check_gap);

    CcgIteration it;
    it.index = j;
    it.da_cost = master.cost();
    it.eta = master.eta;
    it.lb = master.objective();
    it.q_tilde = worst.q;
    it.ub = master.cost() + worst.q;
    it.adm_iterations = worst.adm_iterations;
    it.init_label = worst.label;
    report.final_gap = it.ub - it.lb;
    result.schedule = std::move(master);

    std::string stop;
    if (worst.q <= config.zero_tol) {
      stop = "adversary-zero";
    } else if (it.ub - it.lb <= config.gap_tol * std::max(1.0, std::abs(it.ub))) {
      stop = "gap-closed";
    } else if (result.scenarios.contains(worst.xi)) {
      stop = "duplicate-scenario";
    } else if (static_cast<int>(result.scenarios.size()) >= config.max_scenarios) {
      stop = "max-scenarios";
    }
    if (!stop.empty()) {
      report.iterations.push_back(it);
      report.termination = stop;
      break;
    }
    it.scenario_added = result.scenarios.add(worst.xi, "ccg-iteration-" + std::to_string(j));
    report.iterations.push_back(it);
  }
  if (!report.zero_flow_lines.empty()) {
    report.notes.push_back(std::to_string(report.zero_flow_lines.size()) +
                           " initialization line(s) had zero scheduled flow; their sign was taken as +1");
  }
  return result;
}

DaSchedule vertex_enumeration_master(const CcgInputs& in, const CcgConfig& config,
                                     std::vector<Eigen::VectorXd>* vertices_out) {
  check_inputs(in, config);
  std::vector<Eigen::VectorXd> vertices = enumerate_vertices(*in.set, uncertain_dims(*in.set), config.vertex_cap);
  DaSchedule da = scheduling::solve_master(*in.grid, in.d_hat, in.req, vertices, config.c_viol, config.scheduling,
                                           in.vre);
  if (vertices_out) *vertices_out = std::move(vertices);
  return da;
}

nlohmann::ordered_json to_json(const CcgReport& report) {
  nlohmann::ordered_json j;
  j["termination"] = report.termination;
  j["final_gap"] = report.final_gap;
  j["max_cross_check_gap"] = report.max_cross_check_gap;
  auto& its = j["iterations"] = nlohmann::ordered_json::array();
  for (const auto& it : report.iterations) {
    its.push_back({{"index", it.index},
                   {"lb", it.lb},
                   {"ub", it.ub},
                   {"eta", it.eta},
                   {"da_cost", it.da_cost},
                   {"q_tilde", it.q_tilde},
                   {"scenario_added", it.scenario_added},
                   {"adm_iterations", it.adm_iterations},
                   {"init", it.init_label}});
  }
  j["zero_flow_lines"] = report.zero_flow_lines;
  j["notes"] = report.notes;
  return j;
}

nlohmann::ordered_json to_json(const AdmResult& adm) {
  nlohmann::ordered_json j;
  j["init"] = adm.init_label;
  j["q_tilde"] = adm.q_tilde;
  j["iterations"] = adm.iterations;
  j["converged"] = adm.converged;
  j["lb"] = adm.lb;
  j["ub"] = adm.ub;
  j["xi"] = std::vector<double>(adm.xi.data(), adm.xi.data() + adm.xi.size());
  if (!adm.primal_check.empty()) j["primal_check"] = adm.primal_check;
  return j;
}

}  // namespace resdeploy::robust

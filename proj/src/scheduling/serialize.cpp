#include "resdeploy/scheduling/scheduling.hpp"

namespace resdeploy::scheduling {

nlohmann::ordered_json to_json(const DaSchedule& da, const GridModel& grid) {
  nlohmann::ordered_json j;
  j["energy_cost"] = da.energy_cost;
  j["reserve_cost"] = da.reserve_cost;
  j["curtailment_cost"] = da.curtailment_cost;
  j["da_cost"] = da.cost();
  j["eta"] = da.eta;
  j["up_reserve_mw"] = da.up_reserve();
  j["down_reserve_mw"] = da.down_reserve();
  auto& gens = j["generators"] = nlohmann::ordered_json::array();
  for (int k = 0; k < grid.num_generators(); ++k) {
    gens.push_back({{"gen_id", grid.generators()[k].id},
                    {"p_mw", da.p[k]},
                    {"r_plus_mw", da.r_plus[k]},
                    {"r_minus_mw", da.r_minus[k]}});
  }
  auto& lines = j["lines"] = nlohmann::ordered_json::array();
  for (int l = 0; l < grid.num_lines(); ++l) {
    lines.push_back({{"line_id", grid.lines()[l].id},
                     {"flow_mw", da.flows[l]},
                     {"flow_limit_mw", grid.lines()[l].flow_limit_mw}});
  }
  if (da.curtailment.size()) {
    auto& cur = j["curtailment"] = nlohmann::ordered_json::array();
    for (int n = 0; n < grid.num_nodes(); ++n)
      if (da.curtailment[n] != 0.0) cur.push_back({{"node_id", grid.nodes()[n].id}, {"curtailment_mw", da.curtailment[n]}});
  }
  return j;
}

nlohmann::ordered_json to_json(const RtOutcome& rt, const GridModel& grid) {
  nlohmann::ordered_json j;
  j["violation_cost"] = rt.violation_cost;
  j["max_slack_mw"] = rt.max_slack();
  auto& gens = j["generators"] = nlohmann::ordered_json::array();
  for (int k = 0; k < grid.num_generators(); ++k) {
    gens.push_back({{"gen_id", grid.generators()[k].id},
                    {"p_rec_mw", rt.p_rec[k]},
                    {"g_plus_mw", rt.g_plus[k]},
                    {"g_minus_mw", rt.g_minus[k]}});
  }
  auto& lines = j["lines"] = nlohmann::ordered_json::array();
  for (int l = 0; l < grid.num_lines(); ++l) {
    lines.push_back({{"line_id", grid.lines()[l].id},
                     {"flow_mw", rt.flows[l]},
                     {"l_plus_mw", rt.l_plus[l]},
                     {"l_minus_mw", rt.l_minus[l]}});
  }
  auto& binding = j["binding_lines"] = nlohmann::ordered_json::array();
  for (int l : rt.binding_lines) binding.push_back(grid.lines()[l].id);
  return j;
}

}  // namespace resdeploy::scheduling

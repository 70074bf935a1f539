#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "resdeploy/error.hpp"
#include "resdeploy/evalsim/evalsim.hpp"
#include "resdeploy/util/csv.hpp"

namespace resdeploy::evalsim {

namespace {

using nlohmann::ordered_json;
using util::format_double;

ordered_json tally_json(const Tally& t) {
  return {{"count", t.count},
          {"violations", t.violations},
          {"violation_pct", t.violation_pct()},
          {"avg_rt_cost", t.avg_rt_cost()},
          {"rt_cost_sum", t.rt_cost_sum}};
}

ordered_json node_vector(const Eigen::VectorXd& v, const GridModel& grid, const char* key) {
  ordered_json arr = ordered_json::array();
  for (int n = 0; n < grid.num_nodes(); ++n) arr.push_back({{"node_id", grid.nodes()[n].id}, {key, v[n]}});
  return arr;
}

ordered_json method_json(const MethodResult& r, const GridModel& grid) {
  ordered_json j;
  j["method"] = to_string(r.method);
  j["status"] = r.ok ? "ok" : "failed";
  if (!r.ok) {
    j["error"] = r.error;
    return j;
  }
  j["da_cost"] = r.da_cost;
  j["objective"] = r.objective;
  j["up_reserve_mw"] = r.up_reserve;
  j["down_reserve_mw"] = r.down_reserve;
  j["all"] = tally_json(r.all);
  j["inside"] = tally_json(r.inside);
  j["outside"] = tally_json(r.outside);
  auto& sc = j["deployment_scenarios"] = ordered_json::array();
  for (const auto& e : r.scenarios.entries())
    sc.push_back({{"tag", e.tag}, {"aggregate_mw", e.aggregate()}, {"errors", node_vector(e.xi, grid, "error_mw")}});
  if (r.ccg) j["ccg"] = robust::to_json(*r.ccg);
  j["schedule"] = scheduling::to_json(r.schedule, grid);
  return j;
}

void open_out(std::ofstream& out, const std::filesystem::path& file) {
  out.open(file, std::ios::binary);
  if (!out) throw Error("cannot write " + file.string());
}

}  // namespace

ordered_json to_json(const EvaluationReport& rep, const GridModel& grid) {
  ordered_json j;
  j["hour"] = rep.hour;
  j["alpha"] = rep.req.alpha;
  j["rho_plus_mw"] = rep.req.rho_plus;
  j["rho_minus_mw"] = rep.req.rho_minus;
  ordered_json box = ordered_json::array();
  for (int n = 0; n < grid.num_nodes(); ++n)
    box.push_back({{"node_id", grid.nodes()[n].id}, {"lower_mw", rep.box_lower[n]}, {"upper_mw", rep.box_upper[n]}});
  j["box"] = std::move(box);
  j["train_count"] = rep.train_count;
  j["test_count"] = rep.test_count;
  j["inside_count"] = rep.inside_count;
  j["coverage_pct"] = rep.test_count ? 100.0 * rep.inside_count / rep.test_count : 0.0;
  auto& fl = j["flagged_lines"] = ordered_json::array();
  for (int l : rep.flagged_lines) fl.push_back(grid.lines()[l].id);
  j["warnings"] = rep.warnings;
  auto& ms = j["methods"] = ordered_json::array();
  for (const auto& r : rep.methods) ms.push_back(method_json(r, grid));
  return j;
}

ordered_json to_json(const MultiHourReport& report, const GridModel& grid, const EvalConfig& config) {
  ordered_json j;
  auto& cfg = j["evaluation"];
  cfg["alpha"] = config.alpha;
  cfg["slack_tol_mw"] = config.slack_tol;
  cfg["membership_tol"] = config.membership_tol;
  cfg["quantile"] = config.quantile == forecast::QuantileMethod::kLinear ? "linear" : "nearest-rank";
  cfg["c_viol"] = config.ccg.c_viol;
  cfg["max_scenarios"] = config.ccg.max_scenarios;
  cfg["adm_max_iterations"] = config.ccg.adm.max_iterations;
  cfg["adm_eps"] = config.ccg.adm.eps;
  cfg["gap_tol"] = config.ccg.gap_tol;
  cfg["init_set"] = to_string(config.init_set);
  cfg["flagged_lines"] = config.flagged_lines;
  auto& agg = j["aggregate"] = ordered_json::array();
  for (const auto& a : report.aggregate) {
    ordered_json e;
    e["method"] = to_string(a.method);
    e["hours"] = a.hours;
    e["da_cost"] = a.da_cost;
    e["all"] = tally_json(a.all);
    e["inside"] = tally_json(a.inside);
    e["outside"] = tally_json(a.outside);
    if (a.method == Method::kCcg) e["scenario_histogram"] = a.scenario_histogram;
    agg.push_back(std::move(e));
  }
  auto& hours = j["hours"] = ordered_json::array();
  for (const auto& h : report.hours) hours.push_back(to_json(h, grid));
  return j;
}

std::vector<std::string> write_artifacts(const std::filesystem::path& dir, const MultiHourReport& report,
                                         const GridModel& grid, const EvalConfig& config,
                                         const ordered_json& run_info) {
  std::filesystem::create_directories(dir / "plotdata");
  std::vector<std::string> written;

  {
    ordered_json doc;
    doc["run"] = run_info;
    const ordered_json body = to_json(report, grid, config);
    for (auto it = body.begin(); it != body.end(); ++it) doc[it.key()] = *it;
    std::ofstream out;
    open_out(out, dir / "report.json");
    out << doc.dump(2) << '\n';
    written.push_back("report.json");
  }
  {
    std::ofstream out;
    open_out(out, dir / "per_hour.csv");
    out << "hour,method,status,da_cost,up_reserve_mw,down_reserve_mw,rho_plus_mw,rho_minus_mw,"
           "count_all,violations_all,rt_cost_sum_all,count_inside,violations_inside,rt_cost_sum_inside,"
           "count_outside,violations_outside,rt_cost_sum_outside,deployment_scenarios,termination\n";
    for (const auto& h : report.hours) {
      for (const auto& r : h.methods) {
        out << h.hour << ',' << to_string(r.method) << ',' << (r.ok ? "ok" : "failed") << ','
            << format_double(r.da_cost) << ',' << format_double(r.up_reserve) << ',' << format_double(r.down_reserve)
            << ',' << format_double(h.req.rho_plus) << ',' << format_double(h.req.rho_minus);
        for (const Tally* t : {&r.all, &r.inside, &r.outside})
          out << ',' << t->count << ',' << t->violations << ',' << format_double(t->rt_cost_sum);
        out << ',' << r.scenarios.size() << ',' << (r.ccg ? r.ccg->termination : std::string{}) << '\n';
      }
    }
    written.push_back("per_hour.csv");
  }
  {
    std::ofstream out;
    open_out(out, dir / "plotdata" / "deployment_scenarios.csv");
    out << "hour,method,index,tag,node_id,error_mw\n";
    for (const auto& h : report.hours)
      for (const auto& r : h.methods)
        for (std::size_t i = 0; i < r.scenarios.size(); ++i)
          for (int n = 0; n < grid.num_nodes(); ++n)
            out << h.hour << ',' << to_string(r.method) << ',' << i << ',' << r.scenarios[i].tag << ','
                << grid.nodes()[n].id << ',' << format_double(r.scenarios[i].xi[n]) << '\n';
    written.push_back("plotdata/deployment_scenarios.csv");
  }
  {
    std::ofstream out;
    open_out(out, dir / "plotdata" / "zonal_schedule.csv");
    out << "hour,method,zone,energy_mw,up_reserve_mw,down_reserve_mw\n";
    for (const auto& h : report.hours) {
      for (const auto& r : h.methods) {
        if (!r.ok) continue;
        std::map<std::string, std::array<double, 3>> zones;
        for (int k = 0; k < grid.num_generators(); ++k) {
          const auto& g = grid.generators()[k];
          auto& z = zones[grid.nodes()[grid.node_index(g.node)].zone];
          z[0] += r.schedule.p[k];
          z[1] += r.schedule.r_plus[k];
          z[2] += r.schedule.r_minus[k];
        }
        for (const auto& [zone, v] : zones)
          out << h.hour << ',' << to_string(r.method) << ',' << zone << ',' << format_double(v[0]) << ','
              << format_double(v[1]) << ',' << format_double(v[2]) << '\n';
      }
    }
    written.push_back("plotdata/zonal_schedule.csv");
  }
  {
    std::ofstream out;
    open_out(out, dir / "plotdata" / "ccg_scenario_histogram.csv");
    out << "deployment_scenarios,hours\n";
    for (const auto& a : report.aggregate)
      if (a.method == Method::kCcg)
        for (std::size_t i = 0; i < a.scenario_histogram.size(); ++i) out << i << ',' << a.scenario_histogram[i] << '\n';
    written.push_back("plotdata/ccg_scenario_histogram.csv");
  }
  return written;
}

std::string sha256_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error("cannot read " + file.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw Error("SHA-256 initialization failed");
  }
  char buf[1 << 15];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return hex.str();
}

}  // namespace resdeploy::evalsim

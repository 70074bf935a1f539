#include "resdeploy/grid/grid_io.hpp"

#include <fstream>
#include <set>

#include "resdeploy/error.hpp"
#include "resdeploy/util/csv.hpp"

namespace resdeploy::grid {

using util::CsvTable;

GridModel load_grid_csv(const std::filesystem::path& dir, std::optional<int> slack_override) {
  const CsvTable nodes_csv = CsvTable::read(dir / "nodes.csv");
  const CsvTable lines_csv = CsvTable::read(dir / "lines.csv");
  const CsvTable gens_csv = CsvTable::read(dir / "generators.csv");

  std::vector<Node> nodes;
  std::set<int> ids;
  std::optional<int> slack;
  {
    const auto id_col = nodes_csv.column("node_id");
    const auto zone_col = nodes_csv.find_column("zone");
    const auto slack_col = nodes_csv.find_column("is_slack");
    for (std::size_t r = 0; r < nodes_csv.size(); ++r) {
      Node n;
      n.id = nodes_csv.integer(r, id_col);
      if (zone_col) n.zone = nodes_csv.cell(r, *zone_col);
      if (slack_col && nodes_csv.integer(r, *slack_col) != 0) slack = n.id;
      if (!ids.insert(n.id).second) {
        throw ValidationError(nodes_csv.source() + ":" + std::to_string(nodes_csv.line_of(r)) +
                              ": duplicate node id " + std::to_string(n.id));
      }
      nodes.push_back(std::move(n));
    }
  }

  auto check_node = [&](const CsvTable& t, std::size_t r, int id) {
    if (!ids.count(id)) {
      throw ValidationError(t.source() + ":" + std::to_string(t.line_of(r)) + ": unknown node id " +
                            std::to_string(id));
    }
  };

  std::vector<Line> lines;
  {
    const auto c_id = lines_csv.column("line_id");
    const auto c_from = lines_csv.column("from_node");
    const auto c_to = lines_csv.column("to_node");
    const auto c_x = lines_csv.column("reactance_pu");
    const auto c_f = lines_csv.column("flow_limit_mw");
    for (std::size_t r = 0; r < lines_csv.size(); ++r) {
      Line l;
      l.id = lines_csv.cell(r, c_id);
      l.from_node = lines_csv.integer(r, c_from);
      l.to_node = lines_csv.integer(r, c_to);
      check_node(lines_csv, r, l.from_node);
      check_node(lines_csv, r, l.to_node);
      l.reactance_pu = lines_csv.number(r, c_x);
      l.flow_limit_mw = lines_csv.number(r, c_f);
      lines.push_back(std::move(l));
    }
  }

  std::vector<Generator> gens;
  {
    const auto c_id = gens_csv.column("gen_id");
    const auto c_node = gens_csv.column("node_id");
    const auto c_pmin = gens_csv.column("p_min_mw");
    const auto c_pmax = gens_csv.column("p_max_mw");
    const auto c_ce = gens_csv.column("cost_energy");
    const auto c_cu = gens_csv.column("cost_up");
    const auto c_cd = gens_csv.column("cost_down");
    for (std::size_t r = 0; r < gens_csv.size(); ++r) {
      Generator g;
      g.id = gens_csv.cell(r, c_id);
      g.node = gens_csv.integer(r, c_node);
      check_node(gens_csv, r, g.node);
      g.p_min_mw = gens_csv.number(r, c_pmin);
      g.p_max_mw = gens_csv.number(r, c_pmax);
      g.cost_energy = gens_csv.number(r, c_ce);
      g.cost_up = gens_csv.number(r, c_cu);
      g.cost_down = gens_csv.number(r, c_cd);
      gens.push_back(std::move(g));
    }
  }
  return GridModel::build(std::move(nodes), std::move(lines), std::move(gens),
                          slack_override ? slack_override : slack);
}

GridModel grid_from_json(const nlohmann::json& doc, const std::string& source, std::optional<int> slack_override) {
  try {
    std::vector<Node> nodes;
    for (const auto& n : doc.at("nodes")) nodes.push_back({n.at("node_id").get<int>(), n.value("zone", std::string{})});
    std::vector<Line> lines;
    for (const auto& l : doc.at("lines")) {
      lines.push_back({l.at("line_id").get<std::string>(), l.at("from_node").get<int>(), l.at("to_node").get<int>(),
                       l.at("reactance_pu").get<double>(), l.at("flow_limit_mw").get<double>()});
    }
    std::vector<Generator> gens;
    for (const auto& g : doc.at("generators")) {
      gens.push_back({g.at("gen_id").get<std::string>(), g.at("node_id").get<int>(), g.at("p_min_mw").get<double>(),
                      g.at("p_max_mw").get<double>(), g.at("cost_energy").get<double>(),
                      g.at("cost_up").get<double>(), g.at("cost_down").get<double>()});
    }
    std::optional<int> slack = slack_override;
    if (!slack && doc.contains("slack_node")) slack = doc.at("slack_node").get<int>();
    return GridModel::build(std::move(nodes), std::move(lines), std::move(gens), slack);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(source + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(source + ": " + e.what());
  }
}

GridModel load_grid_json(const std::filesystem::path& file, std::optional<int> slack_override) {
  std::ifstream in(file);
  if (!in) throw ValidationError("cannot open '" + file.string() + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(file.string() + ": " + e.what());
  }
  return grid_from_json(doc, file.string(), slack_override);
}

GridModel load_grid(const std::filesystem::path& path, std::optional<int> slack_override) {
  if (std::filesystem::is_directory(path)) return load_grid_csv(path, slack_override);
  return load_grid_json(path, slack_override);
}

nlohmann::ordered_json grid_to_json(const GridModel& grid) {
  nlohmann::ordered_json doc;
  doc["slack_node"] = grid.slack_node();
  auto& nodes = doc["nodes"] = nlohmann::ordered_json::array();
  for (const Node& n : grid.nodes()) nodes.push_back({{"node_id", n.id}, {"zone", n.zone}});
  auto& lines = doc["lines"] = nlohmann::ordered_json::array();
  for (const Line& l : grid.lines()) {
    lines.push_back({{"line_id", l.id},
                     {"from_node", l.from_node},
                     {"to_node", l.to_node},
                     {"reactance_pu", l.reactance_pu},
                     {"flow_limit_mw", l.flow_limit_mw}});
  }
  auto& gens = doc["generators"] = nlohmann::ordered_json::array();
  for (const Generator& g : grid.generators()) {
    gens.push_back({{"gen_id", g.id},
                    {"node_id", g.node},
                    {"p_min_mw", g.p_min_mw},
                    {"p_max_mw", g.p_max_mw},
                    {"cost_energy", g.cost_energy},
                    {"cost_up", g.cost_up},
                    {"cost_down", g.cost_down}});
  }
  return doc;
}

void write_grid_csv(const GridModel& grid, const std::filesystem::path& dir) {
  using util::format_double;
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "nodes.csv");
    out << "node_id,zone,is_slack\n";
    for (const Node& n : grid.nodes()) out << n.id << ',' << n.zone << ',' << (n.id == grid.slack_node()) << '\n';
  }
  {
    std::ofstream out(dir / "lines.csv");
    out << "line_id,from_node,to_node,reactance_pu,flow_limit_mw\n";
    for (const Line& l : grid.lines()) {
      out << l.id << ',' << l.from_node << ',' << l.to_node << ',' << format_double(l.reactance_pu) << ','
          << format_double(l.flow_limit_mw) << '\n';
    }
  }
  {
    std::ofstream out(dir / "generators.csv");
    out << "gen_id,node_id,p_min_mw,p_max_mw,cost_energy,cost_up,cost_down\n";
    for (const Generator& g : grid.generators()) {
      out << g.id << ',' << g.node << ',' << format_double(g.p_min_mw) << ',' << format_double(g.p_max_mw) << ','
          << format_double(g.cost_energy) << ',' << format_double(g.cost_up) << ',' << format_double(g.cost_down)
          << '\n';
    }
  }
}

}  // namespace resdeploy::grid

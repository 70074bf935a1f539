#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "resdeploy/cli/commands.hpp"
#include "resdeploy/error.hpp"
#include "resdeploy/grid/grid_io.hpp"
#include "resdeploy/util/csv.hpp"

namespace resdeploy::cli {

namespace {

using nlohmann::ordered_json;

std::vector<int> node_ids(const grid::GridModel& grid) {
  std::vector<int> ids;
  for (const auto& n : grid.nodes()) ids.push_back(n.id);
  return ids;
}

std::string fixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

void grid_info(const grid::GridModel& g, Diagnostics& d) {
  d.info.push_back("grid: " + std::to_string(g.num_nodes()) + " nodes, " + std::to_string(g.num_lines()) + " lines, " +
                   std::to_string(g.num_generators()) + " generators, slack node " + std::to_string(g.slack_node()));
  std::ostringstream cond;
  cond << std::setprecision(4) << g.susceptance_condition();
  d.info.push_back("reduced susceptance condition number: " + cond.str());
}

}  // namespace

Diagnostics validate_grid(const fs::path& grid_path, std::optional<int> slack_node) {
  Diagnostics d;
  try {
    grid_info(grid::load_grid(grid_path, slack_node), d);
  } catch (const Error& e) {
    d.errors.push_back(e.what());
  }
  return d;
}

Diagnostics validate(const RunConfig& config) {
  Diagnostics d;
  std::optional<grid::GridModel> grid;
  try {
    grid = grid::load_grid(config.grid, config.slack_node);
    grid_info(*grid, d);
  } catch (const Error& e) {
    d.errors.push_back(e.what());
    return d;
  }
  const std::vector<int> ids = node_ids(*grid);
  const double capacity = grid->p_max().sum();
  for (const auto& h : config.hours) {
    const std::string tag = "hour " + std::to_string(h.hour) + ": ";
    try {
      const forecast::PointForecast pf = forecast::load_forecast(h.forecast, ids);
      const double total = pf.d_hat.sum();
      if (total > capacity) {
        d.errors.push_back(tag + "net demand " + util::format_double(total) + " MW exceeds generation capacity " +
                           util::format_double(capacity) + " MW");
      }
      if (total < grid->p_min().sum()) {
        d.errors.push_back(tag + "net demand " + util::format_double(total) + " MW is below total minimum output " +
                           util::format_double(grid->p_min().sum()) + " MW");
      }
    } catch (const Error& e) {
      d.errors.push_back(e.what());
    }
    for (const auto* file : {&h.train, &h.test}) {
      if (!*file) continue;
      try {
        forecast::ScenarioSet set;
        set.errors = forecast::load_scenario_errors(**file, ids);
        if (file == &h.train) set.validate(grid->num_nodes());
        d.info.push_back(tag + (*file)->filename().string() + ": " + std::to_string(set.num_scenarios()) + " scenarios");
      } catch (const Error& e) {
        d.errors.push_back(e.what());
      }
    }
  }
  if (config.sampler) {
    try {
      evalsim::GaussianSampler s;
      s.covariance = config.sampler->covariance;
      for (int id : config.sampler->node_ids) s.nodes.push_back(grid->node_index(id));
      s.num_nodes = grid->num_nodes();
      s.base_mva = config.sampler->base_mva;
      s.validate();
    } catch (const Error& e) {
      d.errors.push_back(std::string("sampler: ") + e.what());
    }
  }
  return d;
}

RunOutcome run(const RunConfig& config, std::ostream& log) {
  check_run_config(config);
  const grid::GridModel grid = grid::load_grid(config.grid, config.slack_node);
  const std::vector<evalsim::HourInput> hours = load_hours(config, grid);
  fs::create_directories(config.output_dir);

  RunOutcome outcome;
  for (double alpha : config.alphas) {
    const evalsim::EvalConfig ecfg = eval_config(config, alpha);
    const fs::path dir =
        config.alphas.size() > 1 ? config.output_dir / ("alpha_" + util::format_double(alpha)) : config.output_dir;
    const std::string prefix = config.alphas.size() > 1 ? "alpha_" + util::format_double(alpha) + "/" : "";
    log << "alpha " << util::format_double(alpha) << ": " << hours.size() << " hour(s)\n";

    const evalsim::MultiHourReport report = evalsim::multi_hour_run(grid, hours, ecfg);

    ordered_json info = config.to_json();
    info.erase("output_dir");
    info.erase("workers");
    info["alpha"] = alpha;
    for (const auto& f : evalsim::write_artifacts(dir, report, grid, ecfg, info)) outcome.artifacts.push_back(prefix + f);

    for (const auto& h : report.hours)
      for (const auto& m : h.methods)
        if (!m.ok) {
          ++outcome.failed_methods;
          log << "  hour " << h.hour << " " << evalsim::to_string(m.method) << " failed: " << m.error << "\n";
        }
    for (const auto& a : report.aggregate) {
      log << "  " << std::left << std::setw(6) << evalsim::to_string(a.method) << "DA cost " << fixed(a.da_cost, 2)
          << " $/h, RT cost inside " << fixed(a.inside.avg_rt_cost(), 2) << " $/h, violations inside "
          << fixed(a.inside.violation_pct(), 1) << "% (" << a.inside.count << " realizations), all "
          << fixed(a.all.violation_pct(), 1) << "%\n";
    }
  }

  ordered_json manifest;
  manifest["config"] = config.to_json();
  ordered_json seeds;
  if (config.sampler) {
    seeds["train_seed"] = config.sampler->train_seed;
    seeds["test_seed"] = config.sampler->test_seed;
  }
  manifest["seeds"] = seeds;
  auto& arts = manifest["artifacts"] = ordered_json::array();
  for (const auto& a : outcome.artifacts)
    arts.push_back({{"path", a}, {"sha256", evalsim::sha256_file(config.output_dir / a)}});
  outcome.manifest = config.output_dir / "manifest.json";
  std::ofstream out(outcome.manifest, std::ios::binary);
  if (!out) throw Error("cannot write " + outcome.manifest.string());
  out << manifest.dump(2) << '\n';
  return outcome;
}

int export_scenarios(const RunConfig& config, evalsim::Method method, int hour, double alpha, const fs::path& out,
                     std::ostream& log) {
  check_run_config(config);
  const grid::GridModel grid = grid::load_grid(config.grid, config.slack_node);
  RunConfig one = config;
  one.hours.clear();
  for (const auto& h : config.hours)
    if (h.hour == hour) one.hours.push_back(h);
  if (one.hours.empty()) throw ConfigError("hour " + std::to_string(hour) + " is not configured");
  if (one.sampler) one.sampler->test_count = 0;
  one.hours[0].test.reset();
  if (!one.sampler) one.sampler = SamplerConfig{};  // unused: test set is empty
  evalsim::HourInput in = load_hours(one, grid).front();
  in.test.errors.resize(0, grid.num_nodes());

  evalsim::EvalConfig ecfg = eval_config(config, alpha);
  ecfg.methods = {method};
  const evalsim::EvaluationReport rep =
      evalsim::evaluate(grid, in.d_hat, in.train, in.test, ecfg, in.vre ? &*in.vre : nullptr);
  const evalsim::MethodResult* r = rep.find(method);
  if (!r->ok) throw InfeasibleError(std::string(evalsim::to_string(method)) + " failed: " + r->error);
  Eigen::MatrixXd errors(static_cast<Eigen::Index>(r->scenarios.size()), grid.num_nodes());
  for (std::size_t i = 0; i < r->scenarios.size(); ++i) errors.row(static_cast<Eigen::Index>(i)) = r->scenarios[i].xi.transpose();
  forecast::write_scenario_errors(out, errors, node_ids(grid));
  for (std::size_t i = 0; i < r->scenarios.size(); ++i)
    log << "scenario " << i + 1 << " (" << r->scenarios[i].tag << "): aggregate "
        << util::format_double(r->scenarios[i].aggregate()) << " MW\n";
  return static_cast<int>(r->scenarios.size());
}

void sample_to_csv(const SamplerConfig& sc, const grid::GridModel& grid, int count, std::uint64_t seed,
                   const fs::path& out) {
  evalsim::GaussianSampler s;
  s.covariance = sc.covariance;
  for (int id : sc.node_ids) s.nodes.push_back(grid.node_index(id));
  s.num_nodes = grid.num_nodes();
  s.base_mva = sc.base_mva;
  s.seed = seed;
  forecast::write_scenario_errors(out, evalsim::sample_errors(s, count), node_ids(grid));
}

}  // namespace resdeploy::cli

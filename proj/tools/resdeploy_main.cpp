#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "resdeploy/cli/commands.hpp"
#include "resdeploy/error.hpp"
#include "resdeploy/grid/grid_io.hpp"

using namespace resdeploy;
using namespace resdeploy::cli;

namespace {

evalsim::Method method_or_throw(const std::string& name) {
  const auto m = evalsim::parse_method(name);
  if (!m) throw ConfigError("unknown method '" + name + "' (expected dsw, ext, ccg or venum)");
  return *m;
}

struct Overrides {
  std::vector<double> alphas;
  std::vector<std::string> methods;
  std::optional<int> workers;
  std::optional<std::string> out;
  std::optional<int> max_scenarios;
  std::optional<int> adm_iterations;
  std::optional<double> adm_eps;
  std::optional<double> c_viol;
  std::optional<double> gap_tol;
  std::optional<std::string> init_set;
  std::optional<int> flagged_lines;
  std::optional<std::uint64_t> train_seed;
  std::optional<std::uint64_t> test_seed;
  std::optional<int> train_count;
  std::optional<int> test_count;

  void attach(CLI::App* app) {
    app->add_option("--alpha", alphas, "Confidence level(s) in (0,1)")->delimiter(',');
    app->add_option("--methods", methods, "Subset of dsw, ext, ccg, venum")->delimiter(',');
    app->add_option("--workers", workers, "Worker threads (0: all)");
    app->add_option("--out", out, "Output directory");
    app->add_option("--max-scenarios", max_scenarios, "CCG scenario cap");
    app->add_option("--adm-iterations", adm_iterations, "ADM iteration cap");
    app->add_option("--adm-eps", adm_eps, "ADM convergence tolerance");
    app->add_option("--c-viol", c_viol, "Violation penalty ($/MWh)");
    app->add_option("--gap-tol", gap_tol, "CCG relative gap tolerance");
    app->add_option("--init-set", init_set, "ADM initial points: all, extremes, lines");
    app->add_option("--flagged-lines", flagged_lines, "Congested lines used for ADM initial points");
    app->add_option("--train-seed", train_seed, "Sampler seed for training scenarios");
    app->add_option("--test-seed", test_seed, "Sampler seed for test scenarios");
    app->add_option("--train-count", train_count, "Sampled training scenarios per hour");
    app->add_option("--test-count", test_count, "Sampled test scenarios per hour");
  }

  void apply(RunConfig& c) const {
    if (!alphas.empty()) c.alphas = alphas;
    if (!methods.empty()) {
      c.methods.clear();
      for (const auto& m : methods) c.methods.push_back(method_or_throw(m));
    }
    if (workers) c.workers = *workers;
    if (out) c.output_dir = *out;
    if (max_scenarios) c.max_scenarios = *max_scenarios;
    if (adm_iterations) c.adm_iterations = *adm_iterations;
    if (adm_eps) c.adm_eps = *adm_eps;
    if (c_viol) c.c_viol = *c_viol;
    if (gap_tol) c.gap_tol = *gap_tol;
    if (init_set) {
      const auto s = evalsim::parse_init_set(*init_set);
      if (!s) throw ConfigError("unknown init set '" + *init_set + "' (expected all, extremes or lines)");
      c.init_set = *s;
    }
    if (flagged_lines) c.flagged_lines = *flagged_lines;
    if (train_seed || test_seed || train_count || test_count) {
      if (!c.sampler) throw ConfigError("sampler options given but the config has no sampler");
      if (train_seed) c.sampler->train_seed = *train_seed;
      if (test_seed) c.sampler->test_seed = *test_seed;
      if (train_count) c.sampler->train_count = *train_count;
      if (test_count) c.sampler->test_count = *test_count;
    }
  }
};

int print(const Diagnostics& d) {
  for (const auto& i : d.info) std::cout << i << '\n';
  for (const auto& e : d.errors) std::cerr << "error: " << e << '\n';
  if (!d.clean()) return kValidationFailure;
  std::cout << "ok\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reserve deployment evaluation with adaptive robust scheduling"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides ov;

  auto* validate_cmd = app.add_subcommand("validate", "Check grid, forecast and scenario files");
  std::string grid_path;
  std::optional<int> slack;
  validate_cmd->add_option("--config", config_path, "Run config (JSON)");
  validate_cmd->add_option("--grid", grid_path, "Grid JSON file or CSV directory");
  validate_cmd->add_option("--slack", slack, "Slack node override");

  auto* run_cmd = app.add_subcommand("run", "Schedule and evaluate every configured hour");
  run_cmd->add_option("--config", config_path, "Run config (JSON) or manifest")->required();
  ov.attach(run_cmd);

  auto* export_cmd = app.add_subcommand("export-scenarios", "Write the deployment scenarios of one method");
  std::string method = "ccg";
  int hour = 0;
  std::optional<double> export_alpha;
  std::string export_out;
  export_cmd->add_option("--config", config_path, "Run config (JSON)")->required();
  export_cmd->add_option("--method", method, "ext, ccg or venum");
  export_cmd->add_option("--hour", hour, "Hour to export")->required();
  export_cmd->add_option("--alpha", export_alpha, "Confidence level (default: first configured)");
  export_cmd->add_option("--out", export_out, "Output CSV")->required();

  auto* sample_cmd = app.add_subcommand("sample", "Write Gaussian forecast-error samples");
  int count = 1000;
  std::uint64_t seed = 1;
  std::string sample_out;
  sample_cmd->add_option("--config", config_path, "Run config with a sampler section")->required();
  sample_cmd->add_option("--count", count, "Number of scenarios")->check(CLI::PositiveNumber);
  sample_cmd->add_option("--seed", seed, "RNG seed");
  sample_cmd->add_option("--out", sample_out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (validate_cmd->parsed()) {
      if (!config_path.empty()) {
        RunConfig c = load_run_config(config_path);
        if (slack) c.slack_node = slack;
        return print(validate(c));
      }
      if (grid_path.empty()) throw ConfigError("validate needs --config or --grid");
      return print(validate_grid(grid_path, slack));
    }
    if (run_cmd->parsed()) {
      RunConfig c = load_run_config(config_path);
      ov.apply(c);
      const RunOutcome outcome = run(c, std::cout);
      std::cout << "wrote " << outcome.artifacts.size() << " artifacts and " << outcome.manifest.string() << '\n';
      return outcome.failed_methods > 0 ? kSolverFailure : kOk;
    }
    if (export_cmd->parsed()) {
      const RunConfig c = load_run_config(config_path);
      const double alpha = export_alpha ? *export_alpha : c.alphas.front();
      const int n = export_scenarios(c, method_or_throw(method), hour, alpha, export_out, std::cout);
      std::cout << "wrote " << n << " scenario(s) to " << export_out << '\n';
      return kOk;
    }
    if (sample_cmd->parsed()) {
      const RunConfig c = load_run_config(config_path);
      if (!c.sampler) throw ConfigError("config has no sampler section");
      const grid::GridModel grid = grid::load_grid(c.grid, c.slack_node);
      sample_to_csv(*c.sampler, grid, count, seed, sample_out);
      std::cout << "wrote " << count << " scenarios to " << sample_out << '\n';
      return kOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kValidationFailure;
  } catch (const InfeasibleError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kSolverFailure;
  } catch (const NumericalError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kSolverFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return kOk;
}

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "resdeploy/evalsim/evalsim.hpp"

namespace resdeploy::cli {

namespace fs = std::filesystem;

enum ExitCode { kOk = 0, kValidationFailure = 2, kSolverFailure = 3, kConfigError = 4 };

struct SamplerConfig {
  std::vector<int> node_ids;
  Eigen::MatrixXd covariance;  // pu^2
  double base_mva = 100.0;
  std::uint64_t train_seed = 1;
  std::uint64_t test_seed = 2;
  int train_count = 1000;
  int test_count = 1000;
};

struct HourSpec {
  int hour = 0;
  fs::path forecast;
  std::optional<fs::path> train;  // scenario CSV; sampled when absent
  std::optional<fs::path> test;
};

/// Everything one `run` needs. Relative paths are resolved against the
/// directory of the config file.
struct RunConfig {
  fs::path grid;
  std::optional<int> slack_node;
  std::vector<double> alphas{0.95};
  std::vector<evalsim::Method> methods{evalsim::Method::kDsw, evalsim::Method::kExt, evalsim::Method::kCcg};
  double c_viol = 1000.0;
  int max_scenarios = 10;
  int adm_iterations = 20;
  double adm_eps = 1e-6;
  double gap_tol = 1e-6;
  int flagged_lines = 15;
  evalsim::InitSet init_set = evalsim::InitSet::kExtremesAndLines;
  double slack_tol = 1e-6;
  forecast::QuantileMethod quantile = forecast::QuantileMethod::kLinear;
  bool curtailment = false;
  double curtailment_cost = 0.0;
  int workers = 0;  // 0: all hardware threads
  fs::path output_dir = "out";
  std::vector<HourSpec> hours;
  std::optional<SamplerConfig> sampler;

  // Canonical JSON form, loadable by parse_run_config.
  nlohmann::ordered_json to_json() const;
};

// Throws ConfigError on malformed or out-of-range fields.
RunConfig parse_run_config(const nlohmann::json& doc, const fs::path& base_dir);
// Accepts a config document or a run manifest (uses its "config" member).
RunConfig load_run_config(const fs::path& file);

// Range checks and path existence; throws ConfigError.
void check_run_config(const RunConfig& config);

evalsim::EvalConfig eval_config(const RunConfig& config, double alpha);

// Per-hour forecasts and train/test scenarios, sampling where files are absent.
std::vector<evalsim::HourInput> load_hours(const RunConfig& config, const grid::GridModel& grid);

struct Diagnostics {
  std::vector<std::string> errors;
  std::vector<std::string> info;
  bool clean() const { return errors.empty(); }
};

// Parses grid and scenario files and checks their invariants.
Diagnostics validate(const RunConfig& config);
Diagnostics validate_grid(const fs::path& grid_path, std::optional<int> slack_node = std::nullopt);

struct RunOutcome {
  std::vector<std::string> artifacts;  // relative to the output directory
  fs::path manifest;
  int failed_methods = 0;  // method-hour pairs that did not solve
};

// Evaluates every alpha and writes report.json, per_hour.csv, plotdata/ and
// manifest.json. With several alphas each gets its own alpha_<value>/ subdirectory.
RunOutcome run(const RunConfig& config, std::ostream& log);

// Deployment scenarios of one method for one hour in the scenario CSV format.
// Returns the number of scenarios written.
int export_scenarios(const RunConfig& config, evalsim::Method method, int hour, double alpha, const fs::path& out,
                     std::ostream& log);

// Writes K sampled scenarios for the sampler of `config`.
void sample_to_csv(const SamplerConfig& sampler, const grid::GridModel& grid, int count, std::uint64_t seed,
                   const fs::path& out);

}  // namespace resdeploy::cli

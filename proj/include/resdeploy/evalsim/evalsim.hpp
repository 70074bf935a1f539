#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "resdeploy/forecast/scenarios.hpp"
#include "resdeploy/forecast/uncertainty_set.hpp"
#include "resdeploy/grid/grid_model.hpp"
#include "resdeploy/robust/robust.hpp"
#include "resdeploy/scheduling/scheduling.hpp"

namespace resdeploy::evalsim {

using forecast::ScenarioSet;
using grid::GridModel;

/// Zero-mean multivariate normal errors on a subset of nodes.
struct GaussianSampler {
  Eigen::MatrixXd covariance;  // pu^2, one row/column per entry of `nodes`
  std::vector<int> nodes;      // node indices carrying the error components
  int num_nodes = 0;           // width of the sampled matrix
  double base_mva = 100.0;
  std::uint64_t seed = 1;

  // Throws ValidationError unless the covariance is square, symmetric and PSD.
  void validate() const;
};

// K x num_nodes matrix of errors in MW. Reproducible for a fixed seed.
Eigen::MatrixXd sample_errors(const GaussianSampler& sampler, int k);

ScenarioSet sample_scenarios(const GaussianSampler& sampler, int k, const Eigen::VectorXd& d_hat);

enum class Method { kDsw, kExt, kCcg, kVenum };

const char* to_string(Method method);
std::optional<Method> parse_method(const std::string& name);  // dsw | ext | ccg | venum, case-insensitive

enum class InitSet { kExtremesAndLines, kExtremesOnly, kLinesOnly };

const char* to_string(InitSet init);
std::optional<InitSet> parse_init_set(const std::string& name);  // all | extremes | lines

struct EvalConfig {
  double alpha = 0.95;
  std::vector<Method> methods{Method::kDsw, Method::kExt, Method::kCcg};
  double slack_tol = 1e-6;       // MW; any slack above it is a violation
  double membership_tol = 1e-8;  // inside/outside the uncertainty set
  forecast::QuantileMethod quantile = forecast::QuantileMethod::kLinear;
  robust::CcgConfig ccg;         // also carries c_viol, workers and scheduling options
  InitSet init_set = InitSet::kExtremesAndLines;
  int flagged_lines = 15;        // k
  double congestion_ratio = 0.99;
  bool presimulate = true;       // DSW RT pass over the training scenarios for line flagging
};

// Outcome counters over one subset of realizations.
struct Tally {
  int count = 0;
  int violations = 0;
  double rt_cost_sum = 0.0;  // $/h

  double avg_rt_cost() const { return count ? rt_cost_sum / count : 0.0; }
  double violation_pct() const { return count ? 100.0 * violations / count : 0.0; }
  Tally& operator+=(const Tally& o);
};

struct MethodResult {
  Method method = Method::kDsw;
  bool ok = false;
  std::string error;  // set when !ok
  double da_cost = 0.0;
  double objective = 0.0;  // master objective including eta
  double up_reserve = 0.0;
  double down_reserve = 0.0;
  Tally all, inside, outside;
  robust::DeploymentScenarioSet scenarios;
  std::optional<robust::CcgReport> ccg;
  scheduling::DaSchedule schedule;
  double seconds = 0.0;  // wall time, not serialized into report.json
};

struct EvaluationReport {
  int hour = 0;
  forecast::ReserveRequirement req;
  Eigen::VectorXd box_lower, box_upper;
  int train_count = 0;
  int test_count = 0;
  int inside_count = 0;
  std::vector<int> flagged_lines;  // line indices, most frequently congested first
  std::vector<std::string> warnings;
  std::vector<MethodResult> methods;  // in config order; DSW always present

  const MethodResult* find(Method m) const;
};

/// Solves every requested method on `train`, then redispatches each schedule
/// against every row of `test`. A failing method is recorded and skipped.
EvaluationReport evaluate(const GridModel& grid, const Eigen::VectorXd& d_hat, const ScenarioSet& train,
                          const ScenarioSet& test, const EvalConfig& config, const Eigen::VectorXd* vre = nullptr);

// Flagged lines for the closed-form ADM initializations.
std::vector<int> flag_congested_lines(const GridModel& grid, const scheduling::DaSchedule& dsw,
                                      const Eigen::MatrixXd& presim_errors, const EvalConfig& config);

struct HourInput {
  int hour = 0;
  Eigen::VectorXd d_hat;
  std::optional<Eigen::VectorXd> vre;
  ScenarioSet train;
  ScenarioSet test;
};

struct MethodAggregate {
  Method method = Method::kDsw;
  int hours = 0;         // hours where the method succeeded
  double da_cost = 0.0;  // realization-weighted mean, $/h
  Tally all, inside, outside;
  std::vector<int> scenario_histogram;  // CCG only: entry i = hours with i deployment scenarios
};

struct MultiHourReport {
  std::vector<EvaluationReport> hours;
  std::vector<MethodAggregate> aggregate;
};

MultiHourReport multi_hour_run(const GridModel& grid, const std::vector<HourInput>& hours, const EvalConfig& config);

// Weighted fold of per-hour results (also used by the recomputation tests).
std::vector<MethodAggregate> aggregate(const std::vector<EvaluationReport>& hours, const EvalConfig& config);

// ---- artifacts -------------------------------------------------------------

nlohmann::ordered_json to_json(const EvaluationReport& report, const GridModel& grid);
nlohmann::ordered_json to_json(const MultiHourReport& report, const GridModel& grid, const EvalConfig& config);

// report.json, per_hour.csv and plotdata/*.csv under `dir`; returns the
// relative paths written, in a fixed order.
std::vector<std::string> write_artifacts(const std::filesystem::path& dir, const MultiHourReport& report,
                                         const GridModel& grid, const EvalConfig& config,
                                         const nlohmann::ordered_json& run_info);

// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& file);

}  // namespace resdeploy::evalsim

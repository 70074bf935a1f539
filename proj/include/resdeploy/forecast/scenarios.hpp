#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace resdeploy::forecast {

/// K forecast-error scenarios over the grid's nodes plus the point forecasts
/// they are measured against. Errors are actual minus forecast, in MW.
struct ScenarioSet {
  Eigen::MatrixXd errors;              // K x N
  Eigen::VectorXd d_hat;               // nodal net demand forecast, N
  std::optional<Eigen::VectorXd> vre;  // nodal VRE forecast, N (curtailment only)

  int num_scenarios() const { return static_cast<int>(errors.rows()); }
  int num_nodes() const { return static_cast<int>(errors.cols()); }

  // Aggregate error 1'xi per scenario.
  Eigen::VectorXd aggregates() const { return errors.rowwise().sum(); }

  // Throws ValidationError: fewer than 2 scenarios, NaN/inf entries, or a
  // node dimension different from `num_nodes`.
  void validate(int num_nodes) const;
};

enum class QuantileMethod {
  kLinear,       // linear interpolation between order statistics (type 7)
  kNearestRank,  // smallest order statistic with at least ceil(u K) samples at or below it
};

// Empirical u-quantile. Throws ValidationError on empty input or u outside [0,1].
double empirical_quantile(std::span<const double> samples, double u, QuantileMethod method = QuantileMethod::kLinear);
double empirical_quantile(const Eigen::VectorXd& samples, double u, QuantileMethod method = QuantileMethod::kLinear);

struct ReserveRequirement {
  double rho_plus = 0.0;   // MW
  double rho_minus = 0.0;  // MW, typically negative
  double alpha = 0.0;
};

// The (1+alpha)/2 and (1-alpha)/2 quantiles of the aggregate errors.
ReserveRequirement reserve_requirements(const ScenarioSet& scenarios, double alpha,
                                        QuantileMethod method = QuantileMethod::kLinear);

// Per-node u-quantile of the errors (one value per column).
Eigen::VectorXd nodal_quantiles(const ScenarioSet& scenarios, double u,
                                QuantileMethod method = QuantileMethod::kLinear);

// ---- file formats ----------------------------------------------------------

// Reads `scenario_id,node_id,error_mw` rows into a K x N matrix ordered by
// first appearance of each scenario id. Nodes absent from a scenario get 0.
// Unknown node ids and repeated (scenario, node) pairs are errors.
Eigen::MatrixXd load_scenario_errors(const std::filesystem::path& file, const std::vector<int>& node_ids);

// Writes one row per (scenario, node); scenario ids are `first_id`, `first_id`+1, ...
void write_scenario_errors(const std::filesystem::path& file, const Eigen::MatrixXd& errors,
                           const std::vector<int>& node_ids, int first_id = 1);

struct PointForecast {
  Eigen::VectorXd d_hat;
  std::optional<Eigen::VectorXd> vre;
};

// Reads `node_id,net_demand_mw[,vre_mw]`. Nodes not listed get 0.
PointForecast load_forecast(const std::filesystem::path& file, const std::vector<int>& node_ids);
void write_forecast(const std::filesystem::path& file, const PointForecast& forecast,
                    const std::vector<int>& node_ids);

}  // namespace resdeploy::forecast

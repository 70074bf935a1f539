#pragma once

#include <Eigen/Dense>

#include "resdeploy/forecast/scenarios.hpp"

namespace resdeploy::forecast {

struct LinearMaximum {
  Eigen::VectorXd xi;
  double value = 0.0;
};

/// Polyhedral set of nodal errors: the box [lower, upper] intersected with
/// the slab rho_minus <= 1'xi <= rho_plus.
class UncertaintySet {
 public:
  UncertaintySet() = default;
  // Throws ValidationError if the bounds are inconsistent or the set is empty.
  UncertaintySet(Eigen::VectorXd lower, Eigen::VectorXd upper, double rho_minus, double rho_plus);

  // Box from the per-node scenario minima and maxima, slab from `req`.
  static UncertaintySet build(const ScenarioSet& scenarios, const ReserveRequirement& req);

  int dim() const { return static_cast<int>(lower_.size()); }
  const Eigen::VectorXd& lower() const { return lower_; }
  const Eigen::VectorXd& upper() const { return upper_; }
  double rho_minus() const { return rho_minus_; }
  double rho_plus() const { return rho_plus_; }

  bool contains(const Eigen::VectorXd& xi, double tol = 1e-8) const;

  // Euclidean projection. Points already inside are returned unchanged.
  Eigen::VectorXd project(const Eigen::VectorXd& xi) const;

  // max w'xi over the set, by a fractional knapsack on the slab. Coordinates
  // with w_n = 0 start at the upper bound; adjustments go in increasing |w_n|,
  // ties by node index.
  LinearMaximum maximize_linear(const Eigen::VectorXd& w) const;

 private:
  Eigen::VectorXd lower_;
  Eigen::VectorXd upper_;
  double rho_minus_ = 0.0;
  double rho_plus_ = 0.0;
};

}  // namespace resdeploy::forecast

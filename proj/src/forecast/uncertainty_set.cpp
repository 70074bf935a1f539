#include "resdeploy/forecast/uncertainty_set.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "resdeploy/error.hpp"

namespace resdeploy::forecast {

UncertaintySet::UncertaintySet(Eigen::VectorXd lower, Eigen::VectorXd upper, double rho_minus, double rho_plus)
    : lower_(std::move(lower)), upper_(std::move(upper)), rho_minus_(rho_minus), rho_plus_(rho_plus) {
  if (lower_.size() != upper_.size()) throw ValidationError("uncertainty box bounds differ in dimension");
  if (!lower_.allFinite() || !upper_.allFinite() || !std::isfinite(rho_minus_) || !std::isfinite(rho_plus_)) {
    throw ValidationError("uncertainty set bounds must be finite");
  }
  for (int n = 0; n < dim(); ++n) {
    if (lower_[n] > upper_[n]) throw ValidationError("uncertainty box has lower > upper at index " + std::to_string(n));
  }
  const double lo = std::max(rho_minus_, lower_.sum());
  const double hi = std::min(rho_plus_, upper_.sum());
  if (lo > hi + 1e-9 * std::max(1.0, std::abs(hi))) {
    std::ostringstream os;
    os << "uncertainty set is empty: aggregate range [" << lower_.sum() << ", " << upper_.sum()
       << "] does not meet reserve slab [" << rho_minus_ << ", " << rho_plus_ << "]";
    throw ValidationError(os.str());
  }
}

UncertaintySet UncertaintySet::build(const ScenarioSet& scenarios, const ReserveRequirement& req) {
  if (scenarios.num_scenarios() == 0) throw ValidationError("uncertainty set from an empty scenario set");
  return UncertaintySet(scenarios.errors.colwise().minCoeff().transpose(),
                        scenarios.errors.colwise().maxCoeff().transpose(), req.rho_minus, req.rho_plus);
}

bool UncertaintySet::contains(const Eigen::VectorXd& xi, double tol) const {
  if (xi.size() != dim()) throw ValidationError("membership test dimension mismatch");
  for (int n = 0; n < dim(); ++n)
    if (xi[n] < lower_[n] - tol || xi[n] > upper_[n] + tol) return false;
  const double s = xi.sum();
  return s >= rho_minus_ - tol && s <= rho_plus_ + tol;
}

Eigen::VectorXd UncertaintySet::project(const Eigen::VectorXd& xi) const {
  if (xi.size() != dim()) throw ValidationError("projection dimension mismatch");
  const Eigen::VectorXd clipped = xi.cwiseMax(lower_).cwiseMin(upper_);
  const double s = clipped.sum();
  const double slack = 1e-12 * std::max(1.0, std::abs(s));
  if (s >= rho_minus_ - slack && s <= rho_plus_ + slack) return clipped;
  const double target = s > rho_plus_ ? rho_plus_ : rho_minus_;

  // g(t) = sum clip(xi - t, lower, upper) is nonincreasing and linear between
  // the breakpoints xi - upper and xi - lower.
  auto g = [&](double t) { return (xi.array() - t).max(lower_.array()).min(upper_.array()).sum(); };
  std::vector<double> bp;
  bp.reserve(2 * static_cast<std::size_t>(dim()));
  for (int n = 0; n < dim(); ++n) {
    bp.push_back(xi[n] - upper_[n]);
    bp.push_back(xi[n] - lower_[n]);
  }
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
  // First breakpoint where g has dropped to the target or below.
  std::size_t k = 0;
  std::vector<double> gv(bp.size());
  for (std::size_t i = 0; i < bp.size(); ++i) gv[i] = g(bp[i]);
  while (k < bp.size() && gv[k] > target) ++k;
  double t;
  if (k == 0) {
    t = bp.front();
  } else if (k == bp.size()) {
    t = bp.back();
  } else {
    const double g1 = gv[k - 1], g2 = gv[k];
    t = g1 == g2 ? bp[k - 1] : bp[k - 1] + (g1 - target) * (bp[k] - bp[k - 1]) / (g1 - g2);
  }
  return (xi.array() - t).max(lower_.array()).min(upper_.array()).matrix();
}

LinearMaximum UncertaintySet::maximize_linear(const Eigen::VectorXd& w) const {
  if (w.size() != dim()) throw ValidationError("objective dimension mismatch");
  Eigen::VectorXd xi(dim());
  for (int n = 0; n < dim(); ++n) xi[n] = w[n] >= 0.0 ? upper_[n] : lower_[n];
  double s = xi.sum();
  std::vector<int> order(dim());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return std::abs(w[a]) < std::abs(w[b]); });
  if (s > rho_plus_) {
    double excess = s - rho_plus_;
    for (int n : order) {
      if (excess <= 0.0) break;
      const double room = xi[n] - lower_[n];
      const double step = std::min(room, excess);
      xi[n] -= step;
      excess -= step;
    }
  } else if (s < rho_minus_) {
    double deficit = rho_minus_ - s;
    for (int n : order) {
      if (deficit <= 0.0) break;
      const double room = upper_[n] - xi[n];
      const double step = std::min(room, deficit);
      xi[n] += step;
      deficit -= step;
    }
  }
  return {xi, w.dot(xi)};
}

}  // namespace resdeploy::forecast

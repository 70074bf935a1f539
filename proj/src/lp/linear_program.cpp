#include "resdeploy/lp/linear_program.hpp"

#include <cmath>
#include <sstream>

#include "resdeploy/error.hpp"

namespace resdeploy::lp {

int LinearProgram::add_variable(double lower, double upper, double cost, std::string name) {
  cost_.push_back(cost);
  lower_.push_back(lower);
  upper_.push_back(upper);
  if (name.empty()) name = "x" + std::to_string(cost_.size() - 1);
  names_.push_back(std::move(name));
  return static_cast<int>(cost_.size()) - 1;
}

int LinearProgram::add_row(std::vector<Term> terms, Relation relation, double rhs,
                           std::string name) {
  if (name.empty()) name = "r" + std::to_string(rows_.size());
  rows_.push_back(Row{std::move(terms), relation, rhs, std::move(name)});
  return static_cast<int>(rows_.size()) - 1;
}

void LinearProgram::set_bounds(int col, double lower, double upper) {
  lower_.at(col) = lower;
  upper_.at(col) = upper;
}

void LinearProgram::validate() const {
  const int n = num_variables();
  for (int j = 0; j < n; ++j) {
    if (std::isnan(cost_[j]) || std::isinf(cost_[j])) {
      throw ValidationError("LP variable '" + names_[j] + "' has a non-finite cost");
    }
    if (std::isnan(lower_[j]) || std::isnan(upper_[j])) {
      throw ValidationError("LP variable '" + names_[j] + "' has a NaN bound");
    }
    if (lower_[j] > upper_[j]) {
      std::ostringstream os;
      os << "LP variable '" << names_[j] << "' has lower bound " << lower_[j]
         << " above upper bound " << upper_[j];
      throw ValidationError(os.str());
    }
    if (lower_[j] == kInf || upper_[j] == -kInf) {
      throw ValidationError("LP variable '" + names_[j] + "' has an empty infinite bound");
    }
  }
  for (const Row& row : rows_) {
    if (!std::isfinite(row.rhs)) {
      throw ValidationError("LP row '" + row.name + "' has a non-finite right-hand side");
    }
    for (const Term& t : row.terms) {
      if (t.col < 0 || t.col >= n) {
        throw ValidationError("LP row '" + row.name + "' references column " +
                              std::to_string(t.col) + " out of range");
      }
      if (!std::isfinite(t.coef)) {
        throw ValidationError("LP row '" + row.name + "' has a non-finite coefficient");
      }
    }
  }
}

std::vector<double> LinearProgram::row_activity(std::span<const double> x) const {
  std::vector<double> act(rows_.size(), 0.0);
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    double s = 0.0;
    for (const Term& t : rows_[i].terms) s += t.coef * x[t.col];
    act[i] = s;
  }
  return act;
}

const char* to_string(Status status) {
  switch (status) {
    case Status::kOptimal: return "Optimal";
    case Status::kInfeasible: return "Infeasible";
    case Status::kUnbounded: return "Unbounded";
    case Status::kIterationLimit: return "IterLimit";
  }
  return "?";
}

double dual_objective(const LinearProgram& lp, const LpSolution& solution) {
  const double sign = lp.sense() == Sense::kMinimize ? 1.0 : -1.0;
  double value = 0.0;
  for (int i = 0; i < lp.num_rows(); ++i) value += sign * solution.duals.at(i) * lp.row(i).rhs;
  for (int j = 0; j < lp.num_variables(); ++j) {
    double z = sign * solution.reduced_costs.at(j);
    if (std::abs(z) <= 1e-9) z = 0.0;
    if (z > 0.0) {
      if (!std::isfinite(lp.lower()[j])) return -sign * kInf;
      value += z * lp.lower()[j];
    } else if (z < 0.0) {
      if (!std::isfinite(lp.upper()[j])) return -sign * kInf;
      value += z * lp.upper()[j];
    }
  }
  return sign * value;
}

}  // namespace resdeploy::lp

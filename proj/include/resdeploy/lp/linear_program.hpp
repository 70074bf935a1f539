#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace resdeploy::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { kMinimize, kMaximize };
enum class Relation { kLessEqual, kEqual, kGreaterEqual };

struct Term {
  int col = 0;
  double coef = 0.0;
};

struct Row {
  std::vector<Term> terms;
  Relation relation = Relation::kLessEqual;
  double rhs = 0.0;
  std::string name;
};

/// A linear program in row form:
///   min/max  c'x   s.t.  a_i'x (<=|=|>=) b_i,   lower <= x <= upper.
/// Bounds may be infinite. Duplicate column entries within a row are summed.
class LinearProgram {
 public:
  explicit LinearProgram(Sense sense = Sense::kMinimize) : sense_(sense) {}

  int add_variable(double lower, double upper, double cost, std::string name = {});
  int add_row(std::vector<Term> terms, Relation relation, double rhs, std::string name = {});

  // Appends a coefficient to an existing row.
  void add_term(int row, Term term) { rows_.at(row).terms.push_back(term); }
  void set_rhs(int row, double rhs) { rows_.at(row).rhs = rhs; }
  void set_cost(int col, double cost) { cost_.at(col) = cost; }
  void set_bounds(int col, double lower, double upper);
  void set_sense(Sense sense) { sense_ = sense; }

  Sense sense() const { return sense_; }
  int num_variables() const { return static_cast<int>(cost_.size()); }
  int num_rows() const { return static_cast<int>(rows_.size()); }

  std::span<const double> cost() const { return cost_; }
  std::span<const double> lower() const { return lower_; }
  std::span<const double> upper() const { return upper_; }
  const std::vector<Row>& rows() const { return rows_; }
  const Row& row(int i) const { return rows_.at(i); }
  const std::string& variable_name(int col) const { return names_.at(col); }

  // Throws ValidationError naming the first broken invariant
  // (NaN entries, lower > upper, column index out of range).
  void validate() const;

  // Row activities a_i'x for a given primal point.
  std::vector<double> row_activity(std::span<const double> x) const;

 private:
  Sense sense_;
  std::vector<double> cost_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<std::string> names_;
  std::vector<Row> rows_;
};

enum class Status { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

const char* to_string(Status status);

enum class VarStatus : std::uint8_t { kBasic, kAtLower, kAtUpper, kFree, kFixed };

/// Simplex basis over structural columns and row logicals.
/// Usable as a warm start for a problem that extends the original by
/// appending columns (nonbasic) or rows (logical basic).
struct Basis {
  std::vector<VarStatus> columns;
  std::vector<VarStatus> rows;

  bool empty() const { return columns.empty() && rows.empty(); }
};

enum class PricingRule {
  kBland,                  // lowest eligible index; guaranteed finite
  kDantzigWithBlandGuard,  // largest |reduced cost|; Bland after a degenerate streak
};

struct SolverOptions {
  double feas_tol = 1e-8;
  double opt_tol = 1e-8;
  double pivot_tol = 1e-9;
  int max_iterations = 0;       // 0: 50 * (rows + cols) + 1000
  int refactor_interval = 0;    // 0: max(64, rows)
  int degenerate_streak = 50;   // used by kDantzigWithBlandGuard
  PricingRule pricing = PricingRule::kDantzigWithBlandGuard;
  bool want_duals = false;
};

struct LpSolution {
  Status status = Status::kIterationLimit;
  std::vector<double> primal;
  double objective = 0.0;
  // One multiplier per row: d(objective)/d(rhs_i), in the problem's own sense.
  std::vector<double> duals;
  // Reduced costs per structural column, same sign convention as duals.
  std::vector<double> reduced_costs;
  Basis basis;
  int iterations = 0;

  bool optimal() const { return status == Status::kOptimal; }
};

// Dense bounded-variable revised simplex. Infeasible/unbounded problems are
// reported through `status`; a basis that cannot be refactored throws
// NumericalError. Safe to call concurrently on distinct programs.
LpSolution solve_lp(const LinearProgram& lp, const SolverOptions& options = {},
                    const Basis* warm_start = nullptr);

// Same as solve_lp with duals and reduced costs always populated.
LpSolution solve_lp_dual_values(const LinearProgram& lp, SolverOptions options = {},
                                const Basis* warm_start = nullptr);

// b'y + sum_j (z_j^+ l_j - z_j^- u_j) for a minimization, i.e. the Lagrangian
// dual value of the multipliers stored in `solution`. Mirrored for maximize.
double dual_objective(const LinearProgram& lp, const LpSolution& solution);

}  // namespace resdeploy::lp

// Dense bounded-variable revised simplex.
//
// Internally every row i gets a logical r_i with A x - r = 0 and the row
// relation turned into bounds on r_i. The basis inverse is kept explicitly
// and updated by rank-one pivots; it is rebuilt from an LU factorization
// every `refactor_interval` pivots. Phase 1 minimizes the sum of bound
// infeasibilities of the basic variables (composite costs recomputed every
// pivot); phase 2 minimizes the real cost.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "resdeploy/error.hpp"
#include "resdeploy/lp/linear_program.hpp"

namespace resdeploy::lp {
namespace {

class Simplex {
 public:
  Simplex(const LinearProgram& lp, const SolverOptions& opt) : lp_(lp), opt_(opt) {
    n_ = lp.num_variables();
    m_ = lp.num_rows();
    total_ = n_ + m_;
    build_columns();
    build_bounds_and_costs();
    max_iter_ = opt.max_iterations > 0 ? opt.max_iterations : 50 * (m_ + n_) + 1000;
    refactor_every_ = opt.refactor_interval > 0 ? opt.refactor_interval : std::max(64, m_);
  }

  LpSolution run(const Basis* warm) {
    if (!(warm && try_warm_start(*warm))) cold_start();
    LpSolution sol;
    sol.status = iterate();
    sol.iterations = iterations_;
    extract(sol);
    return sol;
  }

 private:
  // ---- problem data -------------------------------------------------------
  void build_columns() {
    std::vector<std::vector<std::pair<int, double>>> cols(n_);
    for (int i = 0; i < m_; ++i) {
      for (const Term& t : lp_.row(i).terms) {
        if (t.coef == 0.0) continue;
        auto& c = cols[t.col];
        auto it = std::find_if(c.begin(), c.end(), [&](auto& e) { return e.first == i; });
        if (it != c.end()) it->second += t.coef;
        else c.emplace_back(i, t.coef);
      }
    }
    col_start_.assign(n_ + 1, 0);
    for (int j = 0; j < n_; ++j) {
      std::sort(cols[j].begin(), cols[j].end());
      col_start_[j + 1] = col_start_[j] + static_cast<int>(cols[j].size());
    }
    row_idx_.reserve(col_start_[n_]);
    val_.reserve(col_start_[n_]);
    for (int j = 0; j < n_; ++j) {
      for (auto& [r, v] : cols[j]) {
        row_idx_.push_back(r);
        val_.push_back(v);
      }
    }
  }

  void build_bounds_and_costs() {
    lo_.resize(total_);
    hi_.resize(total_);
    cost_.assign(total_, 0.0);
    sign_ = lp_.sense() == Sense::kMinimize ? 1.0 : -1.0;
    for (int j = 0; j < n_; ++j) {
      lo_[j] = lp_.lower()[j];
      hi_[j] = lp_.upper()[j];
      cost_[j] = sign_ * lp_.cost()[j];
    }
    for (int i = 0; i < m_; ++i) {
      const Row& row = lp_.row(i);
      const int v = n_ + i;
      switch (row.relation) {
        case Relation::kLessEqual: lo_[v] = -kInf; hi_[v] = row.rhs; break;
        case Relation::kGreaterEqual: lo_[v] = row.rhs; hi_[v] = kInf; break;
        case Relation::kEqual: lo_[v] = row.rhs; hi_[v] = row.rhs; break;
      }
    }
  }

  double dot_column(const Eigen::VectorXd& y, int j) const {
    if (j >= n_) return -y[j - n_];
    double s = 0.0;
    for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) s += val_[k] * y[row_idx_[k]];
    return s;
  }

  // alpha = B^-1 a_j
  void ftran(int j, Eigen::VectorXd& alpha) const {
    if (j >= n_) {
      alpha = -binv_.col(j - n_);
      return;
    }
    alpha.setZero(m_);
    for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) alpha += val_[k] * binv_.col(row_idx_[k]);
  }

  // ---- basis management ---------------------------------------------------
  VarStatus nonbasic_default(int j) const {
    if (lo_[j] == hi_[j]) return VarStatus::kFixed;
    if (std::isfinite(lo_[j])) return VarStatus::kAtLower;
    if (std::isfinite(hi_[j])) return VarStatus::kAtUpper;
    return VarStatus::kFree;
  }

  void place_nonbasic(int j) {
    switch (status_[j]) {
      case VarStatus::kAtLower:
      case VarStatus::kFixed: x_[j] = lo_[j]; break;
      case VarStatus::kAtUpper: x_[j] = hi_[j]; break;
      case VarStatus::kFree: x_[j] = 0.0; break;
      case VarStatus::kBasic: break;
    }
  }

  void cold_start() {
    status_.assign(total_, VarStatus::kBasic);
    x_.assign(total_, 0.0);
    head_.resize(m_);
    pos_.assign(total_, -1);
    for (int j = 0; j < n_; ++j) {
      status_[j] = nonbasic_default(j);
      place_nonbasic(j);
    }
    for (int i = 0; i < m_; ++i) {
      head_[i] = n_ + i;
      pos_[n_ + i] = i;
    }
    binv_ = -Eigen::MatrixXd::Identity(m_, m_);
    since_refactor_ = 0;
    compute_basic_values();
  }

  bool try_warm_start(const Basis& warm) {
    if (static_cast<int>(warm.columns.size()) > n_ || static_cast<int>(warm.rows.size()) > m_) return false;
    status_.assign(total_, VarStatus::kBasic);
    x_.assign(total_, 0.0);
    pos_.assign(total_, -1);
    head_.clear();
    for (int j = 0; j < total_; ++j) {
      VarStatus s;
      if (j < n_) s = j < static_cast<int>(warm.columns.size()) ? warm.columns[j] : nonbasic_default(j);
      else s = (j - n_) < static_cast<int>(warm.rows.size()) ? warm.rows[j - n_] : VarStatus::kBasic;
      if (s != VarStatus::kBasic) {
        // Re-derive the nonbasic position from the current bounds.
        if (s == VarStatus::kAtLower && !std::isfinite(lo_[j])) s = nonbasic_default(j);
        if (s == VarStatus::kAtUpper && !std::isfinite(hi_[j])) s = nonbasic_default(j);
        if (s == VarStatus::kFixed && lo_[j] != hi_[j]) s = nonbasic_default(j);
        if (s == VarStatus::kFree && (std::isfinite(lo_[j]) || std::isfinite(hi_[j]))) s = nonbasic_default(j);
        if (lo_[j] == hi_[j]) s = VarStatus::kFixed;
      } else {
        pos_[j] = static_cast<int>(head_.size());
        head_.push_back(j);
      }
      status_[j] = s;
      place_nonbasic(j);
    }
    if (static_cast<int>(head_.size()) != m_) return false;
    if (!refactor(false)) return false;
    compute_basic_values();
    return true;
  }

  // Rebuilds B^-1 from scratch. Returns false (or throws when `strict`) if the
  // basis is numerically singular.
  bool refactor(bool strict = true) {
    since_refactor_ = 0;
    if (m_ == 0) return true;
    Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(m_, m_);
    for (int k = 0; k < m_; ++k) {
      const int j = head_[k];
      if (j >= n_) {
        basis(j - n_, k) = -1.0;
      } else {
        for (int e = col_start_[j]; e < col_start_[j + 1]; ++e) basis(row_idx_[e], k) = val_[e];
      }
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis);
    const auto& packed = lu.matrixLU();
    double max_piv = 0.0;
    for (int k = 0; k < m_; ++k) max_piv = std::max(max_piv, std::abs(packed(k, k)));
    for (int k = 0; k < m_; ++k) {
      if (!(std::abs(packed(k, k)) > 1e-11 * std::max(1.0, max_piv))) {
        if (!strict) return false;
        const int j = head_[k];
        std::ostringstream os;
        os << "singular simplex basis at position " << k << ": column ";
        if (j < n_) os << "'" << lp_.variable_name(j) << "'";
        else os << "logical of row '" << lp_.row(j - n_).name << "'";
        throw NumericalError(os.str());
      }
    }
    binv_ = lu.inverse();
    return true;
  }

  void compute_basic_values() {
    if (m_ == 0) return;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m_);
    for (int j = 0; j < total_; ++j) {
      if (status_[j] == VarStatus::kBasic || x_[j] == 0.0) continue;
      if (j >= n_) {
        rhs[j - n_] += x_[j];
      } else {
        for (int e = col_start_[j]; e < col_start_[j + 1]; ++e) rhs[row_idx_[e]] -= val_[e] * x_[j];
      }
    }
    const Eigen::VectorXd xb = binv_ * rhs;
    for (int k = 0; k < m_; ++k) x_[head_[k]] = xb[k];
  }

  // ---- iterations ----------------------------------------------------------
  double infeasibility(int j) const {
    if (x_[j] < lo_[j] - opt_.feas_tol) return lo_[j] - x_[j];
    if (x_[j] > hi_[j] + opt_.feas_tol) return x_[j] - hi_[j];
    return 0.0;
  }

  bool primal_infeasible() const {
    for (int k = 0; k < m_; ++k)
      if (infeasibility(head_[k]) > 0.0) return true;
    return false;
  }

  void compute_duals(bool phase1, Eigen::VectorXd& y) const {
    Eigen::VectorXd cb(m_);
    for (int k = 0; k < m_; ++k) {
      const int j = head_[k];
      if (phase1) {
        cb[k] = x_[j] < lo_[j] - opt_.feas_tol ? -1.0 : (x_[j] > hi_[j] + opt_.feas_tol ? 1.0 : 0.0);
      } else {
        cb[k] = cost_[j];
      }
    }
    y = binv_.transpose() * cb;
  }

  Status iterate() {
    Eigen::VectorXd y(m_), alpha(m_);
    int degenerate_run = 0;
    bool fresh = true;  // basis values freshly recomputed from a factorization
    while (true) {
      if (iterations_ >= max_iter_) return Status::kIterationLimit;
      if (since_refactor_ >= refactor_every_) {
        refactor();
        compute_basic_values();
        fresh = true;
      }
      const bool phase1 = primal_infeasible();
      compute_duals(phase1, y);

      const bool bland = opt_.pricing == PricingRule::kBland || degenerate_run >= opt_.degenerate_streak;
      int enter = -1;
      double enter_d = 0.0, best = 0.0;
      for (int j = 0; j < total_; ++j) {
        const VarStatus s = status_[j];
        if (s == VarStatus::kBasic || s == VarStatus::kFixed) continue;
        const double d = (phase1 ? 0.0 : cost_[j]) - dot_column(y, j);
        bool eligible = false;
        if (s == VarStatus::kAtLower) eligible = d < -opt_.opt_tol;
        else if (s == VarStatus::kAtUpper) eligible = d > opt_.opt_tol;
        else eligible = std::abs(d) > opt_.opt_tol;
        if (!eligible) continue;
        if (bland) {
          enter = j;
          enter_d = d;
          break;
        }
        if (std::abs(d) > best) {
          best = std::abs(d);
          enter = j;
          enter_d = d;
        }
      }

      if (enter < 0) {
        if (!fresh) {
          // Confirm the verdict on a clean factorization.
          refactor();
          compute_basic_values();
          fresh = true;
          continue;
        }
        return phase1 ? Status::kInfeasible : Status::kOptimal;
      }

      ftran(enter, alpha);
      const double dir = enter_d < 0.0 ? 1.0 : -1.0;

      // Ratio test: first the minimum step, then the tie-break among steps
      // within tie_tol of it.
      double theta = kInf;
      const double flip = (std::isfinite(lo_[enter]) && std::isfinite(hi_[enter])) ? hi_[enter] - lo_[enter] : kInf;
      cand_.clear();
      for (int k = 0; k < m_; ++k) {
        const double a = alpha[k];
        if (std::abs(a) < opt_.pivot_tol) continue;
        const int v = head_[k];
        const double rate = -dir * a;
        const double xv = x_[v];
        double bound;
        if (rate < 0.0) {
          if (phase1 && xv > hi_[v] + opt_.feas_tol) bound = hi_[v];
          else if (xv >= lo_[v] - opt_.feas_tol && std::isfinite(lo_[v])) bound = lo_[v];
          else continue;
          cand_.push_back({k, std::max(0.0, (xv - bound) / (-rate)), bound});
        } else {
          if (phase1 && xv < lo_[v] - opt_.feas_tol) bound = lo_[v];
          else if (xv <= hi_[v] + opt_.feas_tol && std::isfinite(hi_[v])) bound = hi_[v];
          else continue;
          cand_.push_back({k, std::max(0.0, (bound - xv) / rate), bound});
        }
        theta = std::min(theta, cand_.back().step);
      }

      int leave = -1;
      double leave_bound = 0.0;
      if (std::isfinite(flip) && flip <= theta) {
        theta = flip;
      } else if (std::isfinite(theta)) {
        const double tie_tol = 1e-12 * std::max(1.0, theta);
        double best_piv = -1.0;
        int best_var = total_;
        const Candidate* chosen = nullptr;
        for (const Candidate& c : cand_) {
          if (c.step > theta + tie_tol) continue;
          if (bland) {
            if (head_[c.pos] < best_var) {
              best_var = head_[c.pos];
              chosen = &c;
            }
          } else if (std::abs(alpha[c.pos]) > best_piv) {
            best_piv = std::abs(alpha[c.pos]);
            chosen = &c;
          }
        }
        leave = chosen->pos;
        leave_bound = chosen->bound;
        theta = chosen->step;
      } else {
        if (!phase1) return Status::kUnbounded;
        if (!fresh) {
          refactor();
          compute_basic_values();
          fresh = true;
          continue;
        }
        throw NumericalError("phase-1 ratio test found no blocking variable for column '" +
                             column_name(enter) + "'");
      }

      // Apply the step.
      if (theta > 0.0) {
        x_[enter] += dir * theta;
        for (int k = 0; k < m_; ++k) x_[head_[k]] -= dir * theta * alpha[k];
      }
      degenerate_run = theta <= 1e-12 ? degenerate_run + 1 : 0;
      ++iterations_;
      fresh = false;

      if (leave < 0) {
        status_[enter] = dir > 0.0 ? VarStatus::kAtUpper : VarStatus::kAtLower;
        place_nonbasic(enter);
        continue;
      }

      const int out = head_[leave];
      if (lo_[out] == hi_[out]) status_[out] = VarStatus::kFixed;
      else status_[out] = leave_bound == lo_[out] ? VarStatus::kAtLower : VarStatus::kAtUpper;
      place_nonbasic(out);
      pos_[out] = -1;
      head_[leave] = enter;
      pos_[enter] = leave;
      status_[enter] = VarStatus::kBasic;

      // Rank-one update of B^-1 with pivot alpha[leave].
      const double piv = alpha[leave];
      Eigen::RowVectorXd prow = binv_.row(leave) / piv;
      alpha[leave] = 0.0;
      binv_.noalias() -= alpha * prow;
      binv_.row(leave) = prow;
      ++since_refactor_;
    }
  }

  std::string column_name(int j) const {
    return j < n_ ? lp_.variable_name(j) : "logical(" + lp_.row(j - n_).name + ")";
  }

  void extract(LpSolution& sol) {
    sol.primal.assign(x_.begin(), x_.begin() + n_);
    double obj = 0.0;
    for (int j = 0; j < n_; ++j) obj += lp_.cost()[j] * x_[j];
    sol.objective = obj;
    sol.basis.columns.assign(status_.begin(), status_.begin() + n_);
    sol.basis.rows.assign(status_.begin() + n_, status_.end());
    if (opt_.want_duals && sol.status == Status::kOptimal) {
      Eigen::VectorXd y(m_);
      compute_duals(false, y);
      sol.duals.resize(m_);
      for (int i = 0; i < m_; ++i) sol.duals[i] = sign_ * y[i];
      sol.reduced_costs.resize(n_);
      for (int j = 0; j < n_; ++j) sol.reduced_costs[j] = sign_ * (cost_[j] - dot_column(y, j));
    }
  }

  const LinearProgram& lp_;
  const SolverOptions& opt_;
  int n_ = 0, m_ = 0, total_ = 0;
  std::vector<int> col_start_, row_idx_;
  std::vector<double> val_;
  std::vector<double> lo_, hi_, cost_;
  double sign_ = 1.0;

  std::vector<VarStatus> status_;
  std::vector<double> x_;
  std::vector<int> head_, pos_;
  Eigen::MatrixXd binv_;

  struct Candidate {
    int pos;
    double step;
    double bound;
  };
  std::vector<Candidate> cand_;

  int iterations_ = 0;
  int since_refactor_ = 0;
  int max_iter_ = 0;
  int refactor_every_ = 0;
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, const SolverOptions& options, const Basis* warm_start) {
  lp.validate();
  Simplex simplex(lp, options);
  return simplex.run(warm_start);
}

LpSolution solve_lp_dual_values(const LinearProgram& lp, SolverOptions options, const Basis* warm_start) {
  options.want_duals = true;
  return solve_lp(lp, options, warm_start);
}

}  // namespace resdeploy::lp

#include "onionlabel/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "onionlabel/errors.hpp"

namespace onionlabel::lp {

namespace {

using Tableau = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Tableau layout: rows [0, r) are constraints, row r is the reduced-cost row.
// Columns [0, v) are structural, [v, v + r) artificial, the last is the rhs.
// The rhs entry of the cost row holds minus the current objective value.
class Simplex {
 public:
  Simplex(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Options& options)
      : rows_(A.rows()), vars_(A.cols()), rhs_(A.cols() + A.rows()), options_(options) {
    table_ = Tableau::Zero(rows_ + 1, vars_ + rows_ + 1);
    basis_.resize(static_cast<std::size_t>(rows_));
    for (Eigen::Index i = 0; i < rows_; ++i) {
      const double sign = b(i) < 0.0 ? -1.0 : 1.0;
      table_.row(i).head(vars_) = sign * A.row(i);
      table_(i, vars_ + i) = 1.0;
      table_(i, rhs_) = sign * b(i);
      basis_[static_cast<std::size_t>(i)] = vars_ + i;
    }
    max_pivots_ = options.max_pivots ? options.max_pivots
                                     : 50 * static_cast<std::size_t>(rows_ + vars_ + 1);
  }

  Result run(const Eigen::VectorXd& c, double b_scale) {
    Result result;
    // Phase 1: minimize the sum of artificials.
    auto cost = table_.row(rows_);
    cost.setZero();
    for (Eigen::Index i = 0; i < rows_; ++i) {
      cost.head(vars_) -= table_.row(i).head(vars_);
      cost(rhs_) -= table_(i, rhs_);
    }
    Status status = iterate(vars_ + rows_);
    result.pivots = pivots_;
    if (status == Status::kIterationLimit) {
      result.status = status;
      return result;
    }
    if (-table_(rows_, rhs_) > options_.feasibility_tol * (1.0 + b_scale)) {
      result.status = Status::kInfeasible;
      return result;
    }
    drive_out_artificials();

    // Phase 2 on structural columns only.
    cost.setZero();
    cost.head(vars_) = c.transpose();
    for (Eigen::Index i = 0; i < rows_; ++i) {
      const Eigen::Index j = basis_[static_cast<std::size_t>(i)];
      const double cb = j < vars_ ? c(j) : 0.0;
      if (cb != 0.0) {
        cost.head(vars_) -= cb * table_.row(i).head(vars_);
        cost(rhs_) -= cb * table_(i, rhs_);
      }
    }
    status = iterate(vars_);
    result.pivots = pivots_;
    result.status = status;
    result.x = Eigen::VectorXd::Zero(vars_);
    for (Eigen::Index i = 0; i < rows_; ++i) {
      const Eigen::Index j = basis_[static_cast<std::size_t>(i)];
      if (j < vars_) result.x(j) = std::max(0.0, table_(i, rhs_));
    }
    result.objective = c.dot(result.x);
    return result;
  }

 private:
  // Pivots until no column in [0, allowed) has a negative reduced cost.
  Status iterate(Eigen::Index allowed) {
    std::size_t degenerate_run = 0;
    bool bland = false;
    while (true) {
      if (pivots_ >= max_pivots_) return Status::kIterationLimit;
      const Eigen::Index enter = choose_entering(allowed, bland);
      if (enter < 0) return Status::kOptimal;
      const Eigen::Index leave = choose_leaving(enter);
      if (leave < 0) return Status::kUnbounded;
      if (table_(leave, rhs_) <= options_.pivot_tol) {
        if (++degenerate_run > 50) bland = true;
      } else {
        degenerate_run = 0;
      }
      pivot(leave, enter);
    }
  }

  Eigen::Index choose_entering(Eigen::Index allowed, bool bland) const {
    Eigen::Index best = -1;
    double best_cost = -options_.pivot_tol;
    for (Eigen::Index j = 0; j < allowed; ++j) {
      const double d = table_(rows_, j);
      if (d < best_cost) {
        best = j;
        if (bland) break;
        best_cost = d;
      }
    }
    return best;
  }

  Eigen::Index choose_leaving(Eigen::Index enter) const {
    Eigen::Index best = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < rows_; ++i) {
      const double a = table_(i, enter);
      if (a <= options_.pivot_tol) continue;
      const double ratio = std::max(0.0, table_(i, rhs_)) / a;
      if (ratio < best_ratio ||
          (ratio == best_ratio && basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(best)])) {
        best_ratio = ratio;
        best = i;
      }
    }
    return best;
  }

  void pivot(Eigen::Index row, Eigen::Index col) {
    table_.row(row) /= table_(row, col);
    for (Eigen::Index i = 0; i <= rows_; ++i) {
      if (i == row) continue;
      const double factor = table_(i, col);
      if (factor != 0.0) table_.row(i) -= factor * table_.row(row);
    }
    basis_[static_cast<std::size_t>(row)] = col;
    ++pivots_;
  }

  // After a feasible phase 1, any artificial still basic sits at zero. Swap it
  // for a structural column where possible; rows with no structural entry are
  // redundant and stay inert (their structural coefficients are all zero).
  void drive_out_artificials() {
    for (Eigen::Index i = 0; i < rows_; ++i) {
      if (basis_[static_cast<std::size_t>(i)] < vars_) continue;
      Eigen::Index best = -1;
      double best_abs = 1e-9;
      for (Eigen::Index j = 0; j < vars_; ++j) {
        if (std::abs(table_(i, j)) > best_abs) {
          best_abs = std::abs(table_(i, j));
          best = j;
        }
      }
      if (best >= 0) pivot(i, best);
    }
  }

  Eigen::Index rows_;
  Eigen::Index vars_;
  Eigen::Index rhs_;
  Options options_;
  Tableau table_;
  std::vector<Eigen::Index> basis_;
  std::size_t pivots_ = 0;
  std::size_t max_pivots_ = 0;
};

}  // namespace

Result minimize(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                const Options& options) {
  if (A.rows() != b.size() || A.cols() != c.size()) {
    throw ShapeError("linear program dimensions disagree");
  }
  if (A.rows() == 0) {
    // No constraints: optimal at 0 unless some cost is negative.
    Result result;
    result.x = Eigen::VectorXd::Zero(A.cols());
    result.status = (c.array() < 0.0).any() ? Status::kUnbounded : Status::kOptimal;
    return result;
  }
  const double b_scale = b.cwiseAbs().maxCoeff();
  Simplex simplex(A, b, options);
  return simplex.run(c, b_scale);
}

}  // namespace onionlabel::lp

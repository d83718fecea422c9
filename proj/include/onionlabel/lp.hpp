#pragma once

// Dense two-phase simplex for small linear programs in standard form:
//
//   minimize c'x  subject to  A x = b,  x >= 0.
//
// Sized for hull-membership programs (a handful of rows, up to a few thousand
// columns). Dantzig pricing with a switch to Bland's rule after a run of
// degenerate pivots, so the method terminates on degenerate geometry.

#include <cstddef>

#include <Eigen/Dense>

namespace onionlabel::lp {

enum class Status { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

struct Options {
  double pivot_tol = 1e-11;       // smallest usable pivot / reduced cost magnitude
  double feasibility_tol = 1e-9;  // phase-1 objective accepted as zero (scaled by 1 + |b|_inf)
  std::size_t max_pivots = 0;     // 0 selects 50 * (rows + cols)
};

struct Result {
  Status status = Status::kInfeasible;
  Eigen::VectorXd x;
  double objective = 0.0;
  std::size_t pivots = 0;
};

Result minimize(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                const Options& options = {});

}  // namespace onionlabel::lp

#pragma once

// Convex-hull geometry over the columns of A = 2W.
//
// H1 is the vertex set of Conv(col(A)); H2 the remaining columns. The safe
// region for b/n is Conv(H1) minus Conv(H2). All membership questions are
// answered by small linear programs, so no facet enumeration is needed and the
// dimension m only enters through the LP row count.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "onionlabel/signal_model.hpp"

namespace onionlabel {

/// Default membership tolerance on the infinity-norm residual.
inline constexpr double kHullTolerance = 1e-8;

/// n*k points of dimension m, stored one per column.
class ColumnCloud {
 public:
  explicit ColumnCloud(Eigen::MatrixXd points);

  std::size_t dim() const { return static_cast<std::size_t>(points_.rows()); }
  std::size_t size() const { return static_cast<std::size_t>(points_.cols()); }
  Eigen::VectorXd column(std::size_t i) const { return points_.col(static_cast<Eigen::Index>(i)); }
  const Eigen::MatrixXd& points() const { return points_; }

  /// Columns at `indices`, in the given order.
  Eigen::MatrixXd gather(std::span<const std::size_t> indices) const;

 private:
  Eigen::MatrixXd points_;
};

/// A = 2W.
ColumnCloud build_A(const WeakSignalMatrix& w);

/// Vertex indices of the convex hull of the columns, ascending. Of several
/// columns within `tol` of each other only the lowest index is reported.
std::vector<std::size_t> extreme_points(const ColumnCloud& cloud, double tol = kHullTolerance);

/// Smallest infinity-norm distance from q to the convex hull of the columns of
/// `points`; +inf for an empty point set.
double hull_distance(const Eigen::VectorXd& q, const Eigen::MatrixXd& points);

/// True iff q lies within `tol` (infinity norm) of Conv(columns). Boundary
/// points, vertices included, count as inside.
bool in_hull(const Eigen::VectorXd& q, const ColumnCloud& cloud, double tol = kHullTolerance);

struct HullDecomposition {
  std::vector<std::size_t> h1;  // hull vertices, one index per distinct point
  std::vector<std::size_t> h2;  // every other column
  // Members of h2 that are not copies of an h1 vertex. Conv(H2) is taken over
  // these, so a duplicated vertex does not pull Conv(H2) onto the outer hull.
  std::vector<std::size_t> h2_interior;
};

HullDecomposition hull_decompose(const ColumnCloud& cloud, double tol = kHullTolerance);

enum class RegionStatus { kInsideH2, kSafe, kOutsideH1 };

std::string_view to_string(RegionStatus status);

/// Cached membership tests against a fixed decomposition. The hull is never
/// recomputed; each query is one or two small LPs.
class SafeRegion {
 public:
  SafeRegion(const ColumnCloud& cloud, const HullDecomposition& decomposition,
             double tol = kHullTolerance);

  /// Classifies the point b/n.
  RegionStatus classify(const Eigen::VectorXd& b, double n) const;
  RegionStatus classify(const Eigen::VectorXd& point) const;

  bool has_interior() const { return inner_.cols() > 0; }
  std::size_t dim() const { return static_cast<std::size_t>(outer_.rows()); }

 private:
  Eigen::MatrixXd outer_;  // distinct H1 vertices
  Eigen::MatrixXd inner_;  // distinct H2 interior points
  double tol_;
};

RegionStatus safe_region_status(const Eigen::VectorXd& b, double n, const HullDecomposition& decomposition,
                                const ColumnCloud& cloud, double tol = kHullTolerance);

namespace detail {

/// representative[i] is the lowest index j <= i whose column lies within `tol`
/// (infinity norm) of column i, considering only earlier representatives.
std::vector<std::size_t> duplicate_representatives(const Eigen::MatrixXd& points, double tol);

}  // namespace detail

}  // namespace onionlabel

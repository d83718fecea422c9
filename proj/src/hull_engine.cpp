#include "onionlabel/hull_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "onionlabel/errors.hpp"
#include "onionlabel/lp.hpp"

namespace onionlabel {

namespace {

// Result of the separation program for a point p against a point set E:
//
//   maximize d.p - c  s.t.  d.e <= c for every e in E,  |d|_inf <= 1.
//
// The optimum equals the l1 distance from p to Conv(E); a positive gap comes
// with a direction d along which p beats every point of E.
struct Separation {
  double gap = 0.0;
  Eigen::VectorXd direction;
};

Separation separate(const Eigen::VectorXd& p, const Eigen::MatrixXd& set) {
  const Eigen::Index m = p.size();
  const Eigen::Index count = set.cols();
  // d = u - 1 with u in [0, 2] (slack s), c = c' - shift with c' >= 0.
  // Variables: [u (m) | s (m) | c' (1) | r (count)].
  const double shift = static_cast<double>(m) * std::max(set.cwiseAbs().maxCoeff(), p.cwiseAbs().maxCoeff()) + 1.0;
  const Eigen::Index vars = 2 * m + 1 + count;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m + count, vars);
  Eigen::VectorXd b(m + count);
  for (Eigen::Index i = 0; i < m; ++i) {
    A(i, i) = 1.0;
    A(i, m + i) = 1.0;
    b(i) = 2.0;
  }
  for (Eigen::Index e = 0; e < count; ++e) {
    const Eigen::Index row = m + e;
    A.row(row).head(m) = set.col(e).transpose();
    A(row, 2 * m) = -1.0;
    A(row, 2 * m + 1 + e) = 1.0;
    b(row) = set.col(e).sum() - shift;
  }
  Eigen::VectorXd c = Eigen::VectorXd::Zero(vars);
  c.head(m) = -p;
  c(2 * m) = 1.0;

  const lp::Result result = lp::minimize(A, b, c);
  if (result.status != lp::Status::kOptimal) {
    throw std::runtime_error("hull separation program failed to reach an optimum");
  }
  Separation sep;
  sep.direction = result.x.head(m).array() - 1.0;
  sep.gap = sep.direction.dot(p) - (sep.direction.transpose() * set).maxCoeff();
  return sep;
}

bool lex_greater(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i) != b(i)) return a(i) > b(i);
  }
  return false;
}

std::vector<std::size_t> unique_columns(const Eigen::MatrixXd& points, double tol) {
  const auto reps = detail::duplicate_representatives(points, tol);
  std::vector<std::size_t> unique;
  for (std::size_t i = 0; i < reps.size(); ++i) {
    if (reps[i] == i) unique.push_back(i);
  }
  return unique;
}

Eigen::MatrixXd gather_columns(const Eigen::MatrixXd& points, std::span<const std::size_t> indices) {
  Eigen::MatrixXd out(points.rows(), static_cast<Eigen::Index>(indices.size()));
  for (std::size_t c = 0; c < indices.size(); ++c) {
    out.col(static_cast<Eigen::Index>(c)) = points.col(static_cast<Eigen::Index>(indices[c]));
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

ColumnCloud::ColumnCloud(Eigen::MatrixXd points) : points_(std::move(points)) {
  if (points_.rows() == 0) throw ShapeError("column cloud needs dimension m >= 1");
  if (!points_.allFinite()) throw ShapeError("column cloud holds non-finite coordinates");
}

Eigen::MatrixXd ColumnCloud::gather(std::span<const std::size_t> indices) const {
  for (std::size_t i : indices) {
    if (i >= size()) throw ShapeError("column index " + std::to_string(i) + " out of range");
  }
  return gather_columns(points_, indices);
}

ColumnCloud build_A(const WeakSignalMatrix& w) { return ColumnCloud(2.0 * w.values()); }

namespace detail {

std::vector<std::size_t> duplicate_representatives(const Eigen::MatrixXd& points, double tol) {
  const auto count = static_cast<std::size_t>(points.cols());
  std::vector<std::size_t> reps(count);
  // Representatives keyed by their first coordinate to prune comparisons.
  std::multimap<double, std::size_t> by_first;
  for (std::size_t i = 0; i < count; ++i) {
    const auto col = points.col(static_cast<Eigen::Index>(i));
    std::size_t rep = i;
    const auto lo = by_first.lower_bound(col(0) - tol);
    const auto hi = by_first.upper_bound(col(0) + tol);
    for (auto it = lo; it != hi; ++it) {
      if (it->second < rep &&
          (points.col(static_cast<Eigen::Index>(it->second)) - col).cwiseAbs().maxCoeff() <= tol) {
        rep = it->second;
      }
    }
    reps[i] = rep;
    if (rep == i) by_first.emplace(col(0), i);
  }
  return reps;
}

}  // namespace detail

std::vector<std::size_t> extreme_points(const ColumnCloud& cloud, double tol) {
  if (cloud.size() == 0) throw ShapeError("cannot take the hull of an empty column cloud");
  const Eigen::MatrixXd& points = cloud.points();
  const std::vector<std::size_t> unique = unique_columns(points, tol);

  auto column = [&](std::size_t i) -> Eigen::VectorXd { return points.col(static_cast<Eigen::Index>(i)); };

  // The lexicographic maximum is always a vertex.
  std::size_t first = unique.front();
  for (std::size_t i : unique) {
    if (lex_greater(column(i), column(first))) first = i;
  }
  std::vector<std::size_t> vertices{first};
  std::vector<char> is_vertex(cloud.size(), 0);
  is_vertex[first] = 1;

  // Grow the vertex set on demand: a point outside the current hull yields a
  // direction whose maximizer over the whole cloud is a new vertex.
  for (std::size_t p : unique) {
    while (!is_vertex[p]) {
      const Separation sep = separate(column(p), gather_columns(points, vertices));
      if (sep.gap <= tol) break;

      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t i : unique) best = std::max(best, sep.direction.dot(column(i)));
      const double slack = 1e-12 * (1.0 + std::abs(best));
      std::size_t pick = p;
      bool found = false;
      for (std::size_t i : unique) {
        if (sep.direction.dot(column(i)) < best - slack) continue;
        if (!found || lex_greater(column(i), column(pick))) pick = i;
        found = true;
      }
      if (is_vertex[pick]) pick = p;  // numerical tie with a known vertex
      is_vertex[pick] = 1;
      vertices.push_back(pick);
    }
  }

  // Drop anything the final set already spans; every non-vertex is inside
  // Conv(vertices), so this leaves exactly the hull's vertices.
  std::sort(vertices.begin(), vertices.end());
  for (std::size_t idx = 0; idx < vertices.size() && vertices.size() > 1;) {
    std::vector<std::size_t> others = vertices;
    others.erase(others.begin() + static_cast<std::ptrdiff_t>(idx));
    if (separate(column(vertices[idx]), gather_columns(points, others)).gap <= tol) {
      vertices = std::move(others);
    } else {
      ++idx;
    }
  }
  return vertices;
}

double hull_distance(const Eigen::VectorXd& q, const Eigen::MatrixXd& points) {
  if (q.size() != points.rows()) {
    throw ShapeError("query has dimension " + std::to_string(q.size()) + ", cloud has " +
                     std::to_string(points.rows()));
  }
  const Eigen::Index count = points.cols();
  if (count == 0) return std::numeric_limits<double>::infinity();
  if (count == 1) return (points.col(0) - q).cwiseAbs().maxCoeff();

  // minimize t  s.t.  P l - t + s1 = q,  P l + t - s2 = q,  sum(l) = 1.
  // Variables: [l (count) | t | s1 (m) | s2 (m)].
  const Eigen::Index m = q.size();
  const Eigen::Index vars = count + 1 + 2 * m;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * m + 1, vars);
  Eigen::VectorXd b(2 * m + 1);
  A.topLeftCorner(m, count) = points;
  A.block(m, 0, m, count) = points;
  A.block(0, count, m, 1).setConstant(-1.0);
  A.block(m, count, m, 1).setConstant(1.0);
  A.block(0, count + 1, m, m).setIdentity();
  A.block(m, count + 1 + m, m, m) = -Eigen::MatrixXd::Identity(m, m);
  A.row(2 * m).head(count).setOnes();
  b.head(m) = q;
  b.segment(m, m) = q;
  b(2 * m) = 1.0;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(vars);
  c(count) = 1.0;

  const lp::Result result = lp::minimize(A, b, c);
  if (result.status != lp::Status::kOptimal) {
    throw std::runtime_error("hull membership program failed to reach an optimum");
  }
  // Report the residual of the recovered combination rather than the LP value.
  const Eigen::VectorXd weights = result.x.head(count);
  return (points * (weights / weights.sum()) - q).cwiseAbs().maxCoeff();
}

bool in_hull(const Eigen::VectorXd& q, const ColumnCloud& cloud, double tol) {
  if (q.size() != static_cast<Eigen::Index>(cloud.dim())) {
    throw ShapeError("query has dimension " + std::to_string(q.size()) + ", cloud has " +
                     std::to_string(cloud.dim()));
  }
  const auto unique = unique_columns(cloud.points(), tol);
  return hull_distance(q, gather_columns(cloud.points(), unique)) <= tol;
}

HullDecomposition hull_decompose(const ColumnCloud& cloud, double tol) {
  HullDecomposition d;
  d.h1 = extreme_points(cloud, tol);
  const auto reps = detail::duplicate_representatives(cloud.points(), tol);
  std::vector<char> vertex(cloud.size(), 0);
  for (std::size_t i : d.h1) vertex[i] = 1;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (vertex[i]) continue;
    d.h2.push_back(i);
    if (!vertex[reps[i]]) d.h2_interior.push_back(i);
  }
  return d;
}

std::string_view to_string(RegionStatus status) {
  switch (status) {
    case RegionStatus::kInsideH2: return "INSIDE_H2";
    case RegionStatus::kSafe: return "SAFE";
    case RegionStatus::kOutsideH1: return "OUTSIDE_H1";
  }
  return "UNKNOWN";
}

SafeRegion::SafeRegion(const ColumnCloud& cloud, const HullDecomposition& decomposition, double tol)
    : outer_(cloud.gather(decomposition.h1)), tol_(tol) {
  // Only distinct interior points matter for Conv(H2).
  const Eigen::MatrixXd interior = cloud.gather(decomposition.h2_interior);
  inner_ = gather_columns(interior, unique_columns(interior, tol));
}

RegionStatus SafeRegion::classify(const Eigen::VectorXd& point) const {
  if (point.size() != outer_.rows()) {
    throw ShapeError("point has dimension " + std::to_string(point.size()) + ", hull has " +
                     std::to_string(outer_.rows()));
  }
  if (inner_.cols() > 0 && hull_distance(point, inner_) <= tol_) return RegionStatus::kInsideH2;
  if (hull_distance(point, outer_) <= tol_) return RegionStatus::kSafe;
  return RegionStatus::kOutsideH1;
}

RegionStatus SafeRegion::classify(const Eigen::VectorXd& b, double n) const {
  if (!(n > 0.0)) throw std::invalid_argument("point count n must be positive");
  return classify(Eigen::VectorXd(b / n));
}

RegionStatus safe_region_status(const Eigen::VectorXd& b, double n, const HullDecomposition& decomposition,
                                const ColumnCloud& cloud, double tol) {
  return SafeRegion(cloud, decomposition, tol).classify(b, n);
}

}  // namespace onionlabel

#pragma once

// Shared test data and oracles that do not go through the library code they
// check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "onionlabel/signal_model.hpp"

namespace fixtures {

constexpr double kAbsent = std::numeric_limits<double>::quiet_NaN();

// Three signals over five points and three classes; NaN marks an abstention.
inline const std::vector<std::vector<double>>& table_rows() {
  static const std::vector<std::vector<double>> rows = {
      {0.8, kAbsent, 0.0, 0.8, 0.4, kAbsent, 0.7, kAbsent, 0.2, kAbsent, kAbsent, kAbsent, 0.6, kAbsent, kAbsent},
      {0.7, 0.2, kAbsent, 0.6, 0.3, kAbsent, kAbsent, kAbsent, kAbsent, kAbsent, kAbsent, kAbsent, kAbsent, 0.3,
       kAbsent},
      {kAbsent, kAbsent, kAbsent, kAbsent, kAbsent, 0.4, kAbsent, kAbsent, 0.4, 0.6, kAbsent, kAbsent, kAbsent,
       kAbsent, 0.9},
  };
  return rows;
}

inline const std::vector<double>& table_truth_onehot() {
  static const std::vector<double> y = {1, 0, 0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 1, 0, 1};
  return y;
}

inline onionlabel::WeakSignalMatrix table_matrix() {
  const auto& rows = table_rows();
  Eigen::MatrixXd values(3, 15);
  onionlabel::AbstainMask abstain(3, 15);
  for (int i = 0; i < 3; ++i) {
    for (int c = 0; c < 15; ++c) {
      const double v = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
      abstain(i, c) = std::isnan(v);
      values(i, c) = std::isnan(v) ? 0.0 : v;
    }
  }
  return onionlabel::WeakSignalMatrix(values, abstain, 5, 3);
}

inline Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Andrew's monotone chain. Returns the indices of strict hull vertices in the
// plane; among exact duplicates the lowest index is kept.
inline std::vector<std::size_t> monotone_chain_vertices(const Eigen::MatrixXd& pts) {
  const std::size_t count = static_cast<std::size_t>(pts.cols());
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < count; ++i) {
    bool seen = false;
    for (std::size_t j = 0; j < i && !seen; ++j) {
      seen = pts(0, static_cast<Eigen::Index>(i)) == pts(0, static_cast<Eigen::Index>(j)) &&
             pts(1, static_cast<Eigen::Index>(i)) == pts(1, static_cast<Eigen::Index>(j));
    }
    if (!seen) order.push_back(i);
  }
  auto x = [&](std::size_t i) { return pts(0, static_cast<Eigen::Index>(i)); };
  auto y = [&](std::size_t i) { return pts(1, static_cast<Eigen::Index>(i)); };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x(a) != x(b) ? x(a) < x(b) : y(a) < y(b);
  });
  if (order.size() <= 2) {
    std::sort(order.begin(), order.end());
    return order;
  }
  auto cross = [&](std::size_t o, std::size_t a, std::size_t b) {
    return (x(a) - x(o)) * (y(b) - y(o)) - (y(a) - y(o)) * (x(b) - x(o));
  };
  std::vector<std::size_t> hull(2 * order.size());
  std::size_t h = 0;
  for (std::size_t idx : order) {
    while (h >= 2 && cross(hull[h - 2], hull[h - 1], idx) <= 0) --h;
    hull[h++] = idx;
  }
  for (std::size_t t = order.size() - 1, lower = h + 1; t-- > 0;) {
    const std::size_t idx = order[t];
    while (h >= lower && cross(hull[h - 2], hull[h - 1], idx) <= 0) --h;
    hull[h++] = idx;
  }
  hull.resize(h - 1);
  std::sort(hull.begin(), hull.end());
  hull.erase(std::unique(hull.begin(), hull.end()), hull.end());
  return hull;
}

// m x (n*k) dense signal matrix with entries on a coarse grid, which makes
// duplicates and collinear triples common.
inline Eigen::MatrixXd lattice_points(std::size_t dim, std::size_t count, int levels, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> level(0, levels);
  Eigen::MatrixXd pts(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(count));
  for (Eigen::Index c = 0; c < pts.cols(); ++c) {
    for (Eigen::Index r = 0; r < pts.rows(); ++r) pts(r, c) = 2.0 * level(rng) / levels;
  }
  return pts;
}

inline Eigen::MatrixXd uniform_points(std::size_t dim, std::size_t count, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 2.0);
  Eigen::MatrixXd pts(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(count));
  for (Eigen::Index c = 0; c < pts.cols(); ++c) {
    for (Eigen::Index r = 0; r < pts.rows(); ++r) pts(r, c) = unit(rng);
  }
  return pts;
}

}  // namespace fixtures

#pragma once

// The onion-universe label model.
//
//   1. Reduce the signals to `chunks` averaged rows and form A = 2W.
//   2. Split the columns of A into hull vertices H1 and the rest H2.
//   3. Start the target b at the largest admissible average error rate and
//      lower the rate by `alpha` until b/n leaves Conv(H2).
//   4. Solve  min ||A y - b||  over y in [0,1]^{nk} with 1'y = n  by projected
//      gradient descent on the system augmented with a row of ones.
//   5. Decode each point's class as the argmax over its class block.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "onionlabel/hull_engine.hpp"
#include "onionlabel/signal_model.hpp"

namespace onionlabel {

struct SolverConfig {
  double alpha = 0.01;             // epsilon step size
  double learning_rate = 0.0;      // <= 0 selects 1 / sigma_max(A')^2
  std::size_t max_iters = 20000;
  double conv_tol = 1e-6;          // relative infinity-norm change between iterates
  std::uint64_t seed = 0;
  std::size_t max_anneal_steps = 100000;
  std::size_t chunks = 5;          // signal reduction before the hull step
  double hull_tol = kHullTolerance;

  /// Throws std::invalid_argument on a non-positive step, rate budget or tolerance.
  void validate() const;
};

struct TargetVector {
  Eigen::VectorXd b;
  double epsilon = 0.0;
};

struct SyntheticLabel {
  Eigen::VectorXd soft;           // length n*k, entries in [0,1], sum n
  std::vector<int> hard;          // class per point, 1..k
  double residual = 0.0;          // ||A y - b|| at the returned y (unaugmented)
  double initial_residual = 0.0;  // same, at the starting iterate
  double epsilon_used = 0.0;
  bool converged = false;
  bool ablation = false;
  std::size_t iterations = 0;
};

struct AugmentedSystem {
  Eigen::MatrixXd A;  // (m+1) x nk, last row all ones
  Eigen::VectorXd b;  // m+1, last entry n
};

/// 2/k - 2/k^2: the error rate of the uniform 1/k signal.
double epsilon_upper_bound(std::size_t k);

/// b_i = -n k epsilon + w_i.1 + n.
TargetVector init_b(const WeakSignalMatrix& w, double epsilon);

/// Lowers epsilon from its upper bound in steps of cfg.alpha (clamped at 0)
/// until b/n is SAFE. Throws AnnealError when b/n leaves Conv(H1) first or
/// epsilon hits 0 while still inside Conv(H2).
TargetVector anneal_b(const WeakSignalMatrix& w, const ColumnCloud& cloud, const HullDecomposition& decomposition,
                      const SolverConfig& cfg);

/// Same loop against an already-built membership cache.
TargetVector anneal_b(const WeakSignalMatrix& w, const SafeRegion& region, const SolverConfig& cfg);

AugmentedSystem augment_system(const ColumnCloud& cloud, const Eigen::VectorXd& b, std::size_t n);
AugmentedSystem augment_system(const ColumnCloud& cloud, const TargetVector& target, std::size_t n);

/// Projected gradient descent on 0.5 ||A' y - b'||^2 from y ~ U(0,1)^{nk}
/// seeded by cfg.seed, clipping to [0,1] after every step, followed by a
/// projection onto {y in [0,1]^{nk} : 1'y = n}.
SyntheticLabel solve_labels(const AugmentedSystem& system, std::size_t n, std::size_t k, const SolverConfig& cfg);

/// As above from an explicit starting iterate.
SyntheticLabel solve_labels(const AugmentedSystem& system, std::size_t n, std::size_t k, const SolverConfig& cfg,
                            Eigen::VectorXd initial);

/// Per-point argmax over the class blocks; ties go to the lowest class.
std::vector<int> decode_labels(const Eigen::VectorXd& soft, std::size_t n, std::size_t k);

/// Euclidean projection onto {y in [0,1]^N : sum(y) = total}.
Eigen::VectorXd project_capped_simplex(const Eigen::VectorXd& y, double total);

/// Power-iteration estimate of the largest singular value squared.
double largest_singular_value_squared(const Eigen::MatrixXd& A);

/// Intermediate products of one pipeline run, kept for inspection.
struct OuaTrace {
  WeakSignalMatrix reduced;
  ColumnCloud cloud;
  HullDecomposition decomposition;
  TargetVector target;
};

/// Full pipeline: reduce -> A -> hull -> anneal -> augment -> solve -> decode.
SyntheticLabel run_oua(const WeakSignalMatrix& w, const SolverConfig& cfg);
SyntheticLabel run_oua(const WeakSignalMatrix& w, const SolverConfig& cfg, std::optional<OuaTrace>& trace);

}  // namespace onionlabel

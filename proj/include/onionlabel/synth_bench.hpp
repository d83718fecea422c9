#pragma once

// Planted-truth instances, the brute-force hull oracle, the inside-Conv(H2)
// ablation and a small sweep harness over (instance, method) cells.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "onionlabel/hull_engine.hpp"
#include "onionlabel/oua_solver.hpp"
#include "onionlabel/signal_model.hpp"

namespace onionlabel {

struct SynthSpec {
  std::size_t n = 100;
  std::size_t k = 2;
  std::size_t m = 10;
  double signal_accuracy = 0.8;      // P(vote = true class | not abstaining), in (1/k, 1]
  double abstain_rate = 0.0;         // P(abstain), independently per signal and point
  std::vector<double> class_balance; // empty means uniform
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument on an inconsistent spec.
  void validate() const;
};

struct Instance {
  WeakSignalMatrix signals;
  LabelVector truth;
};

/// Deterministic in every SynthSpec field, the seed included.
Instance generate_instance(const SynthSpec& spec);

inline constexpr std::size_t kOracleMaxColumns = 60;

/// Vertex set by exhaustion: after collapsing duplicates onto their lowest
/// index, a column is a vertex iff it is not within `tol` of the convex hull
/// of the other distinct columns. Limited to kOracleMaxColumns columns.
std::vector<std::size_t> brute_force_vertex_oracle(const ColumnCloud& cloud, double tol = kHullTolerance);

/// Same pipeline as run_oua with the annealing direction reversed: starting at
/// epsilon = 2/k - 2/k^2, epsilon grows by alpha until b/n is inside Conv(H2).
/// Epsilon never exceeds its upper bound, so in practice this either solves at
/// the bound or throws AnnealError(kCannotEnterInterior). The result carries
/// ablation = true.
SyntheticLabel run_ablation(const WeakSignalMatrix& w, const SolverConfig& cfg);

enum class Method { kOua, kMajorityVote, kWeightedMajorityVote, kAblation };

std::string to_string(Method method);
Method parse_method(const std::string& name);

struct SweepRow {
  std::string instance_id;
  std::string method;
  std::string metric;
  double value = 0.0;
  double epsilon_used = 0.0;  // NaN for methods without a target vector
  double residual = 0.0;      // NaN for methods without a solve
  double wall_ms = 0.0;
  std::string error;          // empty on success; value is NaN otherwise
};

/// One row per (spec, method). Cells are independent; `threads` > 1 runs them
/// on a worker pool. Failures are recorded in the row and do not stop the sweep.
std::vector<SweepRow> sweep(const std::vector<SynthSpec>& specs, const std::vector<Method>& methods,
                            const SolverConfig& cfg, const std::string& metric = "acc", std::size_t threads = 1);

/// Columns: instance_id,method,metric,value,epsilon_used,residual,wall_ms.
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace onionlabel

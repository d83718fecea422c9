#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "onionlabel/signal_model.hpp"

namespace onionlabel {

/// Majority vote over non-abstain entries. Ties go to the lowest class; a
/// point on which every signal abstains gets a class drawn from `seed`.
LabelVector majority_vote(const WeakSignalMatrix& w, std::uint64_t seed = 0);

/// Majority vote with per-class tallies scaled by `prior` before the argmax.
/// Without a prior the empirical distribution of non-abstain votes is used.
LabelVector weighted_majority_vote(const WeakSignalMatrix& w, const std::optional<std::vector<double>>& prior,
                                   std::uint64_t seed = 0);

/// Share of the total non-abstain vote mass that goes to each class.
std::vector<double> empirical_vote_prior(const WeakSignalMatrix& w);

struct ClassStats {
  int cls = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;  // points whose true class is `cls`
};

struct EvalReport {
  std::string metric;  // "acc" or "f1"
  double value = 0.0;
  std::vector<ClassStats> per_class;
  std::size_t n = 0;
};

EvalReport accuracy(const LabelVector& pred, const LabelVector& truth);

/// Binary F1 on `positive_class` (class 1 is the PWS "+1" block).
EvalReport f1(const LabelVector& pred, const LabelVector& truth, int positive_class = 1);

/// 2/k - 2/k^2, the expected error rate of uniformly random labels.
double random_baseline_error(std::size_t k);

}  // namespace onionlabel

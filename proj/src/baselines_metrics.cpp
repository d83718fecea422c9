#include "onionlabel/baselines_metrics.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "onionlabel/errors.hpp"
#include "onionlabel/rng.hpp"

namespace onionlabel {

namespace {

// tallies(c, j): summed non-abstain mass for class c+1 on point j.
Eigen::MatrixXd vote_tallies(const WeakSignalMatrix& w) {
  const auto n = static_cast<Eigen::Index>(w.n());
  const auto k = static_cast<Eigen::Index>(w.k());
  const Eigen::MatrixXd counted = w.abstain().select(0.0, w.values());
  const Eigen::VectorXd column_mass = counted.colwise().sum().transpose();
  Eigen::MatrixXd tallies(k, n);
  for (Eigen::Index c = 0; c < k; ++c) tallies.row(c) = column_mass.segment(c * n, n).transpose();
  return tallies;
}

std::vector<bool> all_abstain_points(const WeakSignalMatrix& w) {
  const std::size_t n = w.n();
  std::vector<bool> silent(n, true);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t c = 0; c < w.k() && silent[j]; ++c) {
      if (!w.abstain().col(static_cast<Eigen::Index>(w.column(c, j))).all()) silent[j] = false;
    }
  }
  return silent;
}

LabelVector argmax_labels(const WeakSignalMatrix& w, const Eigen::MatrixXd& scores, std::uint64_t seed) {
  const std::vector<bool> silent = all_abstain_points(w);
  Rng rng = make_rng(seed, streams::kVoteTies);
  std::uniform_int_distribution<int> any_class(1, static_cast<int>(w.k()));
  std::vector<int> hard(w.n(), 1);
  for (std::size_t j = 0; j < w.n(); ++j) {
    if (silent[j]) {
      hard[j] = any_class(rng);
      continue;
    }
    Eigen::Index best = 0;
    scores.col(static_cast<Eigen::Index>(j)).maxCoeff(&best);  // first maximum wins ties
    hard[j] = static_cast<int>(best) + 1;
  }
  return LabelVector(std::move(hard), w.k());
}

void require_same_shape(const LabelVector& pred, const LabelVector& truth) {
  if (pred.n() != truth.n()) {
    throw ShapeError("prediction has " + std::to_string(pred.n()) + " labels, truth has " +
                     std::to_string(truth.n()));
  }
  if (pred.k() != truth.k()) throw ShapeError("prediction and truth disagree on the class count");
}

ClassStats class_stats(const LabelVector& pred, const LabelVector& truth, int cls) {
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t j = 0; j < truth.n(); ++j) {
    const bool p = pred[j] == cls;
    const bool t = truth[j] == cls;
    tp += p && t;
    fp += p && !t;
    fn += !p && t;
  }
  ClassStats s;
  s.cls = cls;
  s.support = tp + fn;
  s.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  s.recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

std::vector<ClassStats> all_class_stats(const LabelVector& pred, const LabelVector& truth) {
  std::vector<ClassStats> stats;
  for (std::size_t c = 1; c <= truth.k(); ++c) stats.push_back(class_stats(pred, truth, static_cast<int>(c)));
  return stats;
}

}  // namespace

LabelVector majority_vote(const WeakSignalMatrix& w, std::uint64_t seed) {
  return argmax_labels(w, vote_tallies(w), seed);
}

std::vector<double> empirical_vote_prior(const WeakSignalMatrix& w) {
  const Eigen::VectorXd mass = vote_tallies(w).rowwise().sum();
  const double total = mass.sum();
  std::vector<double> prior(w.k(), 1.0 / static_cast<double>(w.k()));
  if (total > 0.0) {
    for (std::size_t c = 0; c < w.k(); ++c) prior[c] = mass(static_cast<Eigen::Index>(c)) / total;
  }
  return prior;
}

LabelVector weighted_majority_vote(const WeakSignalMatrix& w, const std::optional<std::vector<double>>& prior,
                                   std::uint64_t seed) {
  const std::vector<double> weights = prior ? *prior : empirical_vote_prior(w);
  if (weights.size() != w.k()) {
    throw std::invalid_argument("prior has " + std::to_string(weights.size()) + " classes, expected " +
                                std::to_string(w.k()));
  }
  for (double p : weights) {
    if (!std::isfinite(p) || p < 0.0) throw std::invalid_argument("prior entries must be finite and >= 0");
  }
  if (std::abs(std::accumulate(weights.begin(), weights.end(), 0.0) - 1.0) > 1e-6) {
    throw std::invalid_argument("prior must sum to 1");
  }
  Eigen::MatrixXd tallies = vote_tallies(w);
  for (std::size_t c = 0; c < w.k(); ++c) tallies.row(static_cast<Eigen::Index>(c)) *= weights[c];
  return argmax_labels(w, tallies, seed);
}

EvalReport accuracy(const LabelVector& pred, const LabelVector& truth) {
  require_same_shape(pred, truth);
  std::size_t hits = 0;
  for (std::size_t j = 0; j < truth.n(); ++j) hits += pred[j] == truth[j];
  EvalReport report;
  report.metric = "acc";
  report.n = truth.n();
  report.value = static_cast<double>(hits) / static_cast<double>(truth.n());
  report.per_class = all_class_stats(pred, truth);
  return report;
}

EvalReport f1(const LabelVector& pred, const LabelVector& truth, int positive_class) {
  require_same_shape(pred, truth);
  if (truth.k() != 2) throw std::invalid_argument("F1 is defined for binary tasks (k = 2) only");
  if (positive_class < 1 || positive_class > 2) throw std::invalid_argument("positive class must be 1 or 2");
  EvalReport report;
  report.metric = "f1";
  report.n = truth.n();
  report.per_class = all_class_stats(pred, truth);
  report.value = report.per_class[static_cast<std::size_t>(positive_class - 1)].f1;
  return report;
}

double random_baseline_error(std::size_t k) {
  if (k < 2) throw std::invalid_argument("class count k must be >= 2");
  const double kk = static_cast<double>(k);
  return 2.0 / kk - 2.0 / (kk * kk);
}

}  // namespace onionlabel

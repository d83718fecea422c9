#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "onionlabel/baselines_metrics.hpp"
#include "onionlabel/errors.hpp"
#include "onionlabel/synth_bench.hpp"

using namespace onionlabel;

namespace {

std::vector<int> hard(const LabelVector& y) { return {y.hard().begin(), y.hard().end()}; }

WeakSignalMatrix stacked(const WeakSignalMatrix& w, int copies) {
  Eigen::MatrixXd values(w.values().rows() * copies, w.values().cols());
  AbstainMask mask(values.rows(), values.cols());
  for (int c = 0; c < copies; ++c) {
    values.middleRows(c * w.values().rows(), w.values().rows()) = w.values();
    mask.middleRows(c * w.values().rows(), w.values().rows()) = w.abstain();
  }
  return WeakSignalMatrix(values, mask, w.n(), w.k());
}

}  // namespace

TEST_CASE("majority vote on the three-signal table") {
  // Tallies straight from the table, skipping abstentions.
  const auto& rows = fixtures::table_rows();
  std::vector<int> expected;
  for (int j = 0; j < 5; ++j) {
    double best = -1.0;
    int arg = 0;
    for (int c = 0; c < 3; ++c) {
      double tally = 0.0;
      for (const auto& row : rows) {
        const double v = row[static_cast<std::size_t>(c * 5 + j)];
        if (!std::isnan(v)) tally += v;
      }
      if (tally > best) {
        best = tally;
        arg = c + 1;
      }
    }
    expected.push_back(arg);
  }
  CHECK(expected.front() == 1);  // 1.5 vs 0.4 vs 0
  CHECK(hard(majority_vote(fixtures::table_matrix())) == expected);
}

TEST_CASE("vote ties go to the lowest class") {
  const WeakSignalMatrix w = expand_pws({{1, 2}, {2, 1}}, 2, 3);
  CHECK(hard(majority_vote(w)) == std::vector<int>{1, 1});
}

TEST_CASE("all-abstain points are drawn from the seed") {
  const WeakSignalMatrix w = expand_pws(std::vector<std::vector<int>>(3, std::vector<int>(200, 0)), 200, 3);
  const LabelVector a = majority_vote(w, 1);
  CHECK(a == majority_vote(w, 1));
  CHECK_FALSE(a == majority_vote(w, 2));
  std::vector<int> counts(4, 0);
  for (int c : a.hard()) ++counts[static_cast<std::size_t>(c)];
  CHECK(counts[1] > 30);
  CHECK(counts[2] > 30);
  CHECK(counts[3] > 30);
}

TEST_CASE("duplicating the signal set leaves majority vote unchanged") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SynthSpec spec;
    spec.n = 80;
    spec.k = 2 + seed % 3;
    spec.m = 5;
    spec.signal_accuracy = 0.6;
    spec.abstain_rate = 0.4;
    spec.seed = seed;
    const WeakSignalMatrix w = generate_instance(spec).signals;
    CHECK(majority_vote(w, seed) == majority_vote(stacked(w, 3), seed));
  }
}

TEST_CASE("weighted vote with a uniform prior is majority vote") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SynthSpec spec;
    spec.n = 60;
    spec.k = 2 + seed % 4;
    spec.m = 7;
    spec.signal_accuracy = 0.7;
    spec.abstain_rate = 0.5;
    spec.seed = seed;
    const WeakSignalMatrix w = generate_instance(spec).signals;
    const std::vector<double> uniform(spec.k, 1.0 / static_cast<double>(spec.k));
    CHECK(weighted_majority_vote(w, uniform, seed) == majority_vote(w, seed));
  }
}

TEST_CASE("weighted vote follows the prior") {
  const WeakSignalMatrix w = expand_pws({{1}, {-1}, {-1}}, 1, 2);
  CHECK(majority_vote(w)[0] == 2);
  CHECK(weighted_majority_vote(w, std::vector<double>{0.8, 0.2})[0] == 1);
  CHECK_THROWS_AS(weighted_majority_vote(w, std::vector<double>{1.0}), std::invalid_argument);
  CHECK_THROWS_AS(weighted_majority_vote(w, std::vector<double>{0.7, 0.7}), std::invalid_argument);
  CHECK_THROWS_AS(weighted_majority_vote(w, std::vector<double>{1.5, -0.5}), std::invalid_argument);
}

TEST_CASE("empirical prior is the share of vote mass") {
  const WeakSignalMatrix w = expand_pws({{1, -1, 0}, {1, 1, 0}}, 3, 2);
  const std::vector<double> prior = empirical_vote_prior(w);
  CHECK(prior[0] == doctest::Approx(0.75));
  CHECK(prior[1] == doctest::Approx(0.25));
  const WeakSignalMatrix silent = expand_pws({{0, 0}}, 2, 3);
  CHECK(empirical_vote_prior(silent) == std::vector<double>(3, 1.0 / 3.0));
}

TEST_CASE("accuracy") {
  const LabelVector truth({1, 2, 2, 1}, 2);
  CHECK(accuracy(truth, truth).value == 1.0);
  CHECK(accuracy(LabelVector({2, 1, 1, 2}, 2), truth).value == 0.0);
  const EvalReport r = accuracy(LabelVector({1, 1, 2, 1}, 2), truth);
  CHECK(r.value == 0.75);
  CHECK(r.metric == "acc");
  CHECK(r.n == 4);
  CHECK_THROWS_AS(accuracy(LabelVector({1}, 2), truth), ShapeError);
}

TEST_CASE("binary F1 against hand counts") {
  // Positive class 1: tp = 2, fp = 1, fn = 1.
  const LabelVector truth({1, 1, 1, 2, 2}, 2);
  const LabelVector pred({1, 1, 2, 1, 2}, 2);
  const EvalReport r = f1(pred, truth);
  CHECK(r.value == doctest::Approx(2.0 / 3.0));
  REQUIRE(r.per_class.size() == 2);
  CHECK(r.per_class[0].precision == doctest::Approx(2.0 / 3.0));
  CHECK(r.per_class[0].recall == doctest::Approx(2.0 / 3.0));
  CHECK(r.per_class[0].support == 3);
  CHECK(f1(pred, truth, 2).value == doctest::Approx(0.5));
  CHECK(f1(LabelVector({2, 2}, 2), LabelVector({2, 2}, 2)).value == 0.0);
  CHECK_THROWS_AS(f1(LabelVector({1}, 3), LabelVector({1}, 3)), std::invalid_argument);
}

TEST_CASE("random labels hit the error bound on average") {
  std::mt19937_64 rng(1);
  for (std::size_t k : {2u, 3u, 5u}) {
    std::uniform_int_distribution<int> cls(1, static_cast<int>(k));
    double total = 0.0;
    const int trials = 200;
    for (int t = 0; t < trials; ++t) {
      std::vector<int> truth(500), guess(500);
      for (auto& c : truth) c = cls(rng);
      for (auto& c : guess) c = cls(rng);
      const LabelVector y(truth, k);
      total += expected_error_rate(LabelVector(guess, k).onehot(), y);
    }
    CHECK(total / trials == doctest::Approx(random_baseline_error(k)).epsilon(0.01));
  }
  CHECK(random_baseline_error(2) == 0.5);
}

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "onionlabel/errors.hpp"
#include "onionlabel/synth_bench.hpp"

using namespace onionlabel;

TEST_CASE("generation is deterministic in the seed") {
  SynthSpec spec;
  spec.n = 50;
  spec.k = 3;
  spec.m = 4;
  spec.abstain_rate = 0.3;
  spec.seed = 9;
  const Instance a = generate_instance(spec);
  const Instance b = generate_instance(spec);
  CHECK(a.signals.values() == b.signals.values());
  CHECK((a.signals.abstain() == b.signals.abstain()).all());
  CHECK(a.truth == b.truth);
  spec.seed = 10;
  CHECK_FALSE(generate_instance(spec).signals.values() == a.signals.values());
}

TEST_CASE("perfect signals copy the truth") {
  SynthSpec spec;
  spec.n = 30;
  spec.k = 2;
  spec.m = 3;
  spec.signal_accuracy = 1.0;
  const Instance inst = generate_instance(spec);
  for (const auto& row : to_pws_votes(inst.signals)) {
    for (std::size_t j = 0; j < spec.n; ++j) CHECK(row[j] == (inst.truth[j] == 1 ? 1 : -1));
  }
}

TEST_CASE("abstain rate one silences every signal") {
  SynthSpec spec;
  spec.abstain_rate = 1.0;
  CHECK(generate_instance(spec).signals.abstain().all());
}

TEST_CASE("empirical rates track the requested rates") {
  SynthSpec spec;
  spec.n = 4000;
  spec.k = 4;
  spec.m = 5;
  spec.signal_accuracy = 0.7;
  spec.abstain_rate = 0.25;
  spec.class_balance = {0.1, 0.2, 0.3, 0.4};
  spec.seed = 1;
  const Instance inst = generate_instance(spec);
  const auto votes = to_pws_votes(inst.signals);
  double voted = 0, correct = 0, total = 0;
  for (const auto& row : votes) {
    for (std::size_t j = 0; j < spec.n; ++j) {
      ++total;
      if (row[j] == 0) continue;
      ++voted;
      correct += row[j] == inst.truth[j];
    }
  }
  CHECK(1.0 - voted / total == doctest::Approx(0.25).epsilon(0.05));
  CHECK(correct / voted == doctest::Approx(0.7).epsilon(0.03));
  std::vector<double> share(5, 0.0);
  for (int c : inst.truth.hard()) share[static_cast<std::size_t>(c)] += 1.0 / static_cast<double>(spec.n);
  CHECK(share[1] == doctest::Approx(0.1).epsilon(0.2));
  CHECK(share[4] == doctest::Approx(0.4).epsilon(0.1));
}

TEST_CASE("inconsistent specs are rejected") {
  SynthSpec spec;
  spec.k = 1;
  CHECK_THROWS_AS(generate_instance(spec), std::invalid_argument);
  spec = SynthSpec{};
  spec.signal_accuracy = 0.5;  // not better than random for k = 2
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec.signal_accuracy = 1.1;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = SynthSpec{};
  spec.class_balance = {0.5, 0.6};
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = SynthSpec{};
  spec.abstain_rate = -0.1;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}

TEST_CASE("brute-force oracle agrees with the monotone chain") {
  std::mt19937_64 rng(2718);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t count = 2 + static_cast<std::size_t>(trial % 30);
    const Eigen::MatrixXd pts = trial % 2 ? fixtures::uniform_points(2, count, rng)
                                          : fixtures::lattice_points(2, count, 3, rng);
    CAPTURE(trial);
    CHECK(brute_force_vertex_oracle(ColumnCloud(pts)) == fixtures::monotone_chain_vertices(pts));
  }
  CHECK_THROWS_AS(brute_force_vertex_oracle(ColumnCloud(Eigen::MatrixXd::Zero(2, 61))), std::invalid_argument);
}

TEST_CASE("brute-force oracle is sound in higher dimensions") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 15; ++trial) {
    const ColumnCloud cloud(fixtures::lattice_points(3 + trial % 2, 25, 2, rng));
    const auto vertices = brute_force_vertex_oracle(cloud);
    for (std::size_t v : vertices) {
      std::vector<std::size_t> others;
      for (std::size_t j = 0; j < cloud.size(); ++j) {
        if ((cloud.column(j) - cloud.column(v)).cwiseAbs().maxCoeff() > kHullTolerance) others.push_back(j);
      }
      if (!others.empty()) CHECK(hull_distance(cloud.column(v), cloud.gather(others)) > kHullTolerance);
    }
    for (std::size_t j = 0; j < cloud.size(); ++j) {
      if (std::find(vertices.begin(), vertices.end(), j) != vertices.end()) continue;
      CHECK(hull_distance(cloud.column(j), cloud.gather(vertices)) <= kHullTolerance);
    }
  }
}

TEST_CASE("ablation ends inside Conv(H2)") {
  SynthSpec spec;
  spec.n = 60;
  spec.m = 10;
  spec.abstain_rate = 0.3;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    spec.seed = seed;
    spec.k = 2 + seed % 2;
    const Instance inst = generate_instance(spec);
    const SyntheticLabel out = run_ablation(inst.signals, SolverConfig{});
    CHECK(out.ablation);
    const WeakSignalMatrix reduced = reduce_signals(inst.signals, 5);
    const ColumnCloud cloud = build_A(reduced);
    const RegionStatus status = safe_region_status(init_b(reduced, out.epsilon_used).b,
                                                   static_cast<double>(spec.n), hull_decompose(cloud), cloud);
    CHECK(status == RegionStatus::kInsideH2);
    CHECK(out.epsilon_used <= epsilon_upper_bound(spec.k));
  }
}

TEST_CASE("ablation cannot enter an empty Conv(H2)") {
  const WeakSignalMatrix w = expand_pws({{1, -1}, {1, -1}}, 2, 2);
  try {
    run_ablation(w, SolverConfig{});
    FAIL("expected an annealing error");
  } catch (const AnnealError& e) {
    CHECK(e.kind() == AnnealError::Kind::kCannotEnterInterior);
  }
}

TEST_CASE("method names round trip") {
  for (Method m : {Method::kOua, Method::kMajorityVote, Method::kWeightedMajorityVote, Method::kAblation}) {
    CHECK(parse_method(to_string(m)) == m);
  }
  CHECK_THROWS_AS(parse_method("snorkel"), std::invalid_argument);
}

TEST_CASE("sweep shapes and error cells") {
  SolverConfig cfg;
  CHECK(sweep({}, {Method::kOua}, cfg).empty());

  SynthSpec spec;
  spec.n = 40;
  spec.m = 6;
  const auto rows = sweep({spec}, {Method::kMajorityVote, Method::kOua}, cfg);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].method == "mv");
  CHECK(rows[1].method == "oua");
  CHECK(std::isnan(rows[0].epsilon_used));
  CHECK_FALSE(std::isnan(rows[1].epsilon_used));
  CHECK(rows[1].error.empty());

  SynthSpec three = spec;
  three.k = 3;
  const auto mixed = sweep({three, spec}, {Method::kMajorityVote}, cfg, "f1");
  REQUIRE(mixed.size() == 2);
  CHECK_FALSE(mixed[0].error.empty());
  CHECK(std::isnan(mixed[0].value));
  CHECK(mixed[1].error.empty());
}

TEST_CASE("majority baselines are exact on perfect signals") {
  SynthSpec spec;
  spec.n = 30;
  spec.m = 4;
  spec.signal_accuracy = 1.0;
  const auto rows = sweep({spec}, {Method::kMajorityVote, Method::kWeightedMajorityVote}, SolverConfig{});
  for (const auto& row : rows) CHECK(row.value == 1.0);
}

TEST_CASE("threaded sweeps match the serial sweep") {
  std::vector<SynthSpec> specs(4);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    specs[i].n = 30;
    specs[i].m = 6;
    specs[i].seed = i;
  }
  const std::vector<Method> methods{Method::kOua, Method::kMajorityVote, Method::kAblation};
  const auto serial = sweep(specs, methods, SolverConfig{}, "acc", 1);
  const auto threaded = sweep(specs, methods, SolverConfig{}, "acc", 4);
  REQUIRE(serial.size() == threaded.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].instance_id == threaded[i].instance_id);
    CHECK(serial[i].method == threaded[i].method);
    CHECK(serial[i].value == threaded[i].value);
  }
}

TEST_CASE("sweep CSV layout") {
  std::ostringstream out;
  write_sweep_csv(out, {SweepRow{"i0_seed0", "mv", "acc", 0.5, std::nan(""), std::nan(""), 1.25, {}}});
  std::istringstream in(out.str());
  std::string header, line;
  std::getline(in, header);
  std::getline(in, line);
  CHECK(header == "instance_id,method,metric,value,epsilon_used,residual,wall_ms");
  CHECK(line == "i0_seed0,mv,acc,0.5,nan,nan,1.25");
}

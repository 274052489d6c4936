// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "irshield/errors.hpp"
#include "irshield/experiments.hpp"

using namespace irshield;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ExperimentConfig short_config(std::uint64_t seed = 1) {
  ExperimentConfig c = default_experiment();
  c.seed = seed;
  c.reference_s = 20.0;
  c.session_s = 12.0;
  c.holdout_s = 6.0;
  c.sweep_s = 10.0;
  return c;
}

Scenario seeded(std::uint64_t seed, double snr_db = 30.0) {
  Scenario s = default_scenario();
  s.seed = seed;
  s.snr_db = snr_db;
  return s;
}

}  // namespace

TEST_CASE("ping-pong trajectory") {
  Trajectory w{{{0, 0}, {3, 4}}, 1.0, 1.0};
  CHECK(w.length() == 5.0);
  CHECK(w.period() == 12.0);
  CHECK(w.position_at(0.5) == Vec2{0, 0});
  CHECK_FALSE(w.moving_at(0.5));
  const Vec2 mid = w.position_at(3.5);
  CHECK(mid.x == doctest::Approx(1.5));
  CHECK(mid.y == doctest::Approx(2.0));
  CHECK(w.moving_at(3.5));
  const Vec2 back = w.position_at(9.5);
  CHECK(back.x == doctest::Approx(1.5));
  CHECK(w.position_at(12.5) == Vec2{0, 0});
  CHECK_THROWS_AS((Trajectory{{{1, 1}}, 1.0, 0.0}.validate()), ContractViolation);
  CHECK_THROWS_AS((Trajectory{{{0, 0}, {1, 0}}, 0.0, 0.0}.validate()), ContractViolation);
}

TEST_CASE("rotating reflector state") {
  RotatingReflector r;
  r.position = {2, 2};
  r.rpm = 60.0;
  const PersonState a = r.state_at(0.0);
  CHECK(a.present);
  CHECK(std::abs(a.scatter_modulation - cdouble{1.0, 0.0}) < 1e-15);
  CHECK(a.blocking_depth_db == doctest::Approx(r.blocking_depth_db));
  const PersonState q = r.state_at(0.25);
  CHECK(std::abs(q.scatter_modulation) < 1e-12);
  CHECK(q.blocking_depth_db == doctest::Approx(0.0).epsilon(1e-12));
  r.peak_scatter_gain_db = -kInf;
  CHECK_FALSE(r.state_at(0.1).present);
}

TEST_CASE("coherence time") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g;
  std::vector<double> white(5000);
  for (auto& v : white) v = g(rng);
  CHECK(coherence_time(white, 70.0) == doctest::Approx(1.0 / 70.0));

  const double rate = 70.0;
  const double period = 6.0;
  std::vector<double> slow(static_cast<std::size_t>(100 * period * rate));
  for (std::size_t i = 0; i < slow.size(); ++i) slow[i] = std::sin(2 * kPi * i / (period * rate));
  CHECK(coherence_time(slow, rate) == doctest::Approx(period / 6.0).epsilon(0.02));

  CHECK_THROWS_AS(coherence_time(std::vector<double>(50, 1.0), 70.0), UndefinedCoherence);
  CHECK_THROWS_AS(coherence_time(std::vector<double>{1.0}, 70.0), ContractViolation);
}

TEST_CASE("sessions") {
  const Scenario quiet = seeded(3, kInf);
  const Testbed bed(quiet);

  SUBCASE("no motion, defense off, no noise: zero observation") {
    SessionOptions o;
    o.duration_s = 4.0;
    const auto r = run_session(bed, o);
    CHECK(r.obs.size() == 4 * 70 - 70 + 1);
    for (double v : r.obs.values) CHECK(v == 0.0);
    CHECK(r.subcarriers.size() == 28);
  }

  SUBCASE("defense on: every window spanning an IRS change is positive") {
    SessionOptions o;
    o.defense_on = true;
    o.duration_s = 4.0;
    o.defense.hold_probability = 0.0;
    const auto r = run_session(bed, o);
    for (double v : r.obs.values) CHECK(v > 0.0);
  }

  SUBCASE("zero active elements match the frozen surface") {
    SessionOptions o;
    o.defense_on = true;
    o.duration_s = 3.0;
    o.active = std::vector<std::size_t>{};
    const auto r = run_session(bed, o);
    for (double v : r.obs.values) CHECK(v == 0.0);
  }

  SUBCASE("too short a session is rejected") {
    SessionOptions o;
    o.duration_s = 0.5;
    CHECK_THROWS_AS(run_session(bed, o), ContractViolation);
    o.duration_s = 0.0;
    CHECK_THROWS_AS(run_session(bed, o), ContractViolation);
  }
}

TEST_CASE("a crossing walk rises above the no-motion threshold") {
  const Scenario s = seeded(2, 40.0);
  const Testbed bed(s);
  ExperimentConfig cfg = default_experiment();
  SessionOptions ref;
  ref.duration_s = 20.0;
  const auto reference = run_session(bed, ref);
  SessionOptions walk;
  walk.duration_s = 10.0;
  walk.start_index = 20 * 70;
  walk.motion = cfg.walk;
  walk.subcarriers = reference.subcarriers;
  const auto w = run_session(bed, walk);
  double peak = 0.0;
  bool crossed = false;
  for (std::size_t i = 0; i < w.obs.size(); ++i) {
    if (w.crossing_mask[i]) {
      crossed = true;
      peak = std::max(peak, w.obs.values[i]);
    }
  }
  REQUIRE(crossed);
  CHECK(peak > calibrate_threshold(reference.obs.values, 11.0));
}

TEST_CASE("walk experiment reproduces itself") {
  const Scenario s = seeded(5);
  const ExperimentConfig cfg = short_config(5);
  const WalkResult a = run_walk_experiment(s, cfg, false);
  const WalkResult b = run_walk_experiment(s, cfg, false);
  CHECK(a.walk.obs.values == b.walk.obs.values);
  CHECK(a.threshold == b.threshold);
  CHECK(a.crossing_rate >= 0.9);
  CHECK(a.holdout_fpr == 0.0);
  CHECK(a.reference.obs.first_index + a.reference.obs.size() - 1 < a.walk.obs.first_index);
}

TEST_CASE("uniform grid") {
  const Scenario s = default_scenario();
  const auto g = uniform_grid(s, 5, 4, 0.6);
  REQUIRE(g.size() == 20);
  CHECK(g.front().x == doctest::Approx(0.6));
  CHECK(g.front().y == doctest::Approx(0.6));
  CHECK(g.back().x == doctest::Approx(9.4));
  CHECK(g.back().y == doctest::Approx(6.4));
  CHECK(g[1].y == g[0].y);
  CHECK_THROWS_AS(uniform_grid(s, 0, 4, 0.6), ContractViolation);
  CHECK_THROWS_AS(uniform_grid(s, 2, 2, 4.0), InvalidScenario);
}

TEST_CASE("coverage") {
  const Scenario s = seeded(6);
  ExperimentConfig cfg = short_config(6);
  cfg.session_s = 6.0;
  cfg.jobs = 2;
  const std::vector<Vec2> cells{{4.5, 3.65}, {8.8, 6.2}};

  const CoverageResult off = run_coverage_grid(s, cfg, cells, false);
  const CoverageResult on = run_coverage_grid(s, cfg, cells, true);
  REQUIRE(off.cells.size() == 2);
  CHECK(off.cells[0].rate >= 0.9);
  for (std::size_t i = 0; i < cells.size(); ++i) CHECK(on.cells[i].rate <= off.cells[i].rate);

  cfg.jobs = 1;
  const CoverageResult serial = run_coverage_grid(s, cfg, cells, false);
  CHECK(serial.cells[0].rate == off.cells[0].rate);
  CHECK(serial.cells[1].rate_max == off.cells[1].rate_max);

  cfg.reflector.peak_scatter_gain_db = -kInf;
  const CoverageResult none = run_coverage_grid(s, cfg, cells, false);
  for (const auto& c : none.cells) CHECK(c.rate == 0.0);
}

TEST_CASE("active subsets are nested and sorted") {
  const auto small = active_subset(256, 32, 9);
  const auto big = active_subset(256, 96, 9);
  CHECK(small.size() == 32);
  CHECK(std::is_sorted(big.begin(), big.end()));
  for (auto m : small) CHECK(std::binary_search(big.begin(), big.end(), m));
  CHECK(active_subset(256, 256, 9).size() == 256);
  CHECK_THROWS_AS(active_subset(256, 257, 9), ContractViolation);
}

TEST_CASE("IRS sweeps") {
  const Scenario s = seeded(7);
  ExperimentConfig cfg = short_config(7);
  cfg.sweep_s = 6.0;

  SUBCASE("full size equals a plain defense-on session") {
    const SweepResult r = sweep_irs_size(s, cfg, {256});
    const Testbed bed(s);
    SessionOptions o;
    o.defense_on = true;
    o.duration_s = cfg.sweep_s;
    o.defense = cfg.defense;
    const auto plain = run_session(bed, o);
    const SweepCell ref = summarize(256, plain.obs, cfg.conservativeness);
    CHECK(r.cells[0].median == ref.median);
    CHECK(r.cells[0].threshold == ref.threshold);
  }

  SUBCASE("no active elements and no noise give a zero median") {
    const Scenario quiet = seeded(7, kInf);
    const SweepResult r = sweep_irs_size(quiet, cfg, {0, 32});
    CHECK(r.cells[0].median == 0.0);
    CHECK(r.cells[1].median > 0.0);
  }

  SUBCASE("distance and orientation") {
    const SweepResult d = sweep_irs_distance(s, cfg, {0.5});
    CHECK(d.cells.size() == 1);
    CHECK(d.variable == "distance");
    CHECK(sweep_irs_orientation(s, cfg, {}).cells.empty());
    CHECK_THROWS_AS(sweep_irs_distance(s, cfg, {20.0}), InvalidScenario);
  }
}

TEST_CASE("parameter study") {
  const Scenario s = seeded(8);
  ExperimentConfig cfg = short_config(8);
  const auto cells = parameter_study(s, cfg, {0.025, 0.05}, {0.0, 0.4, 0.6}, 10.0);
  REQUIRE(cells.size() == 6);
  CHECK(cells[0].progression_rate == 0.025);
  CHECK(cells[2].hold_probability == 0.6);
  CHECK(cells[3].progression_rate == 0.05);

  const auto frozen = parameter_study(s, cfg, {0.05}, {0.0, 0.99}, 20.0);
  CHECK(frozen[1].euclidean_norm < frozen[0].euclidean_norm);
  CHECK(frozen[1].median < frozen[0].median);
  CHECK_THROWS(parameter_study(s, cfg, {0.05}, {0.6}, 0.0));
}

TEST_CASE("parallel_for visits every index once and rethrows") {
  std::vector<int> hits(100, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
  CHECK_THROWS_WITH(parallel_for(10, 3,
                                 [](std::size_t i) {
                                   if (i == 4 || i == 7) throw Error("cell " + std::to_string(i));
                                 }),
                    "cell 4");
}

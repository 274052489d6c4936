// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <string>

#include "doctest.h"
#include "irshield/config.hpp"
#include "irshield/errors.hpp"

using namespace irshield;

TEST_CASE("minimal config applies every default") {
  const LoadedConfig c = parse_config("seed: 9\nanchor: [7.8, 2.5]\neavesdropper: [1.2, 4.8]\n");
  const Scenario d = default_scenario();
  CHECK(c.scenario.seed == 9);
  CHECK(c.experiment.seed == 9);
  CHECK(c.scenario.walls.size() == d.walls.size());
  CHECK(c.scenario.n_subcarriers == 56);
  CHECK(c.scenario.n_rx * c.scenario.n_tx == 9);
  CHECK(c.scenario.irs_pos.x == doctest::Approx(d.irs_pos.x));
  CHECK(c.scenario.irs_pos.y == doctest::Approx(d.irs_pos.y));
  CHECK(c.experiment.conservativeness == 11.0);
  CHECK(c.experiment.defense.progression_rate == 0.05);
  CHECK(c.experiment.defense.hold_probability == 0.6);
  CHECK(c.experiment.defense.update_rate == 20.0);
  CHECK(c.experiment.grid_columns * c.experiment.grid_rows == 20);
}

TEST_CASE("an empty document is the default scenario") {
  const LoadedConfig c = parse_config("");
  CHECK(c.scenario.seed == 1);
  CHECK(c.source == "<memory>");
  CHECK(c.config_hash == fnv1a_hex(""));
}

TEST_CASE("IRS grid of 16x16 on 43 x 35 cm") {
  const LoadedConfig c = parse_config("irs:\n  elements: 256\n  grid: 16x16\n  size: [0.43, 0.35]\n");
  const IrsLayout l = irs_layout(c.scenario);
  CHECK(l.size() == 256);
  CHECK(c.scenario.irs.width == 0.43);
  CHECK(c.scenario.irs.height == 0.35);
  CHECK_THROWS_AS(parse_config("irs:\n  elements: 100\n  grid: 16x16\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("irs:\n  grid: 16by16\n"), ValidationError);
}

TEST_CASE("value validation") {
  CHECK(parse_config("radio:\n  snr_db: -3\n").scenario.snr_db == -3.0);
  CHECK(std::isinf(parse_config("radio:\n  snr_db: .inf\n").scenario.snr_db));
  try {
    parse_config("radio:\n  n_subcarriers: -56\n");
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(e.key() == "radio.n_subcarriers");
  }
  CHECK_THROWS_AS(parse_config("defense:\n  hold_probability: 1.5\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("experiment:\n  window_s: 0.001\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("anchor: [1, 1]\neavesdropper: [1, 1]\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("anchor: [1]\n"), ValidationError);
}

TEST_CASE("unknown keys name their path") {
  try {
    parse_config("radio:\n  n_subcarier: 56\n");
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(e.key() == "radio.n_subcarier");
  }
  CHECK_THROWS_AS(parse_config("colour: blue\n"), ValidationError);
}

TEST_CASE("syntax errors carry a line number") {
  try {
    parse_config("seed: 1\nroom:\n  size: [10, 7\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() >= 3);
  }
}

TEST_CASE("IRS placement by distance and angle") {
  const LoadedConfig c = parse_config("irs:\n  distance: 0.5\n  angle_deg: 90\n");
  CHECK(distance(c.scenario.irs_pos, c.scenario.anchor_pos) == doctest::Approx(0.5));
  CHECK_THROWS_AS(parse_config("irs:\n  position: [5, 5]\n  distance: 0.5\n"), ValidationError);
  const LoadedConfig p = parse_config("irs:\n  position: [8.2, 2.5]\n  normal: [-1, 0]\n");
  CHECK(p.scenario.irs_pos == Vec2{8.2, 2.5});
  CHECK(p.scenario.irs_normal.x == doctest::Approx(-1.0));
}

TEST_CASE("experiment section") {
  const LoadedConfig c = parse_config(
      "experiment:\n"
      "  conservativeness: 3\n"
      "  walk:\n"
      "    waypoints: [[1, 1], [2, 2], [3, 1]]\n"
      "    dwell: 2\n"
      "  reflector:\n"
      "    phase_deg: 90\n"
      "  grid: {columns: 3, rows: 2}\n");
  CHECK(c.experiment.conservativeness == 3.0);
  CHECK(c.experiment.walk.waypoints.size() == 3);
  CHECK(c.experiment.walk.dwell == 2.0);
  CHECK(c.experiment.reflector.phase0 == doctest::Approx(kPi / 2));
  CHECK(c.experiment.grid_columns == 3);
  CHECK(c.experiment.grid_rows == 2);
}

TEST_CASE("FNV-1a") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("shipped configs load") {
  const LoadedConfig d = load_scenario(std::string(IRSHIELD_SOURCE_DIR) + "/configs/default.yaml");
  CHECK(d.scenario.irs.element_count() == 256);
  CHECK(d.experiment.walk.waypoints.size() == 2);
  CHECK_NOTHROW(load_scenario(std::string(IRSHIELD_SOURCE_DIR) + "/configs/quick.yaml"));
  CHECK_THROWS_AS(load_scenario("/nonexistent/irshield.yaml"), ValidationError);
}

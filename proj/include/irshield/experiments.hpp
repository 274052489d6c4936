// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "irshield/channel.hpp"
#include "irshield/irs.hpp"
#include "irshield/sensing.hpp"

namespace irshield {

// Ping-pong walk between the first and last waypoint: dwell at the start,
// walk forward, dwell at the end, walk back, repeat.
struct Trajectory {
  std::vector<Vec2> waypoints;
  double speed = 1.0;  // m/s
  double dwell = 0.0;  // s at each endpoint

  void validate() const;
  double length() const;
  double period() const;
  Vec2 position_at(double t) const;
  bool moving_at(double t) const;
};

// A sheet turning about a vertical axis. Its scatter path is modulated by
// cos(theta) e^{j theta} and it blocks nearby paths in proportion to |cos(theta)|.
struct RotatingReflector {
  Vec2 position{};
  double rpm = 20.0;
  double peak_scatter_gain_db = 25.0;  // -inf disables the reflector
  double phase0 = 0.0;                 // rad
  double blocking_radius = 0.25;
  double blocking_depth_db = 6.0;

  void validate() const;
  PersonState state_at(double t) const;
};

using Motion = std::variant<std::monostate, Trajectory, RotatingReflector>;

// Scenario, geometry and precomputed channel for repeated sessions.
class Testbed {
 public:
  explicit Testbed(Scenario scenario);

  const Scenario& scenario() const noexcept { return model_.scenario(); }
  const ChannelModel& model() const noexcept { return model_; }
  std::size_t irs_elements() const noexcept { return model_.irs_element_count(); }

 private:
  ChannelModel model_;
};

// Resting configuration of the surface, shared by all sessions of one seed.
IrsConfig initial_irs_config(std::size_t m, std::uint64_t seed);

struct SessionOptions {
  bool defense_on = false;
  Motion motion;
  double duration_s = 60.0;
  // Global frame counter of the first frame; keeps noise of consecutive
  // sessions independent while staying paired across defense on/off.
  std::uint64_t start_index = 0;
  double window_s = 1.0;
  int n_selected = 28;
  // Frozen attacker selection; when empty it is chosen from this session.
  std::optional<std::vector<int>> subcarriers;
  IrsAlgParams defense;
  std::uint64_t irs_stream = 0;
  std::optional<std::vector<std::size_t>> active;  // all elements when empty
  PersonState person;  // body parameters for trajectories; position is ignored
  bool keep_frames = false;
};

struct SessionResult {
  ObservationSeries obs;
  std::vector<int> subcarriers;
  // Per observation sample, taken at the last frame of its window.
  std::vector<std::uint8_t> motion_mask;
  std::vector<std::uint8_t> crossing_mask;
  std::vector<CsiFrame> frames;  // full-band frames when keep_frames
};

SessionResult run_session(const Testbed& bed, const SessionOptions& opt);

// Everything the experiment drivers need beyond the scenario.
struct ExperimentConfig {
  std::uint64_t seed = 1;
  double window_s = 1.0;
  double conservativeness = kDefaultConservativeness;
  int n_selected = 28;
  double reference_s = 180.0;
  double session_s = 60.0;
  double holdout_s = 30.0;
  double sweep_s = 60.0;
  IrsAlgParams defense;
  PersonState person;
  Trajectory walk;
  RotatingReflector reflector;
  int grid_columns = 5;
  int grid_rows = 4;
  double grid_margin = 0.6;  // m between the grid and the room bounding box
  int jobs = 1;
};

ExperimentConfig default_experiment();

// Walk across the anchor-eavesdropper link with a no-motion reference before
// it and a held-out no-motion segment after it, all on one frame clock.
struct WalkResult {
  bool defense_on = false;
  double conservativeness = 0.0;
  double reference_duration_s = 0.0;
  double threshold = 0.0;
  double max_threshold = 0.0;
  double crossing_rate = 0.0;  // detection rate while the person blocks the link
  double motion_rate = 0.0;    // detection rate while the person moves
  double holdout_fpr = 0.0;
  DetectionReport report;      // ROC of motion samples against the reference
  SessionResult reference;
  SessionResult walk;
  SessionResult holdout;
};

WalkResult run_walk_experiment(const Scenario& s, const ExperimentConfig& cfg, bool defense_on);

struct CoverageCell {
  Vec2 position;
  double rate = 0.0;      // under median + C * MAD
  double rate_max = 0.0;  // under the max-of-reference threshold
};

struct CoverageResult {
  bool defense_on = false;
  double conservativeness = 0.0;
  double reference_duration_s = 0.0;
  double threshold = 0.0;
  double max_threshold = 0.0;
  std::vector<CoverageCell> cells;
};

// Uniform columns x rows grid inside the room bounding box, row-major from the
// lowest y.
std::vector<Vec2> uniform_grid(const Scenario& s, int columns, int rows, double margin);

CoverageResult run_coverage_grid(const Scenario& s, const ExperimentConfig& cfg,
                                 const std::vector<Vec2>& grid, bool defense_on);

struct SweepCell {
  double value = 0.0;
  double median = 0.0;
  double p01 = 0.0;
  double p99 = 0.0;
  double mad = 0.0;
  double threshold = 0.0;
};

struct SweepResult {
  std::string variable;
  std::vector<SweepCell> cells;
};

SweepCell summarize(double value, const ObservationSeries& obs, double c);

// No-motion, defense-on sessions per value.
SweepResult sweep_irs_size(const Scenario& s, const ExperimentConfig& cfg,
                           const std::vector<int>& active_counts);
SweepResult sweep_irs_distance(const Scenario& s, const ExperimentConfig& cfg,
                               const std::vector<double>& distances);
SweepResult sweep_irs_orientation(const Scenario& s, const ExperimentConfig& cfg,
                                  const std::vector<double>& angles_deg, double radius = 0.3);

// Random nested subset: the first `count` entries of one seeded permutation, sorted.
std::vector<std::size_t> active_subset(std::size_t m, std::size_t count, std::uint64_t seed);

struct ParamStudyCell {
  double progression_rate = 0.0;
  double hold_probability = 0.0;
  double median = 0.0;
  double mad = 0.0;
  double threshold = 0.0;
  double euclidean_norm = 0.0;
  double coherence_time_s = 0.0;
};

std::vector<ParamStudyCell> parameter_study(const Scenario& s, const ExperimentConfig& cfg,
                                            const std::vector<double>& r_values,
                                            const std::vector<double>& p_values,
                                            double duration_s);

// Smallest lag at which the mean-removed, normalized autocorrelation drops
// below 0.5, in seconds; the series duration if it never does.
double coherence_time(std::span<const double> series, double sample_rate);

// Runs fn(0..n-1) on up to `jobs` threads. Each index writes only its own slot.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace irshield

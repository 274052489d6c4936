// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "irshield/geometry.hpp"
#include "irshield/irs.hpp"

namespace irshield {

using cdouble = std::complex<double>;

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kPi = 3.14159265358979323846;

// Rectangular surface of binary elements, rows stacked vertically above and
// below the horizontal simulation plane.
struct IrsGeometry {
  double width = 0.43;   // m, along the surface in the plane
  double height = 0.35;  // m, vertical extent
  int columns = 16;
  int rows = 16;

  int element_count() const { return columns * rows; }
};

struct Scenario {
  std::vector<Segment> walls;
  Vec2 anchor_pos{7.8, 2.5};
  Vec2 eve_pos{1.2, 4.8};

  bool irs_enabled = true;
  Vec2 irs_pos{};
  Vec2 irs_normal{1.0, 0.0};
  IrsGeometry irs;
  // Adds element -> wall -> eavesdropper routes alongside the direct IRS routes.
  bool irs_wall_bounce = true;

  int n_tx = 3;
  int n_rx = 3;
  double antenna_spacing = 0.0;  // m; 0 selects half a carrier wavelength
  double carrier_freq = 5.32e9;
  int n_subcarriers = 56;
  double subcarrier_spacing = 312.5e3;
  double sample_rate = 70.0;
  double snr_db = 30.0;  // +inf disables noise
  double wall_reflection_loss_db = 10.0;
  std::uint64_t seed = 1;

  // Throws InvalidScenario naming the offending field.
  void validate() const;

  double wavelength() const { return kSpeedOfLight / carrier_freq; }
  double subcarrier_freq(int k) const {
    return carrier_freq + (k - n_subcarriers / 2) * subcarrier_spacing;
  }
  double effective_antenna_spacing() const {
    return antenna_spacing > 0.0 ? antenna_spacing : 0.5 * wavelength();
  }
  std::size_t entries_per_frame() const {
    return static_cast<std::size_t>(n_subcarriers) * static_cast<std::size_t>(n_rx * n_tx);
  }
};

// The default room: 10 m x 7 m office, anchor near the right wall, eavesdropper
// near the left wall, IRS 0.3 m behind the anchor facing the eavesdropper.
Scenario default_scenario();

// Axis-aligned rectangle [0,w] x [0,h] as four wall segments.
std::vector<Segment> rectangular_room(double width, double height);

// Places the IRS at `distance` from the anchor on the side away from the
// eavesdropper, rotated by `angle_deg` around the anchor, facing the anchor.
// At 0 degrees the surface faces the eavesdropper.
void place_irs_around_anchor(Scenario& s, double distance, double angle_deg = 0.0);

struct IrsLayout {
  std::vector<Vec2> positions;    // in-plane element centres
  std::vector<double> elevations; // vertical offset of each element, m
  Vec2 normal{1.0, 0.0};

  std::size_t size() const noexcept { return positions.size(); }
};

// Row-major grid (element index = row * columns + column) centred on irs_pos.
IrsLayout irs_layout(const Scenario& s);

enum class PathKind : std::uint8_t { Los, WallReflection, IrsElement, HumanScatter };

std::string to_string(PathKind kind);

struct Path {
  PathKind kind = PathKind::Los;
  int element = -1;          // IRS element index for IrsElement paths
  std::vector<Vec2> route;   // anchor, intermediate points, eavesdropper
  // Carrier-frequency amplitude factor without the propagation phase
  // (path loss, reflection loss, obliquity, scatter modulation).
  cdouble weight{0.0, 0.0};
  double length = 0.0;       // m, total unfolded route length
  int hops = 1;              // 1: lambda/(4 pi L) family, 2: product path loss
  double blocked_atten = 1.0;
  // Horizontal components of the unit vectors from each array centre towards
  // the first / last route point; used for the far-field antenna projection.
  Vec2 departure{};
  Vec2 arrival{};

  cdouble base_gain(double carrier_freq) const;
  cdouble gain(double freq, double carrier_freq, double extra_length = 0.0) const;
};

using PathSet = std::vector<Path>;

struct PersonState {
  Vec2 position{};
  bool present = false;
  double scatter_gain_db = -5.0;
  double blocking_radius = 0.4;
  double blocking_depth_db = 10.0;
  // Extra complex factor on the scatter path (rotating reflectors); 1 for people.
  cdouble scatter_modulation{1.0, 0.0};
};

PathSet build_static_paths(const Scenario& s);

// One IrsElement path per element along anchor -> element -> eavesdropper.
PathSet build_irs_paths(const Scenario& s, const IrsLayout& layout);

// First-order element -> wall -> eavesdropper routes. Zero-gain routes are omitted.
PathSet build_irs_wall_paths(const Scenario& s, const IrsLayout& layout);

// Blocking attenuation for one route given a person.
double blocking_attenuation(const std::vector<Vec2>& route, const PersonState& person);

// Applies blocking to every path and appends the person's scatter path.
PathSet apply_motion(const PathSet& paths, const PersonState& person, const Scenario& s);

// Scatter path anchor -> person -> eavesdropper.
Path scatter_path(const PersonState& person, const Scenario& s);

// values[(k * n_tx + tx) * n_rx + rx]: subcarrier-major, column-major within a
// (n_rx x n_tx) matrix.
struct CsiFrame {
  std::uint64_t t_index = 0;
  int n_subcarriers = 0;
  int n_rx = 0;
  int n_tx = 0;
  std::vector<cdouble> values;

  std::size_t index(int k, int rx, int tx) const {
    return (static_cast<std::size_t>(k) * n_tx + tx) * n_rx + rx;
  }
  cdouble at(int k, int rx, int tx) const { return values[index(k, rx, tx)]; }
  std::size_t spatial_channels() const { return static_cast<std::size_t>(n_rx * n_tx); }
  bool shape_equals(const CsiFrame& o) const {
    return n_subcarriers == o.n_subcarriers && n_rx == o.n_rx && n_tx == o.n_tx;
  }
};

// Response of a single path over all (k, rx, tx) entries, blocking applied.
std::vector<cdouble> path_response(const Path& p, const Scenario& s);

// Last unblocked IRS sum, reused while the configuration is unchanged.
struct IrsSumCache {
  IrsConfig cfg;
  std::vector<cdouble> sum;
  bool valid = false;
};

// Precomputed per-path responses for repeated frame synthesis with one geometry.
// Immutable after construction; per-stream state lives in IrsSumCache.
class ChannelModel {
 public:
  ChannelModel(Scenario scenario, PathSet static_paths, PathSet irs_paths);

  const Scenario& scenario() const noexcept { return scenario_; }
  const PathSet& static_paths() const noexcept { return static_paths_; }
  const PathSet& irs_paths() const noexcept { return irs_paths_; }
  std::size_t irs_element_count() const noexcept { return element_count_; }

  // Noise variance per complex entry; 0 when noise is disabled.
  double noise_variance() const noexcept { return noise_variance_; }
  // Mean |H|^2 of the unblocked, IRS-off frame.
  double reference_signal_power() const noexcept { return signal_power_; }

  CsiFrame frame(const IrsConfig& cfg, const PersonState& person, std::uint64_t t_index,
                 IrsSumCache* cache = nullptr) const;
  // Same frame without noise.
  CsiFrame clean_frame(const IrsConfig& cfg, const PersonState& person, std::uint64_t t_index,
                       IrsSumCache* cache = nullptr) const;

 private:
  void irs_sum(const IrsConfig& cfg, std::span<cdouble> out) const;

  Scenario scenario_;
  PathSet static_paths_;
  PathSet irs_paths_;
  std::size_t element_count_ = 0;
  std::vector<std::vector<cdouble>> static_resp_;
  std::vector<std::vector<cdouble>> irs_route_resp_;
  std::vector<std::vector<cdouble>> element_resp_;  // sum of routes per element
  double signal_power_ = 0.0;
  double noise_variance_ = 0.0;
};

// Adds i.i.d. complex Gaussian noise drawn from the (seed, t_index) stream.
void add_noise(CsiFrame& frame, double variance, std::uint64_t seed);

// One-shot synthesis of a frame from explicit path sets.
CsiFrame channel_response(const PathSet& static_paths, const PathSet& irs_paths,
                          const IrsConfig& cfg, const PersonState& person, const Scenario& s,
                          std::uint64_t t_index);

}  // namespace irshield

// SPDX-License-Identifier: Apache-2.0

#include "irshield/channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "irshield/errors.hpp"
#include "irshield/random.hpp"

namespace irshield {

namespace {

// Scatterers closer than this to an endpoint are clamped to keep the product
// path loss finite.
constexpr double kMinScatterDistance = 0.05;

double db_to_amplitude(double db) { return std::pow(10.0, db / 20.0); }

}  // namespace

void Scenario::validate() const {
  auto fail = [](const std::string& what) { throw InvalidScenario(what); };
  if (n_tx < 1) fail("n_tx must be >= 1");
  if (n_rx < 1) fail("n_rx must be >= 1");
  if (n_subcarriers < 1) fail("n_subcarriers must be >= 1");
  if (!(sample_rate > 0.0)) fail("sample_rate must be > 0");
  if (!(carrier_freq > 0.0)) fail("carrier_freq must be > 0");
  if (!(subcarrier_spacing > 0.0)) fail("subcarrier_spacing must be > 0");
  if (!(antenna_spacing >= 0.0)) fail("antenna_spacing must be >= 0");
  if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity())
    fail("snr_db must be a number or +inf");
  if (!std::isfinite(wall_reflection_loss_db)) fail("wall_reflection_loss_db must be finite");
  if (anchor_pos == eve_pos) fail("anchor and eavesdropper positions coincide");
  for (const auto& w : walls) {
    if (w.a == w.b) fail("wall segment has zero length");
  }
  if (irs_enabled) {
    if (std::abs(norm(irs_normal) - 1.0) > 1e-9) fail("irs_normal must have unit norm");
    if (irs.columns < 1 || irs.rows < 1) fail("irs grid must have at least one element");
    if (!(irs.width > 0.0) || !(irs.height > 0.0)) fail("irs size must be positive");
  }
}

std::vector<Segment> rectangular_room(double width, double height) {
  return {{{0.0, 0.0}, {width, 0.0}},
          {{width, 0.0}, {width, height}},
          {{width, height}, {0.0, height}},
          {{0.0, height}, {0.0, 0.0}}};
}

void place_irs_around_anchor(Scenario& s, double distance, double angle_deg) {
  const Vec2 towards_eve = normalized(s.eve_pos - s.anchor_pos);
  const Vec2 facing = rotated(towards_eve, angle_deg * kPi / 180.0);
  s.irs_pos = s.anchor_pos - facing * distance;
  s.irs_normal = facing;
}

Scenario default_scenario() {
  Scenario s;
  s.walls = rectangular_room(10.0, 7.0);
  place_irs_around_anchor(s, 0.3, 0.0);
  return s;
}

IrsLayout irs_layout(const Scenario& s) {
  IrsLayout layout;
  layout.normal = s.irs_normal;
  if (!s.irs_enabled) return layout;
  const Vec2 tangent = perpendicular(s.irs_normal);
  const double pitch_u = s.irs.width / s.irs.columns;
  const double pitch_v = s.irs.height / s.irs.rows;
  const std::size_t m = static_cast<std::size_t>(s.irs.element_count());
  layout.positions.reserve(m);
  layout.elevations.reserve(m);
  for (int r = 0; r < s.irs.rows; ++r) {
    for (int c = 0; c < s.irs.columns; ++c) {
      const double u = (c - 0.5 * (s.irs.columns - 1)) * pitch_u;
      const double v = (r - 0.5 * (s.irs.rows - 1)) * pitch_v;
      layout.positions.push_back(s.irs_pos + tangent * u);
      layout.elevations.push_back(v);
    }
  }
  return layout;
}

std::string to_string(PathKind kind) {
  switch (kind) {
    case PathKind::Los: return "los";
    case PathKind::WallReflection: return "wall";
    case PathKind::IrsElement: return "irs";
    case PathKind::HumanScatter: return "scatter";
  }
  return "unknown";
}

cdouble Path::base_gain(double carrier_freq) const {
  return weight * std::polar(1.0, -2.0 * kPi * carrier_freq * length / kSpeedOfLight);
}

cdouble Path::gain(double freq, double carrier_freq, double extra_length) const {
  const double scale = std::pow(carrier_freq / freq, hops);
  return weight * scale * std::polar(1.0, -2.0 * kPi * freq * (length + extra_length) / kSpeedOfLight);
}

PathSet build_static_paths(const Scenario& s) {
  s.validate();
  const double lambda = s.wavelength();
  const double gamma = db_to_amplitude(-s.wall_reflection_loss_db);
  PathSet paths;

  const Segment direct{s.anchor_pos, s.eve_pos};
  const bool occluded = std::any_of(s.walls.begin(), s.walls.end(),
                                    [&](const Segment& w) { return segments_intersect(direct, w); });
  if (!occluded) {
    Path p;
    p.kind = PathKind::Los;
    p.route = {s.anchor_pos, s.eve_pos};
    p.length = distance(s.anchor_pos, s.eve_pos);
    p.weight = lambda / (4.0 * kPi * p.length);
    p.departure = normalized(s.eve_pos - s.anchor_pos);
    p.arrival = normalized(s.anchor_pos - s.eve_pos);
    paths.push_back(std::move(p));
  }

  for (const auto& wall : s.walls) {
    const double sa = side_of(s.anchor_pos, wall);
    const double se = side_of(s.eve_pos, wall);
    if (sa * se <= 0.0) continue;  // endpoints on opposite sides or on the wall line
    const Vec2 image = mirror(s.eve_pos, wall);
    const auto hit = intersection_point({s.anchor_pos, image}, wall);
    if (!hit) continue;
    Path p;
    p.kind = PathKind::WallReflection;
    p.route = {s.anchor_pos, *hit, s.eve_pos};
    p.length = distance(s.anchor_pos, image);
    p.weight = lambda / (4.0 * kPi * p.length) * gamma;
    p.departure = normalized(*hit - s.anchor_pos);
    p.arrival = normalized(*hit - s.eve_pos);
    paths.push_back(std::move(p));
  }
  return paths;
}

PathSet build_irs_paths(const Scenario& s, const IrsLayout& layout) {
  s.validate();
  if (layout.elevations.size() != layout.positions.size())
    throw ContractViolation("build_irs_paths: layout elevations and positions differ in length");
  const double lambda = s.wavelength();
  const double loss = lambda * lambda / ((4.0 * kPi) * (4.0 * kPi));
  PathSet paths;
  paths.reserve(layout.size());
  for (std::size_t m = 0; m < layout.size(); ++m) {
    const Vec2 e = layout.positions[m];
    const double z = layout.elevations[m];
    const Vec2 to_elem_from_anchor = e - s.anchor_pos;
    const Vec2 to_elem_from_eve = e - s.eve_pos;
    const double d1 = std::sqrt(dot(to_elem_from_anchor, to_elem_from_anchor) + z * z);
    const double d2 = std::sqrt(dot(to_elem_from_eve, to_elem_from_eve) + z * z);
    if (d1 == 0.0 || d2 == 0.0) throw InvalidScenario("IRS element coincides with an endpoint");
    const double cos_in = std::max(0.0, dot(layout.normal, -to_elem_from_anchor) / d1);
    const double cos_out = std::max(0.0, dot(layout.normal, -to_elem_from_eve) / d2);
    Path p;
    p.kind = PathKind::IrsElement;
    p.element = static_cast<int>(m);
    p.route = {s.anchor_pos, e, s.eve_pos};
    p.length = d1 + d2;
    p.hops = 2;
    p.weight = loss / (d1 * d2) * cos_in * cos_out;
    p.departure = to_elem_from_anchor / d1;
    p.arrival = to_elem_from_eve / d2;
    paths.push_back(std::move(p));
  }
  return paths;
}

PathSet build_irs_wall_paths(const Scenario& s, const IrsLayout& layout) {
  s.validate();
  const double lambda = s.wavelength();
  const double loss = lambda * lambda / ((4.0 * kPi) * (4.0 * kPi));
  const double gamma = db_to_amplitude(-s.wall_reflection_loss_db);
  PathSet paths;
  for (std::size_t m = 0; m < layout.size(); ++m) {
    const Vec2 e = layout.positions[m];
    const double z = layout.elevations[m];
    const Vec2 from_anchor = e - s.anchor_pos;
    const double d1 = std::sqrt(dot(from_anchor, from_anchor) + z * z);
    const double cos_in = dot(layout.normal, -from_anchor) / d1;
    if (!(cos_in > 0.0)) continue;
    for (const auto& wall : s.walls) {
      if (side_of(e, wall) * side_of(s.eve_pos, wall) <= 0.0) continue;
      const Vec2 image = mirror(s.eve_pos, wall);
      const auto hit = intersection_point({e, image}, wall);
      if (!hit) continue;
      const Vec2 out = image - e;
      const double horizontal = norm(out);
      const double d2 = std::sqrt(horizontal * horizontal + z * z);
      const double cos_out = dot(layout.normal, out) / d2;
      if (!(cos_out > 0.0)) continue;
      Path p;
      p.kind = PathKind::IrsElement;
      p.element = static_cast<int>(m);
      p.route = {s.anchor_pos, e, *hit, s.eve_pos};
      p.length = d1 + d2;
      p.hops = 2;
      p.weight = loss / (d1 * d2) * gamma * cos_in * cos_out;
      p.departure = from_anchor / d1;
      p.arrival = normalized(*hit - s.eve_pos) * (horizontal / d2);
      paths.push_back(std::move(p));
    }
  }
  return paths;
}

double blocking_attenuation(const std::vector<Vec2>& route, const PersonState& person) {
  if (!person.present || person.blocking_depth_db <= 0.0) return 1.0;
  double closest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < route.size(); ++i) {
    closest = std::min(closest, distance_to_segment(person.position, {route[i], route[i + 1]}));
  }
  if (!(closest < person.blocking_radius)) return 1.0;
  const double depth = 1.0 - closest / person.blocking_radius;
  return db_to_amplitude(-person.blocking_depth_db * depth);
}

Path scatter_path(const PersonState& person, const Scenario& s) {
  const double lambda = s.wavelength();
  const double d1 = std::max(kMinScatterDistance, distance(s.anchor_pos, person.position));
  const double d2 = std::max(kMinScatterDistance, distance(person.position, s.eve_pos));
  Path p;
  p.kind = PathKind::HumanScatter;
  p.route = {s.anchor_pos, person.position, s.eve_pos};
  p.length = d1 + d2;
  p.hops = 2;
  const double amp = person.scatter_gain_db == -std::numeric_limits<double>::infinity()
                         ? 0.0
                         : db_to_amplitude(person.scatter_gain_db);
  p.weight = lambda * lambda / ((4.0 * kPi) * (4.0 * kPi) * d1 * d2) * amp * person.scatter_modulation;
  p.departure = (person.position - s.anchor_pos) / d1;
  p.arrival = (person.position - s.eve_pos) / d2;
  return p;
}

PathSet apply_motion(const PathSet& paths, const PersonState& person, const Scenario& s) {
  PathSet out = paths;
  if (!person.present) {
    for (auto& p : out) p.blocked_atten = 1.0;
    return out;
  }
  for (auto& p : out) p.blocked_atten = blocking_attenuation(p.route, person);
  out.push_back(scatter_path(person, s));
  return out;
}

std::vector<cdouble> path_response(const Path& p, const Scenario& s) {
  const double spacing = s.effective_antenna_spacing();
  const Vec2 axis = perpendicular(normalized(s.eve_pos - s.anchor_pos));
  std::vector<cdouble> out(s.entries_per_frame());
  std::size_t i = 0;
  for (int k = 0; k < s.n_subcarriers; ++k) {
    const double f = s.subcarrier_freq(k);
    for (int tx = 0; tx < s.n_tx; ++tx) {
      const Vec2 tx_offset = axis * ((tx - 0.5 * (s.n_tx - 1)) * spacing);
      for (int rx = 0; rx < s.n_rx; ++rx) {
        const Vec2 rx_offset = axis * ((rx - 0.5 * (s.n_rx - 1)) * spacing);
        const double extra = -dot(tx_offset, p.departure) - dot(rx_offset, p.arrival);
        out[i++] = p.gain(f, s.carrier_freq, extra) * p.blocked_atten;
      }
    }
  }
  return out;
}

ChannelModel::ChannelModel(Scenario scenario, PathSet static_paths, PathSet irs_paths)
    : scenario_(std::move(scenario)),
      static_paths_(std::move(static_paths)),
      irs_paths_(std::move(irs_paths)) {
  scenario_.validate();
  const std::size_t n = scenario_.entries_per_frame();
  for (const auto& p : static_paths_) static_resp_.push_back(path_response(p, scenario_));

  for (const auto& p : irs_paths_) {
    if (p.element < 0) throw ContractViolation("ChannelModel: IRS path without element index");
    element_count_ = std::max(element_count_, static_cast<std::size_t>(p.element) + 1);
  }
  element_resp_.assign(element_count_, std::vector<cdouble>(n));
  for (const auto& p : irs_paths_) {
    irs_route_resp_.push_back(path_response(p, scenario_));
    auto& acc = element_resp_[static_cast<std::size_t>(p.element)];
    const auto& r = irs_route_resp_.back();
    for (std::size_t i = 0; i < n; ++i) acc[i] += r[i];
  }

  std::vector<cdouble> env(n);
  for (const auto& r : static_resp_) {
    for (std::size_t i = 0; i < n; ++i) env[i] += r[i];
  }
  double power = 0.0;
  for (const auto& v : env) power += std::norm(v);
  signal_power_ = power / static_cast<double>(n);

  if (std::isfinite(scenario_.snr_db)) {
    if (!(signal_power_ > 0.0))
      throw InvalidScenario("no static propagation path to calibrate the noise power against");
    noise_variance_ = signal_power_ / std::pow(10.0, scenario_.snr_db / 10.0);
  }
}

void ChannelModel::irs_sum(const IrsConfig& cfg, std::span<cdouble> out) const {
  std::fill(out.begin(), out.end(), cdouble{});
  for (std::size_t m = 0; m < element_count_; ++m) {
    const double r = map_coefficient(cfg[m]);
    const auto& g = element_resp_[m];
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += r * g[i];
  }
}

CsiFrame ChannelModel::clean_frame(const IrsConfig& cfg, const PersonState& person,
                                   std::uint64_t t_index, IrsSumCache* cache) const {
  if (cfg.size() != element_count_)
    throw ContractViolation("channel_response: IRS configuration length " + std::to_string(cfg.size()) +
                            " does not match " + std::to_string(element_count_) + " IRS elements");
  const Scenario& s = scenario_;
  const std::size_t n = s.entries_per_frame();
  CsiFrame f;
  f.t_index = t_index;
  f.n_subcarriers = s.n_subcarriers;
  f.n_rx = s.n_rx;
  f.n_tx = s.n_tx;
  f.values.assign(n, cdouble{});
  auto& h = f.values;

  for (std::size_t p = 0; p < static_paths_.size(); ++p) {
    const double att = blocking_attenuation(static_paths_[p].route, person);
    const auto& r = static_resp_[p];
    for (std::size_t i = 0; i < n; ++i) h[i] += att * r[i];
  }
  if (person.present) {
    const auto r = path_response(scatter_path(person, s), s);
    for (std::size_t i = 0; i < n; ++i) h[i] += r[i];
  }

  if (element_count_ > 0) {
    std::vector<cdouble> local;
    std::span<const cdouble> sum;
    if (cache) {
      if (!cache->valid || cache->cfg != cfg || cache->sum.size() != n) {
        cache->sum.resize(n);
        irs_sum(cfg, cache->sum);
        cache->cfg = cfg;
        cache->valid = true;
      }
      sum = cache->sum;
    } else {
      local.resize(n);
      irs_sum(cfg, local);
      sum = local;
    }
    for (std::size_t i = 0; i < n; ++i) h[i] += sum[i];

    if (person.present) {
      for (std::size_t p = 0; p < irs_paths_.size(); ++p) {
        const double att = blocking_attenuation(irs_paths_[p].route, person);
        if (att == 1.0) continue;
        const double r = map_coefficient(cfg[static_cast<std::size_t>(irs_paths_[p].element)]);
        const auto& g = irs_route_resp_[p];
        for (std::size_t i = 0; i < n; ++i) h[i] += r * (att - 1.0) * g[i];
      }
    }
  }
  return f;
}

CsiFrame ChannelModel::frame(const IrsConfig& cfg, const PersonState& person, std::uint64_t t_index,
                             IrsSumCache* cache) const {
  CsiFrame f = clean_frame(cfg, person, t_index, cache);
  if (noise_variance_ > 0.0) add_noise(f, noise_variance_, scenario_.seed);
  return f;
}

void add_noise(CsiFrame& frame, double variance, std::uint64_t seed) {
  Engine rng = make_engine(seed, Stream::Noise, frame.t_index);
  std::normal_distribution<double> n(0.0, std::sqrt(variance / 2.0));
  for (auto& v : frame.values) {
    const double re = n(rng);
    const double im = n(rng);
    v += cdouble(re, im);
  }
}

CsiFrame channel_response(const PathSet& static_paths, const PathSet& irs_paths, const IrsConfig& cfg,
                          const PersonState& person, const Scenario& s, std::uint64_t t_index) {
  ChannelModel model(s, static_paths, irs_paths);
  return model.frame(cfg, person, t_index);
}

}  // namespace irshield

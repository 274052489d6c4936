// SPDX-License-Identifier: Apache-2.0

#include "irshield/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numeric>
#include <thread>

#include "irshield/errors.hpp"

namespace irshield {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

ChannelModel make_model(Scenario s) {
  s.validate();
  PathSet static_paths = build_static_paths(s);
  PathSet irs_paths;
  if (s.irs_enabled) {
    const IrsLayout layout = irs_layout(s);
    irs_paths = build_irs_paths(s, layout);
    if (s.irs_wall_bounce) {
      PathSet bounced = build_irs_wall_paths(s, layout);
      irs_paths.insert(irs_paths.end(), bounced.begin(), bounced.end());
    }
  }
  return ChannelModel(std::move(s), std::move(static_paths), std::move(irs_paths));
}

struct Box {
  Vec2 lo;
  Vec2 hi;
};

std::optional<Box> room_box(const Scenario& s) {
  if (s.walls.empty()) return std::nullopt;
  Box b{s.walls.front().a, s.walls.front().a};
  for (const auto& w : s.walls) {
    for (const Vec2& p : {w.a, w.b}) {
      b.lo = {std::min(b.lo.x, p.x), std::min(b.lo.y, p.y)};
      b.hi = {std::max(b.hi.x, p.x), std::max(b.hi.y, p.y)};
    }
  }
  return b;
}

void require_irs_inside(const Scenario& s) {
  const auto box = room_box(s);
  if (!box) return;
  for (const Vec2& p : irs_layout(s).positions) {
    if (!(p.x > box->lo.x && p.x < box->hi.x && p.y > box->lo.y && p.y < box->hi.y))
      throw InvalidScenario("IRS at (" + std::to_string(s.irs_pos.x) + ", " + std::to_string(s.irs_pos.y) +
                            ") extends outside the room");
  }
}

std::size_t frame_count(double duration_s, double sample_rate) {
  const double n = std::round(duration_s * sample_rate);
  return n > 0.0 ? static_cast<std::size_t>(n) : 0;
}

double rate_where(const std::vector<double>& values, const std::vector<std::uint8_t>& mask, double u) {
  std::size_t n = 0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!mask[i]) continue;
    ++n;
    hits += values[i] > u;
  }
  return n ? static_cast<double>(hits) / static_cast<double>(n) : 0.0;
}

double fraction_above(const std::vector<double>& values, double u) {
  if (values.empty()) return 0.0;
  const auto hits = std::count_if(values.begin(), values.end(), [u](double v) { return v > u; });
  return static_cast<double>(hits) / static_cast<double>(values.size());
}

SessionOptions quiet_session(const ExperimentConfig& cfg, bool defense_on) {
  SessionOptions o;
  o.defense_on = defense_on;
  o.window_s = cfg.window_s;
  o.n_selected = cfg.n_selected;
  o.defense = cfg.defense;
  o.person = cfg.person;
  return o;
}

}  // namespace

void Trajectory::validate() const {
  if (waypoints.size() < 2) throw ContractViolation("trajectory needs at least two waypoints");
  if (!(speed > 0.0)) throw ContractViolation("trajectory speed must be positive");
  if (!(dwell >= 0.0)) throw ContractViolation("trajectory dwell must be nonnegative");
  if (!(length() > 0.0)) throw ContractViolation("trajectory has zero length");
}

double Trajectory::length() const {
  double l = 0.0;
  for (std::size_t i = 1; i < waypoints.size(); ++i) l += distance(waypoints[i - 1], waypoints[i]);
  return l;
}

double Trajectory::period() const { return 2.0 * (dwell + length() / speed); }

Vec2 Trajectory::position_at(double t) const {
  const double travel = length() / speed;
  double tau = std::fmod(std::max(t, 0.0), period());
  double along = 0.0;
  if (tau < dwell) {
    along = 0.0;
  } else if (tau < dwell + travel) {
    along = (tau - dwell) * speed;
  } else if (tau < 2.0 * dwell + travel) {
    along = length();
  } else {
    along = length() - (tau - 2.0 * dwell - travel) * speed;
  }
  for (std::size_t i = 1; i < waypoints.size(); ++i) {
    const double seg = distance(waypoints[i - 1], waypoints[i]);
    if (along <= seg || i + 1 == waypoints.size()) {
      const double f = seg > 0.0 ? std::clamp(along / seg, 0.0, 1.0) : 0.0;
      return waypoints[i - 1] + (waypoints[i] - waypoints[i - 1]) * f;
    }
    along -= seg;
  }
  return waypoints.back();
}

bool Trajectory::moving_at(double t) const {
  const double travel = length() / speed;
  const double tau = std::fmod(std::max(t, 0.0), period());
  return (tau >= dwell && tau < dwell + travel) || tau >= 2.0 * dwell + travel;
}

void RotatingReflector::validate() const {
  if (!(rpm > 0.0)) throw ContractViolation("reflector rpm must be positive");
  if (!(blocking_radius > 0.0)) throw ContractViolation("reflector blocking radius must be positive");
  if (!(blocking_depth_db >= 0.0)) throw ContractViolation("reflector blocking depth must be nonnegative");
}

PersonState RotatingReflector::state_at(double t) const {
  PersonState p;
  p.position = position;
  if (peak_scatter_gain_db == kNegInf) return p;
  const double theta = 2.0 * kPi * (rpm / 60.0) * t + phase0;
  const double c = std::cos(theta);
  p.present = true;
  p.scatter_gain_db = peak_scatter_gain_db;
  p.blocking_radius = blocking_radius;
  p.blocking_depth_db = blocking_depth_db * std::abs(c);
  p.scatter_modulation = c * std::polar(1.0, theta);
  return p;
}

Testbed::Testbed(Scenario scenario) : model_(make_model(std::move(scenario))) {}

IrsConfig initial_irs_config(std::size_t m, std::uint64_t seed) {
  Engine rng = make_engine(seed, Stream::Irs, 0);
  return IrsConfig::random(m, rng);
}

SessionResult run_session(const Testbed& bed, const SessionOptions& opt) {
  const Scenario& s = bed.scenario();
  const double rate = s.sample_rate;
  const std::size_t n_w = window_samples(opt.window_s, rate);
  const std::size_t n_frames = frame_count(opt.duration_s, rate);
  if (n_frames < n_w)
    throw ContractViolation("session of " + std::to_string(opt.duration_s) + " s is shorter than the " +
                            std::to_string(opt.window_s) + " s window");
  const std::size_t m = bed.irs_elements();
  if (opt.defense_on && m == 0) throw InvalidScenario("defense requested but the scenario has no IRS");
  if (const auto* walk = std::get_if<Trajectory>(&opt.motion)) walk->validate();
  if (const auto* refl = std::get_if<RotatingReflector>(&opt.motion)) refl->validate();

  const IrsConfig resting = initial_irs_config(m, s.seed);
  const std::uint64_t alg_seed = derive_seed(s.seed, Stream::Irs, 1 + opt.irs_stream);
  IrsAlgState alg = opt.active ? IrsAlgState(resting, opt.defense, alg_seed, *opt.active)
                               : IrsAlgState(resting, opt.defense, alg_seed);
  IrsSumCache cache;
  std::size_t ticks = 0;

  SessionResult out;
  MagnitudeTrace trace(s.n_subcarriers, static_cast<int>(s.n_rx * s.n_tx));
  std::vector<std::uint8_t> moving(n_frames, 0);
  std::vector<std::uint8_t> crossing(n_frames, 0);
  const Segment link{s.anchor_pos, s.eve_pos};
  for (std::size_t i = 0; i < n_frames; ++i) {
    const double t = static_cast<double>(i) / rate;
    if (opt.defense_on) {
      const auto due = static_cast<std::size_t>(std::floor(t * opt.defense.update_rate + 1e-9));
      for (; ticks < due; ++ticks) alg.step();
    }
    PersonState person;
    if (const auto* walk = std::get_if<Trajectory>(&opt.motion)) {
      person = opt.person;
      person.present = true;
      person.position = walk->position_at(t);
      moving[i] = walk->moving_at(t);
    } else if (const auto* refl = std::get_if<RotatingReflector>(&opt.motion)) {
      person = refl->state_at(t);
      moving[i] = person.present;
    }
    crossing[i] = person.present && distance_to_segment(person.position, link) < person.blocking_radius;
    const IrsConfig& cfg = opt.defense_on ? alg.config() : resting;
    CsiFrame f = bed.model().frame(cfg, person, opt.start_index + i, &cache);
    trace.append(f);
    if (opt.keep_frames) out.frames.push_back(std::move(f));
  }

  out.subcarriers = opt.subcarriers ? *opt.subcarriers : select_subcarriers(trace, opt.n_selected);
  out.obs = observe(trace, out.subcarriers, rate, opt.window_s, opt.start_index);
  out.obs.meta.source = "simulation";
  out.obs.meta.seed = s.seed;
  out.motion_mask.assign(moving.begin() + static_cast<std::ptrdiff_t>(n_w - 1), moving.end());
  out.crossing_mask.assign(crossing.begin() + static_cast<std::ptrdiff_t>(n_w - 1), crossing.end());
  return out;
}

ExperimentConfig default_experiment() {
  ExperimentConfig c;
  c.walk.waypoints = {{4.2, 0.6}, {5.0, 6.4}};
  c.reflector.position = {4.6, 3.5};
  return c;
}

WalkResult run_walk_experiment(const Scenario& s, const ExperimentConfig& cfg, bool defense_on) {
  const Testbed bed(s);
  const double rate = bed.scenario().sample_rate;
  WalkResult r;
  r.defense_on = defense_on;
  r.conservativeness = cfg.conservativeness;
  r.reference_duration_s = cfg.reference_s;

  SessionOptions ref = quiet_session(cfg, defense_on);
  ref.duration_s = cfg.reference_s;
  ref.irs_stream = 0;
  r.reference = run_session(bed, ref);

  SessionOptions walk = quiet_session(cfg, defense_on);
  walk.duration_s = cfg.session_s;
  walk.start_index = frame_count(cfg.reference_s, rate);
  walk.irs_stream = 1;
  walk.motion = cfg.walk;
  walk.subcarriers = r.reference.subcarriers;
  r.walk = run_session(bed, walk);

  SessionOptions hold = quiet_session(cfg, defense_on);
  hold.duration_s = cfg.holdout_s;
  hold.start_index = walk.start_index + frame_count(cfg.session_s, rate);
  hold.irs_stream = 2;
  hold.subcarriers = r.reference.subcarriers;
  r.holdout = run_session(bed, hold);

  const auto& ref_values = r.reference.obs.values;
  r.threshold = calibrate_threshold(ref_values, cfg.conservativeness);
  r.max_threshold = max_threshold(ref_values);

  std::vector<double> motion;
  for (std::size_t i = 0; i < r.walk.obs.size(); ++i) {
    if (r.walk.motion_mask[i]) motion.push_back(r.walk.obs.values[i]);
  }
  if (motion.empty()) throw ContractViolation("walk session contains no motion samples");
  r.report = evaluate(motion, ref_values, r.threshold);
  r.motion_rate = r.report.detection_rate;
  r.crossing_rate = rate_where(r.walk.obs.values, r.walk.crossing_mask, r.threshold);
  r.holdout_fpr = fraction_above(r.holdout.obs.values, r.threshold);
  return r;
}

std::vector<Vec2> uniform_grid(const Scenario& s, int columns, int rows, double margin) {
  if (columns < 1 || rows < 1) throw ContractViolation("grid needs at least one column and one row");
  const auto box = room_box(s);
  if (!box) throw InvalidScenario("a coverage grid needs room walls");
  const Vec2 lo = box->lo + Vec2{margin, margin};
  const Vec2 hi = box->hi - Vec2{margin, margin};
  if (!(lo.x < hi.x && lo.y < hi.y)) throw InvalidScenario("grid margin leaves no room interior");
  auto coord = [](double a, double b, int i, int n) {
    return n == 1 ? 0.5 * (a + b) : a + (b - a) * i / (n - 1);
  };
  std::vector<Vec2> grid;
  grid.reserve(static_cast<std::size_t>(columns * rows));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < columns; ++c) grid.push_back({coord(lo.x, hi.x, c, columns), coord(lo.y, hi.y, r, rows)});
  }
  return grid;
}

CoverageResult run_coverage_grid(const Scenario& s, const ExperimentConfig& cfg, const std::vector<Vec2>& grid,
                                 bool defense_on) {
  if (grid.empty()) throw ContractViolation("coverage grid is empty");
  const Testbed bed(s);
  const double rate = bed.scenario().sample_rate;
  CoverageResult res;
  res.defense_on = defense_on;
  res.conservativeness = cfg.conservativeness;
  res.reference_duration_s = cfg.reference_s;

  SessionOptions ref = quiet_session(cfg, defense_on);
  ref.duration_s = cfg.reference_s;
  const SessionResult reference = run_session(bed, ref);
  res.threshold = calibrate_threshold(reference.obs.values, cfg.conservativeness);
  res.max_threshold = max_threshold(reference.obs.values);

  const std::size_t n_ref = frame_count(cfg.reference_s, rate);
  const std::size_t n_cell = frame_count(cfg.session_s, rate);
  res.cells.resize(grid.size());
  parallel_for(grid.size(), cfg.jobs, [&](std::size_t i) {
    SessionOptions o = quiet_session(cfg, defense_on);
    o.duration_s = cfg.session_s;
    o.start_index = n_ref + i * n_cell;
    o.irs_stream = 1 + i;
    RotatingReflector refl = cfg.reflector;
    refl.position = grid[i];
    o.motion = refl;
    o.subcarriers = reference.subcarriers;
    const SessionResult cell = run_session(bed, o);
    res.cells[i] = {grid[i], fraction_above(cell.obs.values, res.threshold),
                    fraction_above(cell.obs.values, res.max_threshold)};
  });
  return res;
}

SweepCell summarize(double value, const ObservationSeries& obs, double c) {
  SweepCell cell;
  cell.value = value;
  cell.median = median(obs.values);
  cell.p01 = percentile(obs.values, 0.01);
  cell.p99 = percentile(obs.values, 0.99);
  cell.mad = median_absolute_deviation(obs.values);
  cell.threshold = cell.median + c * cell.mad;
  return cell;
}

std::vector<std::size_t> active_subset(std::size_t m, std::size_t count, std::uint64_t seed) {
  if (count > m)
    throw ContractViolation("active element count " + std::to_string(count) + " exceeds " + std::to_string(m));
  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Engine rng = make_engine(seed, Stream::Layout, 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  perm.resize(count);
  std::sort(perm.begin(), perm.end());
  return perm;
}

SweepResult sweep_irs_size(const Scenario& s, const ExperimentConfig& cfg, const std::vector<int>& active_counts) {
  SweepResult res{"size", {}};
  if (active_counts.empty()) return res;
  const Testbed bed(s);
  const std::size_t m = bed.irs_elements();
  for (int count : active_counts) {
    if (count < 0 || static_cast<std::size_t>(count) > m)
      throw ContractViolation("active element count " + std::to_string(count) + " outside [0, " +
                              std::to_string(m) + "]");
  }
  res.cells.resize(active_counts.size());
  parallel_for(active_counts.size(), cfg.jobs, [&](std::size_t i) {
    SessionOptions o = quiet_session(cfg, true);
    o.duration_s = cfg.sweep_s;
    o.active = active_subset(m, static_cast<std::size_t>(active_counts[i]), s.seed);
    res.cells[i] = summarize(active_counts[i], run_session(bed, o).obs, cfg.conservativeness);
  });
  return res;
}

SweepResult sweep_irs_distance(const Scenario& s, const ExperimentConfig& cfg, const std::vector<double>& distances) {
  SweepResult res{"distance", {}};
  if (!s.irs_enabled) throw InvalidScenario("distance sweep requires an IRS");
  const Vec2 axis = normalized(s.irs_pos - s.anchor_pos);
  std::vector<Scenario> cells;
  for (double d : distances) {
    if (!(d > 0.0)) throw ContractViolation("IRS distance must be positive");
    Scenario sc = s;
    sc.irs_pos = s.anchor_pos + axis * d;
    require_irs_inside(sc);
    cells.push_back(std::move(sc));
  }
  res.cells.resize(cells.size());
  parallel_for(cells.size(), cfg.jobs, [&](std::size_t i) {
    SessionOptions o = quiet_session(cfg, true);
    o.duration_s = cfg.sweep_s;
    res.cells[i] = summarize(distances[i], run_session(Testbed(cells[i]), o).obs, cfg.conservativeness);
  });
  return res;
}

SweepResult sweep_irs_orientation(const Scenario& s, const ExperimentConfig& cfg,
                                  const std::vector<double>& angles_deg, double radius) {
  SweepResult res{"orientation", {}};
  if (!s.irs_enabled) throw InvalidScenario("orientation sweep requires an IRS");
  if (!(radius > 0.0)) throw ContractViolation("IRS orbit radius must be positive");
  std::vector<Scenario> cells;
  for (double a : angles_deg) {
    Scenario sc = s;
    place_irs_around_anchor(sc, radius, a);
    require_irs_inside(sc);
    cells.push_back(std::move(sc));
  }
  res.cells.resize(cells.size());
  parallel_for(cells.size(), cfg.jobs, [&](std::size_t i) {
    SessionOptions o = quiet_session(cfg, true);
    o.duration_s = cfg.sweep_s;
    res.cells[i] = summarize(angles_deg[i], run_session(Testbed(cells[i]), o).obs, cfg.conservativeness);
  });
  return res;
}

std::vector<ParamStudyCell> parameter_study(const Scenario& s, const ExperimentConfig& cfg,
                                            const std::vector<double>& r_values,
                                            const std::vector<double>& p_values, double duration_s) {
  if (r_values.empty() || p_values.empty()) throw ContractViolation("parameter grids must be nonempty");
  if (!(duration_s > 0.0)) throw ContractViolation("parameter study needs a positive duration");
  const Testbed bed(s);
  std::vector<ParamStudyCell> cells(r_values.size() * p_values.size());
  parallel_for(cells.size(), cfg.jobs, [&](std::size_t i) {
    ParamStudyCell& c = cells[i];
    c.progression_rate = r_values[i / p_values.size()];
    c.hold_probability = p_values[i % p_values.size()];
    SessionOptions o = quiet_session(cfg, true);
    o.duration_s = duration_s;
    o.defense.progression_rate = c.progression_rate;
    o.defense.hold_probability = c.hold_probability;
    const ObservationSeries obs = run_session(bed, o).obs;
    c.median = median(obs.values);
    c.mad = median_absolute_deviation(obs.values);
    c.threshold = c.median + cfg.conservativeness * c.mad;
    c.euclidean_norm = std::sqrt(std::inner_product(obs.values.begin(), obs.values.end(), obs.values.begin(), 0.0));
    c.coherence_time_s = coherence_time(obs.values, obs.sample_rate);
  });
  return cells;
}

double coherence_time(std::span<const double> x, double sample_rate) {
  if (x.size() < 2) throw ContractViolation("coherence_time: need at least two samples");
  if (!(sample_rate > 0.0)) throw ContractViolation("coherence_time: sample rate must be positive");
  if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); }))
    throw UndefinedCoherence("coherence_time: constant series");
  const std::size_t n = x.size();
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  std::vector<double> d(n);
  std::transform(x.begin(), x.end(), d.begin(), [mean](double v) { return v - mean; });
  const double var = std::inner_product(d.begin(), d.end(), d.begin(), 0.0);
  if (!(var > 0.0)) throw UndefinedCoherence("coherence_time: zero variance");
  for (std::size_t lag = 1; lag < n; ++lag) {
    double acc = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) acc += d[i] * d[i + lag];
    if (acc / var < 0.5) return static_cast<double>(lag) / sample_rate;
  }
  return static_cast<double>(n) / sample_rate;
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, jobs > 1 ? static_cast<std::size_t>(jobs) : 1);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace irshield

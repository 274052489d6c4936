// SPDX-License-Identifier: Apache-2.0

#include "irshield/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <optional>
#include <sstream>

#include "irshield/errors.hpp"

namespace irshield {

namespace {

std::size_t line_of(const YAML::Node& n) {
  const auto mark = n.Mark();
  return mark.line >= 0 ? static_cast<std::size_t>(mark.line) + 1 : 0;
}

[[noreturn]] void invalid(const std::string& key, const YAML::Node& n, const std::string& what) {
  const std::size_t line = line_of(n);
  throw ValidationError(key, line ? what + " (line " + std::to_string(line) + ")" : what);
}

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

// A mapping section with a fixed set of allowed keys.
class Section {
 public:
  Section(YAML::Node node, std::string path, std::initializer_list<const char*> allowed)
      : node_(std::move(node)), path_(std::move(path)) {
    if (!node_ || node_.IsNull()) return;
    if (!node_.IsMap()) invalid(path_.empty() ? "<root>" : path_, node_, "expected a mapping");
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      bool known = false;
      for (const char* a : allowed) known = known || key == a;
      if (!known) invalid(join(path_, key), kv.first, "unknown key");
    }
  }

  bool has(const char* key) const { return node_ && node_.IsMap() && node_[key]; }
  YAML::Node get(const char* key) const { return has(key) ? node_[key] : YAML::Node(); }
  std::string key(const char* k) const { return join(path_, k); }

  double number(const char* k, double fallback) const {
    if (!has(k)) return fallback;
    return parse_number(get(k), key(k));
  }

  int integer(const char* k, int fallback) const {
    if (!has(k)) return fallback;
    const double v = number(k, 0.0);
    if (!(std::floor(v) == v) || std::abs(v) > std::numeric_limits<int>::max())
      invalid(key(k), get(k), "expected an integer");
    return static_cast<int>(v);
  }

  bool flag(const char* k, bool fallback) const {
    if (!has(k)) return fallback;
    try {
      return get(k).as<bool>();
    } catch (const YAML::Exception&) {
      invalid(key(k), get(k), "expected true or false");
    }
  }

  Vec2 point(const char* k, Vec2 fallback) const {
    if (!has(k)) return fallback;
    return parse_point(get(k), key(k));
  }

  static double parse_number(const YAML::Node& n, const std::string& key) {
    if (!n.IsScalar()) invalid(key, n, "expected a number");
    const std::string text = n.Scalar();
    if (text == "inf" || text == ".inf" || text == "+inf" || text == "+.inf")
      return std::numeric_limits<double>::infinity();
    if (text == "-inf" || text == "-.inf") return -std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(text, &used);
    } catch (const std::exception&) {
      invalid(key, n, "expected a number, got '" + text + "'");
    }
    if (used != text.size() || std::isnan(v)) invalid(key, n, "expected a number, got '" + text + "'");
    return v;
  }

  static Vec2 parse_point(const YAML::Node& n, const std::string& key) {
    if (!n.IsSequence() || n.size() != 2) invalid(key, n, "expected [x, y]");
    const Vec2 p{parse_number(n[0], key), parse_number(n[1], key)};
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) invalid(key, n, "coordinates must be finite");
    return p;
  }

 private:
  YAML::Node node_;
  std::string path_;
};

void require(bool ok, const Section& sec, const char* k, const std::string& what) {
  if (!ok) invalid(sec.key(k), sec.get(k), what);
}

std::uint64_t parse_seed(const YAML::Node& n) {
  if (!n.IsScalar()) invalid("seed", n, "expected an unsigned 64-bit integer");
  const std::string text = n.Scalar();
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos)
    invalid("seed", n, "expected an unsigned 64-bit integer");
  try {
    return std::stoull(text);
  } catch (const std::exception&) {
    invalid("seed", n, "out of range for a 64-bit integer");
  }
}

void read_room(const Section& room, Scenario& s) {
  if (room.has("size") && room.has("walls")) invalid(room.key("walls"), room.get("walls"), "give either size or walls");
  if (room.has("size")) {
    const Vec2 size = room.point("size", {});
    require(size.x > 0.0 && size.y > 0.0, room, "size", "room dimensions must be positive");
    s.walls = rectangular_room(size.x, size.y);
  }
  if (room.has("walls")) {
    const YAML::Node walls = room.get("walls");
    if (!walls.IsSequence()) invalid(room.key("walls"), walls, "expected a list of [x1, y1, x2, y2]");
    s.walls.clear();
    for (const auto& w : walls) {
      if (!w.IsSequence() || w.size() != 4) invalid(room.key("walls"), w, "expected [x1, y1, x2, y2]");
      Segment seg{{Section::parse_number(w[0], room.key("walls")), Section::parse_number(w[1], room.key("walls"))},
                  {Section::parse_number(w[2], room.key("walls")), Section::parse_number(w[3], room.key("walls"))}};
      if (seg.a == seg.b) invalid(room.key("walls"), w, "wall has zero length");
      s.walls.push_back(seg);
    }
  }
  s.wall_reflection_loss_db = room.number("wall_reflection_loss_db", s.wall_reflection_loss_db);
  require(std::isfinite(s.wall_reflection_loss_db), room, "wall_reflection_loss_db", "must be finite");
}

void read_irs(const Section& irs, Scenario& s) {
  s.irs_enabled = irs.flag("enabled", s.irs_enabled);
  s.irs_wall_bounce = irs.flag("wall_bounce", s.irs_wall_bounce);
  if (irs.has("grid")) {
    const std::string grid = irs.get("grid").as<std::string>();
    int cols = 0;
    int rows = 0;
    char x = 0;
    char extra = 0;
    if (std::sscanf(grid.c_str(), "%d%c%d%c", &cols, &x, &rows, &extra) != 3 || (x != 'x' && x != 'X') ||
        cols < 1 || rows < 1)
      invalid(irs.key("grid"), irs.get("grid"), "expected COLUMNSxROWS such as 16x16");
    s.irs.columns = cols;
    s.irs.rows = rows;
  }
  if (irs.has("elements")) {
    const int m = irs.integer("elements", 0);
    require(m >= 1, irs, "elements", "must be at least 1");
    if (!irs.has("grid")) {
      const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(m))));
      require(side * side == m, irs, "elements", "needs a grid unless it is a perfect square");
      s.irs.columns = s.irs.rows = side;
    }
    require(s.irs.element_count() == m, irs, "elements", "does not match the grid");
  }
  if (irs.has("size")) {
    const Vec2 size = irs.point("size", {});
    require(size.x > 0.0 && size.y > 0.0, irs, "size", "surface dimensions must be positive");
    s.irs.width = size.x;
    s.irs.height = size.y;
  }
  if (irs.has("position") && (irs.has("distance") || irs.has("angle_deg")))
    invalid(irs.key("position"), irs.get("position"), "give either position/normal or distance/angle_deg");
  if (irs.has("position")) {
    s.irs_pos = irs.point("position", {});
    const Vec2 n = irs.point("normal", normalized(s.eve_pos - s.irs_pos));
    require(norm(n) > 0.0, irs, "normal", "must be nonzero");
    s.irs_normal = normalized(n);
  } else {
    if (irs.has("normal")) invalid(irs.key("normal"), irs.get("normal"), "requires irs.position");
    const double dist = irs.number("distance", 0.3);
    require(dist > 0.0, irs, "distance", "must be positive");
    place_irs_around_anchor(s, dist, irs.number("angle_deg", 0.0));
  }
}

void read_radio(const Section& radio, Scenario& s) {
  s.n_tx = radio.integer("n_tx", s.n_tx);
  require(s.n_tx >= 1, radio, "n_tx", "must be at least 1");
  s.n_rx = radio.integer("n_rx", s.n_rx);
  require(s.n_rx >= 1, radio, "n_rx", "must be at least 1");
  s.antenna_spacing = radio.number("antenna_spacing", s.antenna_spacing);
  require(s.antenna_spacing >= 0.0 && std::isfinite(s.antenna_spacing), radio, "antenna_spacing",
          "must be >= 0 (0 selects half a wavelength)");
  s.carrier_freq = radio.number("carrier_freq", s.carrier_freq);
  require(s.carrier_freq > 0.0 && std::isfinite(s.carrier_freq), radio, "carrier_freq", "must be positive");
  s.n_subcarriers = radio.integer("n_subcarriers", s.n_subcarriers);
  require(s.n_subcarriers >= 1, radio, "n_subcarriers", "must be at least 1");
  s.subcarrier_spacing = radio.number("subcarrier_spacing", s.subcarrier_spacing);
  require(s.subcarrier_spacing > 0.0 && std::isfinite(s.subcarrier_spacing), radio, "subcarrier_spacing",
          "must be positive");
  s.sample_rate = radio.number("sample_rate", s.sample_rate);
  require(s.sample_rate > 0.0 && std::isfinite(s.sample_rate), radio, "sample_rate", "must be positive");
  s.snr_db = radio.number("snr_db", s.snr_db);
  require(s.snr_db > -std::numeric_limits<double>::infinity(), radio, "snr_db", "must be a number or inf");
}

void read_defense(const Section& d, IrsAlgParams& p) {
  p.progression_rate = d.number("progression_rate", p.progression_rate);
  require(p.progression_rate > 0.0 && p.progression_rate <= 0.5, d, "progression_rate", "must lie in (0, 0.5]");
  p.hold_probability = d.number("hold_probability", p.hold_probability);
  require(p.hold_probability >= 0.0 && p.hold_probability < 1.0, d, "hold_probability", "must lie in [0, 1)");
  p.update_rate = d.number("update_rate", p.update_rate);
  require(p.update_rate > 0.0 && std::isfinite(p.update_rate), d, "update_rate", "must be positive");
  p.inversion_enabled = d.flag("inversion", p.inversion_enabled);
}

void read_experiment(const Section& e, ExperimentConfig& c) {
  auto positive = [&](const char* k, double& v) {
    v = e.number(k, v);
    require(v > 0.0 && std::isfinite(v), e, k, "must be positive");
  };
  positive("window_s", c.window_s);
  positive("reference_s", c.reference_s);
  positive("session_s", c.session_s);
  positive("holdout_s", c.holdout_s);
  positive("sweep_s", c.sweep_s);
  c.conservativeness = e.number("conservativeness", c.conservativeness);
  require(std::isfinite(c.conservativeness) && c.conservativeness >= 0.0, e, "conservativeness",
          "must be nonnegative");
  c.n_selected = e.integer("n_selected", c.n_selected);
  require(c.n_selected >= 1, e, "n_selected", "must be at least 1");
  c.jobs = e.integer("jobs", c.jobs);
  require(c.jobs >= 1, e, "jobs", "must be at least 1");

  const Section walk(e.get("walk"), e.key("walk"), {"waypoints", "speed", "dwell"});
  if (walk.has("waypoints")) {
    const YAML::Node wp = walk.get("waypoints");
    if (!wp.IsSequence() || wp.size() < 2) invalid(walk.key("waypoints"), wp, "expected at least two [x, y] points");
    c.walk.waypoints.clear();
    for (const auto& p : wp) c.walk.waypoints.push_back(Section::parse_point(p, walk.key("waypoints")));
  }
  c.walk.speed = walk.number("speed", c.walk.speed);
  require(c.walk.speed > 0.0, walk, "speed", "must be positive");
  c.walk.dwell = walk.number("dwell", c.walk.dwell);
  require(c.walk.dwell >= 0.0, walk, "dwell", "must be nonnegative");

  const Section person(e.get("person"), e.key("person"), {"scatter_gain_db", "blocking_radius", "blocking_depth_db"});
  c.person.scatter_gain_db = person.number("scatter_gain_db", c.person.scatter_gain_db);
  c.person.blocking_radius = person.number("blocking_radius", c.person.blocking_radius);
  require(c.person.blocking_radius > 0.0, person, "blocking_radius", "must be positive");
  c.person.blocking_depth_db = person.number("blocking_depth_db", c.person.blocking_depth_db);
  require(c.person.blocking_depth_db >= 0.0, person, "blocking_depth_db", "must be nonnegative");

  const Section refl(e.get("reflector"), e.key("reflector"),
                     {"position", "rpm", "peak_scatter_gain_db", "phase_deg", "blocking_radius", "blocking_depth_db"});
  c.reflector.position = refl.point("position", c.reflector.position);
  c.reflector.rpm = refl.number("rpm", c.reflector.rpm);
  require(c.reflector.rpm > 0.0, refl, "rpm", "must be positive");
  c.reflector.peak_scatter_gain_db = refl.number("peak_scatter_gain_db", c.reflector.peak_scatter_gain_db);
  c.reflector.phase0 = refl.number("phase_deg", c.reflector.phase0 * 180.0 / kPi) * kPi / 180.0;
  c.reflector.blocking_radius = refl.number("blocking_radius", c.reflector.blocking_radius);
  require(c.reflector.blocking_radius > 0.0, refl, "blocking_radius", "must be positive");
  c.reflector.blocking_depth_db = refl.number("blocking_depth_db", c.reflector.blocking_depth_db);
  require(c.reflector.blocking_depth_db >= 0.0, refl, "blocking_depth_db", "must be nonnegative");

  const Section grid(e.get("grid"), e.key("grid"), {"columns", "rows", "margin"});
  c.grid_columns = grid.integer("columns", c.grid_columns);
  require(c.grid_columns >= 1, grid, "columns", "must be at least 1");
  c.grid_rows = grid.integer("rows", c.grid_rows);
  require(c.grid_rows >= 1, grid, "rows", "must be at least 1");
  c.grid_margin = grid.number("margin", c.grid_margin);
  require(c.grid_margin >= 0.0, grid, "margin", "must be nonnegative");
}

}  // namespace

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

LoadedConfig parse_config(std::string_view text, std::string source) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ParseError(e.msg, e.mark.line >= 0 ? static_cast<std::size_t>(e.mark.line) + 1 : 0);
  }

  LoadedConfig out;
  out.source = std::move(source);
  out.config_hash = fnv1a_hex(text);
  out.scenario = default_scenario();
  out.experiment = default_experiment();
  Scenario& s = out.scenario;

  try {
    const Section top(root, "", {"seed", "room", "anchor", "eavesdropper", "irs", "radio", "defense", "experiment"});
    if (top.has("seed")) s.seed = parse_seed(top.get("seed"));
    read_room(Section(top.get("room"), "room", {"size", "walls", "wall_reflection_loss_db"}), s);
    s.anchor_pos = top.point("anchor", s.anchor_pos);
    s.eve_pos = top.point("eavesdropper", s.eve_pos);
    if (s.anchor_pos == s.eve_pos) invalid("eavesdropper", top.get("eavesdropper"), "coincides with the anchor");
    read_radio(Section(top.get("radio"), "radio",
                       {"n_tx", "n_rx", "antenna_spacing", "carrier_freq", "n_subcarriers", "subcarrier_spacing",
                        "sample_rate", "snr_db"}),
               s);
    read_irs(Section(top.get("irs"), "irs",
                     {"enabled", "position", "normal", "distance", "angle_deg", "elements", "grid", "size",
                      "wall_bounce"}),
             s);
    read_defense(Section(top.get("defense"), "defense",
                         {"progression_rate", "hold_probability", "update_rate", "inversion"}),
                 out.experiment.defense);
    read_experiment(Section(top.get("experiment"), "experiment",
                            {"window_s", "conservativeness", "n_selected", "reference_s", "session_s", "holdout_s",
                             "sweep_s", "jobs", "walk", "person", "reflector", "grid"}),
                    out.experiment);
  } catch (const YAML::Exception& e) {
    throw ParseError(e.msg, e.mark.line >= 0 ? static_cast<std::size_t>(e.mark.line) + 1 : 0);
  }
  out.experiment.seed = s.seed;
  if (std::round(out.experiment.window_s * s.sample_rate) < 2.0)
    throw ValidationError("experiment.window_s", "window must span at least two frames at the sample rate");
  if (out.experiment.n_selected > s.n_subcarriers)
    throw ValidationError("experiment.n_selected", "exceeds radio.n_subcarriers");
  try {
    s.validate();
  } catch (const InvalidScenario& e) {
    throw ValidationError("scenario", e.what());
  }
  return out;
}

LoadedConfig load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("config", "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

}  // namespace irshield

// SPDX-License-Identifier: Apache-2.0

#include "irshield/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "irshield/config.hpp"
#include "irshield/errors.hpp"
#include "irshield/experiments.hpp"
#include "irshield/results_io.hpp"
#include "irshield/trace_io.hpp"

namespace irshield::cli {

namespace {

namespace fs = std::filesystem;

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  int jobs = 0;  // 0: take the config value
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config_path, "YAML scenario file (built-in defaults when omitted)")
      ->check(CLI::ExistingFile);
  sub->add_option("--seed", c.seed, "Override the master seed");
  sub->add_option("--out", c.out_dir, "Output directory (default: $IRSHIELD_OUT or .)");
  sub->add_option("--jobs", c.jobs, "Worker threads for grid and sweep cells")->check(CLI::PositiveNumber);
}

std::string format_number(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

class Run {
 public:
  Run(const Common& c, std::string subcommand) : common_(c) {
    cfg_ = common_.config_path.empty() ? parse_config("", "<defaults>") : load_scenario(common_.config_path);
    if (common_.seed) {
      cfg_.scenario.seed = *common_.seed;
      cfg_.experiment.seed = *common_.seed;
    }
    if (common_.jobs > 0) cfg_.experiment.jobs = common_.jobs;
    out_dir_ = common_.out_dir;
    if (out_dir_.empty()) {
      const char* env = std::getenv("IRSHIELD_OUT");
      out_dir_ = env && *env ? env : ".";
    }
    fs::create_directories(out_dir_);
    manifest_.subcommand = std::move(subcommand);
    manifest_.seed = cfg_.scenario.seed;
    manifest_.config_source = cfg_.source;
    manifest_.config_hash = cfg_.config_hash;
  }

  const Scenario& scenario() const { return cfg_.scenario; }
  ExperimentConfig& experiment() { return cfg_.experiment; }
  const std::string& config_hash() const { return cfg_.config_hash; }

  void arg(const std::string& key, const std::string& value) { manifest_.arguments[key] = value; }

  std::string path(const std::string& name) {
    manifest_.outputs.push_back(name);
    return (fs::path(out_dir_) / name).string();
  }

  void finish(std::ostream& out) {
    write_text((fs::path(out_dir_) / "manifest.json").string(), manifest_json(manifest_));
    for (const auto& name : manifest_.outputs) out << (fs::path(out_dir_) / name).string() << '\n';
  }

 private:
  Common common_;
  LoadedConfig cfg_;
  std::string out_dir_;
  Manifest manifest_;
};

void write_csv(const std::string& path, const std::function<void(std::ostream&)>& fn) {
  std::ostringstream s;
  fn(s);
  write_text(path, s.str());
}

std::pair<int, int> parse_grid(const std::string& text) {
  int cols = 0;
  int rows = 0;
  char x = 0;
  std::istringstream in(text);
  if (!(in >> cols >> x >> rows) || (x != 'x' && x != 'X') || !in.eof() || cols < 1 || rows < 1)
    throw ValidationError("--grid", "expected COLSxROWS, got '" + text + "'");
  return {cols, rows};
}

}  // namespace

std::vector<double> parse_values(const std::string& text) {
  auto num = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size() || !std::isfinite(v))
      throw ValidationError("--values", "'" + s + "' is not a number");
    return v;
  };
  std::vector<std::string> parts;
  const char sep = text.find(':') != std::string::npos ? ':' : ',';
  std::string part;
  std::istringstream in(text);
  while (std::getline(in, part, sep)) parts.push_back(part);
  if (sep == ':') {
    if (parts.size() != 3) throw ValidationError("--values", "range must be start:stop:step");
    const double a = num(parts[0]);
    const double b = num(parts[1]);
    const double step = num(parts[2]);
    if (step <= 0.0 || b < a) throw ValidationError("--values", "range needs step > 0 and stop >= start");
    const auto n = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9)) + 1;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = a + static_cast<double>(i) * step;
    return out;
  }
  std::vector<double> out;
  for (const auto& p : parts) out.push_back(num(p));
  if (out.empty()) throw ValidationError("--values", "empty list");
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"IRS-based defense against Wi-Fi motion sensing: simulator and attack toolkit", "irshield"};
  app.require_subcommand(1);
  app.set_version_flag("--version", code_version());

  Common common;

  std::string motion = "none";
  std::string defense = "off";
  std::optional<double> duration;
  auto* simulate = app.add_subcommand("simulate", "Simulate a session and write its CSI trace and observation");
  add_common(simulate, common);
  simulate->add_option("--motion", motion)->check(CLI::IsMember({"none", "walk", "reflector"}));
  simulate->add_option("--defense", defense)->check(CLI::IsMember({"on", "off"}));
  simulate->add_option("--duration", duration, "Seconds (default: experiment.session_s)");

  std::string reference_file;
  std::string motion_file;
  std::optional<double> c_value;
  bool max_ref = false;
  auto* attack = app.add_subcommand("attack", "Calibrate a threshold on a reference and detect motion");
  add_common(attack, common);
  attack->add_option("--reference", reference_file)->required()->check(CLI::ExistingFile);
  attack->add_option("--motion", motion_file)->required()->check(CLI::ExistingFile);
  auto* c_opt = attack->add_option("--C", c_value, "Conservativeness (default: experiment.conservativeness)");
  attack->add_flag("--max-ref", max_ref, "Use the maximum of the reference as threshold")->excludes(c_opt);

  std::string grid;
  auto* coverage = app.add_subcommand("coverage", "Detection rate of a rotating reflector over a position grid");
  add_common(coverage, common);
  coverage->add_option("--grid", grid, "COLSxROWS (default: experiment.grid)");
  coverage->add_option("--defense", defense)->check(CLI::IsMember({"on", "off"}));

  std::string var;
  std::string values;
  auto* sweep = app.add_subcommand("sweep", "No-motion statistics over an IRS parameter");
  add_common(sweep, common);
  sweep->add_option("--var", var)->required()->check(CLI::IsMember({"size", "distance", "orientation"}));
  sweep->add_option("--values", values, "start:stop:step or a comma list")->required();

  std::string r_values = "0.025,0.05,0.1";
  std::string p_values = "0,0.4,0.6,0.8";
  auto* param = app.add_subcommand("paramstudy", "Threshold, norm and coherence time over R x P_hold");
  add_common(param, common);
  param->add_option("--R", r_values, "Progression rates");
  param->add_option("--P", p_values, "Hold probabilities");
  param->add_option("--duration", duration, "Seconds per cell (default: experiment.sweep_s)");

  std::string trace_file;
  std::optional<int> n_selected;
  std::optional<double> window;
  auto* ingest = app.add_subcommand("ingest", "Compute the observation of a recorded CSI trace");
  add_common(ingest, common);
  ingest->add_option("--trace", trace_file)->required()->check(CLI::ExistingFile);
  ingest->add_option("--n-selected", n_selected, "Subcarriers kept (default: experiment.n_selected)");
  ingest->add_option("--window", window, "Window in seconds (default: experiment.window_s)");

  std::vector<std::string> argv_store;
  argv_store.emplace_back("irshield");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (simulate->parsed()) {
      Run r(common, "simulate");
      auto& cfg = r.experiment();
      const double dur = duration.value_or(cfg.session_s);
      const double rate = r.scenario().sample_rate;
      if (!(dur > 0.0) || std::round(dur * rate) < static_cast<double>(window_samples(cfg.window_s, rate)))
        throw ValidationError("--duration", format_number(dur) + " s is shorter than the " +
                                                format_number(cfg.window_s) + " s window");
      r.arg("motion", motion);
      r.arg("defense", defense);
      r.arg("duration", format_number(dur));

      const Testbed bed(r.scenario());
      SessionOptions opt;
      opt.defense_on = defense == "on";
      opt.duration_s = dur;
      opt.window_s = cfg.window_s;
      opt.n_selected = cfg.n_selected;
      opt.defense = cfg.defense;
      opt.person = cfg.person;
      opt.keep_frames = true;
      if (motion == "walk") opt.motion = cfg.walk;
      if (motion == "reflector") opt.motion = cfg.reflector;
      SessionResult s = run_session(bed, opt);
      s.obs.meta.config_hash = r.config_hash();

      Trace trace;
      trace.header.n_subcarriers = r.scenario().n_subcarriers;
      trace.header.n_rx = static_cast<int>(r.scenario().n_rx);
      trace.header.n_tx = static_cast<int>(r.scenario().n_tx);
      trace.header.sample_rate = rate;
      trace.header.seed = r.scenario().seed;
      trace.frames = std::move(s.frames);
      export_trace(r.path("trace.csv"), trace);
      export_observation(r.path("observation.csv"), s.obs);
      r.finish(out);
    } else if (attack->parsed()) {
      Run r(common, "attack");
      const double c = c_value.value_or(r.experiment().conservativeness);
      if (!(c >= 0.0)) throw ValidationError("--C", "must be non-negative");
      const ObservationSeries ref = ingest_observation(reference_file);
      const ObservationSeries mot = ingest_observation(motion_file);
      if (ref.sample_rate != mot.sample_rate || ref.window_s != mot.window_s)
        throw IngestError("reference and motion observations differ in sample_rate or window_s");
      r.arg("reference", reference_file);
      r.arg("motion", motion_file);
      ReportInfo info;
      if (max_ref) {
        info.rule = "max";
        r.arg("rule", "max");
      } else {
        r.arg("C", format_number(c));
      }
      info.conservativeness = c;
      info.seed = r.scenario().seed;
      info.config_hash = r.config_hash();
      info.motion_source = motion_file;
      info.reference_source = reference_file;
      info.reference_duration_s = static_cast<double>(ref.size()) / ref.sample_rate;
      const double u = max_ref ? max_threshold(ref.values) : calibrate_threshold(ref.values, c);
      export_report(r.path("report.json"), evaluate(mot.values, ref.values, u), info);
      r.finish(out);
    } else if (coverage->parsed()) {
      Run r(common, "coverage");
      auto& cfg = r.experiment();
      const auto [cols, rows] =
          grid.empty() ? std::pair{cfg.grid_columns, cfg.grid_rows} : parse_grid(grid);
      r.arg("grid", std::to_string(cols) + "x" + std::to_string(rows));
      r.arg("defense", defense);
      const auto cells = uniform_grid(r.scenario(), cols, rows, cfg.grid_margin);
      const CoverageResult res = run_coverage_grid(r.scenario(), cfg, cells, defense == "on");
      write_csv(r.path("coverage.csv"), [&](std::ostream& o) { write_coverage_csv(o, res); });
      write_text(r.path("coverage.json"), coverage_json(res, cfg, r.config_hash()));
      r.finish(out);
    } else if (sweep->parsed()) {
      Run r(common, "sweep");
      const auto vals = parse_values(values);
      r.arg("var", var);
      r.arg("values", values);
      auto& cfg = r.experiment();
      SweepResult res;
      if (var == "size") {
        std::vector<int> counts;
        for (double v : vals) {
          if (v != std::floor(v) || v < 0) throw ValidationError("--values", "sizes must be non-negative integers");
          counts.push_back(static_cast<int>(v));
        }
        res = sweep_irs_size(r.scenario(), cfg, counts);
      } else if (var == "distance") {
        res = sweep_irs_distance(r.scenario(), cfg, vals);
      } else {
        res = sweep_irs_orientation(r.scenario(), cfg, vals);
      }
      write_csv(r.path("sweep.csv"), [&](std::ostream& o) { write_sweep_csv(o, res); });
      write_text(r.path("sweep.json"), sweep_json(res, cfg, r.config_hash()));
      r.finish(out);
    } else if (param->parsed()) {
      Run r(common, "paramstudy");
      auto& cfg = r.experiment();
      const auto rs = parse_values(r_values);
      const auto ps = parse_values(p_values);
      const double dur = duration.value_or(cfg.sweep_s);
      r.arg("R", r_values);
      r.arg("P", p_values);
      r.arg("duration", format_number(dur));
      const auto cells = parameter_study(r.scenario(), cfg, rs, ps, dur);
      write_csv(r.path("paramstudy.csv"), [&](std::ostream& o) { write_paramstudy_csv(o, cells); });
      r.finish(out);
    } else if (ingest->parsed()) {
      Run r(common, "ingest");
      auto& cfg = r.experiment();
      const Trace trace = ingest_trace(trace_file);
      if (trace.frames.empty()) throw IngestError("trace '" + trace_file + "' has no frames");
      const double rate = trace.header.sample_rate.value_or(r.scenario().sample_rate);
      const double w = window.value_or(cfg.window_s);
      const int k = n_selected.value_or(cfg.n_selected);
      if (k < 1 || k > trace.header.n_subcarriers)
        throw ValidationError("--n-selected", "must lie in [1, " + std::to_string(trace.header.n_subcarriers) + "]");
      r.arg("trace", trace_file);
      r.arg("n_selected", std::to_string(k));
      r.arg("window", format_number(w));
      const MagnitudeTrace mags = MagnitudeTrace::from_frames(trace.frames);
      const auto selected = select_subcarriers(mags, k);
      ObservationSeries obs = observe(mags, selected, rate, w, trace.frames.front().t_index);
      obs.meta.source = trace_file;
      obs.meta.seed = trace.header.seed.value_or(0);
      obs.meta.config_hash = r.config_hash();
      export_observation(r.path("observation.csv"), obs);
      r.finish(out);
    }
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const InvalidScenario& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const IngestError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace irshield::cli

// SPDX-License-Identifier: Apache-2.0

#include "irshield/results_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "irshield/errors.hpp"
#include "json.hpp"

namespace irshield {

using nlohmann::json;

namespace {

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// JSON has no infinities; thresholds from the ROC sweep may be infinite.
json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return nullptr;
  return v > 0 ? "inf" : "-inf";
}

double read_number(const json& j, const char* key) {
  if (!j.contains(key)) throw IngestError(std::string("report lacks '") + key + "'");
  const json& v = j.at(key);
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw IngestError(std::string("report field '") + key + "' is not a number");
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json experiment_json(const ExperimentConfig& cfg) {
  return {{"conservativeness", cfg.conservativeness},
          {"window_s", cfg.window_s},
          {"n_selected", cfg.n_selected},
          {"reference_s", cfg.reference_s},
          {"session_s", cfg.session_s},
          {"sweep_s", cfg.sweep_s},
          {"progression_rate", cfg.defense.progression_rate},
          {"hold_probability", cfg.defense.hold_probability},
          {"update_rate", cfg.defense.update_rate},
          {"seed", cfg.seed}};
}

}  // namespace

const char* code_version() { return IRSHIELD_VERSION; }

std::string report_json(const DetectionReport& r, const ReportInfo& info) {
  json roc = json::array();
  for (const auto& [fpr, tpr] : r.roc_points) roc.push_back({fpr, tpr});
  json decisions = json::array();
  for (auto d : r.decisions) decisions.push_back(static_cast<int>(d));
  json j = {{"schema_version", kReportSchemaVersion},
            {"kind", "detection_report"},
            {"threshold", number(r.threshold)},
            {"rule", info.rule},
            {"conservativeness", info.conservativeness},
            {"detection_rate", r.detection_rate},
            {"tpr", r.tpr},
            {"fpr", r.fpr},
            {"auc", r.auc},
            {"roc", roc},
            {"decisions", decisions},
            {"provenance",
             {{"seed", info.seed},
              {"config_hash", info.config_hash},
              {"code_version", code_version()},
              {"motion_source", info.motion_source},
              {"reference_source", info.reference_source},
              {"reference_duration_s", info.reference_duration_s}}}};
  return dump(j);
}

void export_report(const std::string& path, const DetectionReport& r, const ReportInfo& info) {
  write_text(path, report_json(r, info));
}

StoredReport parse_report(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw IngestError(std::string("report is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("schema_version") || !j.at("schema_version").is_string())
    throw IngestError("report lacks a schema_version string");
  const auto version = j.at("schema_version").get<std::string>();
  int major = 0;
  if (std::sscanf(version.c_str(), "%d", &major) != 1) throw IngestError("malformed schema_version '" + version + "'");
  if (major > kReportSchemaMajor)
    throw IngestError("report schema_version " + version + " is newer than supported major " +
                      std::to_string(kReportSchemaMajor));

  StoredReport out;
  DetectionReport& r = out.report;
  try {
    r.threshold = read_number(j, "threshold");
    r.detection_rate = read_number(j, "detection_rate");
    r.tpr = read_number(j, "tpr");
    r.fpr = read_number(j, "fpr");
    r.auc = read_number(j, "auc");
    if (!j.contains("roc") || !j.at("roc").is_array()) throw IngestError("report lacks the roc array");
    for (const auto& p : j.at("roc")) r.roc_points.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    if (j.contains("decisions")) {
      for (const auto& d : j.at("decisions")) r.decisions.push_back(static_cast<std::uint8_t>(d.get<int>()));
    }
    out.info.rule = j.value("rule", out.info.rule);
    out.info.conservativeness = j.value("conservativeness", out.info.conservativeness);
    if (j.contains("provenance")) {
      const json& p = j.at("provenance");
      out.info.seed = p.value("seed", std::uint64_t{0});
      out.info.config_hash = p.value("config_hash", std::string());
      out.info.motion_source = p.value("motion_source", std::string());
      out.info.reference_source = p.value("reference_source", std::string());
      out.info.reference_duration_s = p.value("reference_duration_s", 0.0);
    }
  } catch (const json::exception& e) {
    throw IngestError(std::string("malformed report: ") + e.what());
  }
  return out;
}

StoredReport ingest_report(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_report(buf.str());
}

void write_sweep_csv(std::ostream& out, const SweepResult& r) {
  out << "sweep_var,value,stat,number\n";
  for (const auto& c : r.cells) {
    const std::pair<const char*, double> stats[] = {
        {"median", c.median}, {"p01", c.p01}, {"p99", c.p99}, {"mad", c.mad}, {"threshold", c.threshold}};
    for (const auto& [name, v] : stats) {
      out << r.variable << ',' << fmt17(c.value) << ',' << name << ',' << fmt17(v) << '\n';
    }
  }
}

void write_coverage_csv(std::ostream& out, const CoverageResult& r) {
  out << "index,x,y,rate,rate_max\n";
  for (std::size_t i = 0; i < r.cells.size(); ++i) {
    const auto& c = r.cells[i];
    out << i << ',' << fmt17(c.position.x) << ',' << fmt17(c.position.y) << ',' << fmt17(c.rate) << ','
        << fmt17(c.rate_max) << '\n';
  }
}

void write_paramstudy_csv(std::ostream& out, const std::vector<ParamStudyCell>& cells) {
  out << "R,P_hold,median,mad,threshold,euclidean_norm,coherence_time_s\n";
  for (const auto& c : cells) {
    out << fmt17(c.progression_rate) << ',' << fmt17(c.hold_probability) << ',' << fmt17(c.median) << ','
        << fmt17(c.mad) << ',' << fmt17(c.threshold) << ',' << fmt17(c.euclidean_norm) << ','
        << fmt17(c.coherence_time_s) << '\n';
  }
}

std::string sweep_json(const SweepResult& r, const ExperimentConfig& cfg, const std::string& config_hash) {
  json cells = json::array();
  for (const auto& c : r.cells) {
    cells.push_back({{"value", c.value},
                     {"median", c.median},
                     {"p01", c.p01},
                     {"p99", c.p99},
                     {"mad", c.mad},
                     {"threshold", c.threshold}});
  }
  return dump({{"schema_version", kReportSchemaVersion},
               {"kind", "sweep"},
               {"sweep_var", r.variable},
               {"cells", cells},
               {"experiment", experiment_json(cfg)},
               {"config_hash", config_hash},
               {"code_version", code_version()}});
}

std::string coverage_json(const CoverageResult& r, const ExperimentConfig& cfg, const std::string& config_hash) {
  json cells = json::array();
  for (const auto& c : r.cells) {
    cells.push_back({{"x", c.position.x}, {"y", c.position.y}, {"rate", c.rate}, {"rate_max", c.rate_max}});
  }
  return dump({{"schema_version", kReportSchemaVersion},
               {"kind", "coverage"},
               {"defense", r.defense_on},
               {"conservativeness", r.conservativeness},
               {"reference_duration_s", r.reference_duration_s},
               {"threshold", r.threshold},
               {"max_threshold", r.max_threshold},
               {"cells", cells},
               {"experiment", experiment_json(cfg)},
               {"config_hash", config_hash},
               {"code_version", code_version()}});
}

std::string walk_json(const WalkResult& r, const ExperimentConfig& cfg, const std::string& config_hash) {
  return dump({{"schema_version", kReportSchemaVersion},
               {"kind", "walk"},
               {"defense", r.defense_on},
               {"conservativeness", r.conservativeness},
               {"reference_duration_s", r.reference_duration_s},
               {"threshold", r.threshold},
               {"max_threshold", r.max_threshold},
               {"crossing_rate", r.crossing_rate},
               {"motion_rate", r.motion_rate},
               {"holdout_fpr", r.holdout_fpr},
               {"auc", r.report.auc},
               {"experiment", experiment_json(cfg)},
               {"config_hash", config_hash},
               {"code_version", code_version()}});
}

std::string manifest_json(const Manifest& m) {
  json args = json::object();
  for (const auto& [k, v] : m.arguments) args[k] = v;
  return dump({{"schema_version", kReportSchemaVersion},
               {"kind", "manifest"},
               {"tool", "irshield"},
               {"code_version", code_version()},
               {"subcommand", m.subcommand},
               {"arguments", args},
               {"seed", m.seed},
               {"config_source", m.config_source},
               {"config_hash", m.config_hash},
               {"outputs", m.outputs}});
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
  if (!out) throw Error("failed writing '" + path + "'");
}

}  // namespace irshield

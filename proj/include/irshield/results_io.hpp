// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "irshield/experiments.hpp"
#include "irshield/sensing.hpp"

namespace irshield {

// "major.minor"; readers accept any minor of a known major.
inline constexpr const char* kReportSchemaVersion = "1.0";
inline constexpr int kReportSchemaMajor = 1;

const char* code_version();

struct ReportInfo {
  std::string rule = "median+C*MAD";  // or "max"
  double conservativeness = kDefaultConservativeness;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string motion_source;
  std::string reference_source;
  double reference_duration_s = 0.0;
};

struct StoredReport {
  DetectionReport report;
  ReportInfo info;
};

// JSON with sorted keys. The roc key is always present, possibly empty.
std::string report_json(const DetectionReport& r, const ReportInfo& info);
void export_report(const std::string& path, const DetectionReport& r, const ReportInfo& info);
StoredReport parse_report(const std::string& json_text);
StoredReport ingest_report(const std::string& path);

// Long format: sweep_var,value,stat,number.
void write_sweep_csv(std::ostream& out, const SweepResult& r);
// index,x,y,rate,rate_max
void write_coverage_csv(std::ostream& out, const CoverageResult& r);
// R,P_hold,median,mad,threshold,euclidean_norm,coherence_time_s
void write_paramstudy_csv(std::ostream& out, const std::vector<ParamStudyCell>& cells);

std::string sweep_json(const SweepResult& r, const ExperimentConfig& cfg, const std::string& config_hash);
std::string coverage_json(const CoverageResult& r, const ExperimentConfig& cfg, const std::string& config_hash);
std::string walk_json(const WalkResult& r, const ExperimentConfig& cfg, const std::string& config_hash);

// Reproduction record of one CLI run; no timestamps so reruns match byte for byte.
struct Manifest {
  std::string subcommand;
  std::map<std::string, std::string> arguments;
  std::uint64_t seed = 0;
  std::string config_source;
  std::string config_hash;
  std::vector<std::string> outputs;
};

std::string manifest_json(const Manifest& m);

// Writes text to path, throwing Error when the file cannot be written.
void write_text(const std::string& path, const std::string& text);

}  // namespace irshield

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "irshield/channel.hpp"
#include "irshield/sensing.hpp"

namespace irshield {

inline constexpr int kTraceSchemaVersion = 1;
inline constexpr int kObservationSchemaVersion = 1;

// Metadata line of a trace file. Dimensions are inferred from the data when a
// file has no metadata line.
struct TraceHeader {
  int schema_version = kTraceSchemaVersion;
  int n_subcarriers = 0;
  int n_rx = 0;
  int n_tx = 0;
  std::optional<double> sample_rate;
  std::optional<std::uint64_t> seed;
};

struct Trace {
  TraceHeader header;
  std::vector<CsiFrame> frames;
};

// CSV: optional "# irshield-trace key=value ..." line, then t,k,rx,tx,re,im rows
// ordered by t, k, rx, tx with 17 significant digits.
void write_trace(std::ostream& out, const Trace& trace);
void export_trace(const std::string& path, const Trace& trace);

// Rows of one t may come in any order; t must increase between frames and the
// (k, rx, tx) lattice of every frame must be complete. Throws IngestError.
Trace read_trace(std::istream& in);
Trace ingest_trace(const std::string& path);

// CSV: "# irshield-observation key=value ..." line, then t_seconds,sigma_bar.
void write_observation(std::ostream& out, const ObservationSeries& obs);
void export_observation(const std::string& path, const ObservationSeries& obs);
ObservationSeries read_observation(std::istream& in);
ObservationSeries ingest_observation(const std::string& path);

}  // namespace irshield

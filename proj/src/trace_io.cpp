// SPDX-License-Identifier: Apache-2.0

#include "irshield/trace_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "irshield/errors.hpp"

namespace irshield {

namespace {

constexpr const char* kTraceTag = "# irshield-trace";
constexpr const char* kObservationTag = "# irshield-observation";
constexpr const char* kTraceColumns = "t,k,rx,tx,re,im";
constexpr const char* kObservationColumns = "t_seconds,sigma_bar";

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '%') out += "%25";
    else if (c == ' ') out += "%20";
    else if (c == '\n') out += "%0A";
    else out += c;
  }
  return out;
}

std::string unescape(const std::string& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%' && i + 2 < s.size()) {
      const std::string code = s.substr(i + 1, 2);
      if (code == "25") out += '%';
      else if (code == "20") out += ' ';
      else if (code == "0A") out += '\n';
      else out += s.substr(i, 3);
      i += 2;
    } else {
      out += s[i];
    }
  }
  return out;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

// key=value tokens after the tag.
std::map<std::string, std::string> parse_meta(const std::string& line, const char* tag) {
  std::map<std::string, std::string> meta;
  std::istringstream in(line.substr(std::string(tag).size()));
  std::string token;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos || eq == 0) throw IngestError("malformed metadata token '" + token + "'");
    meta[token.substr(0, eq)] = unescape(token.substr(eq + 1));
  }
  return meta;
}

template <typename T>
bool parse_field(std::string_view text, T& value) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto res = std::from_chars(first, last, value);
  return res.ec == std::errc() && res.ptr == last;
}

template <typename T>
T meta_value(const std::map<std::string, std::string>& meta, const std::string& key, std::size_t line) {
  const auto it = meta.find(key);
  if (it == meta.end()) throw IngestError("line " + std::to_string(line) + ": metadata lacks " + key);
  T v{};
  if (!parse_field<T>(it->second, v))
    throw IngestError("line " + std::to_string(line) + ": bad metadata value " + key + "=" + it->second);
  return v;
}

void check_schema(const std::map<std::string, std::string>& meta, int supported, const char* what) {
  const int version = meta_value<int>(meta, "schema_version", 1);
  if (version > supported)
    throw IngestError(std::string(what) + " schema_version " + std::to_string(version) +
                      " is newer than the supported version " + std::to_string(supported));
  if (version < 1) throw IngestError(std::string(what) + " schema_version must be >= 1");
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

struct Row {
  std::uint64_t t;
  int k;
  int rx;
  int tx;
  cdouble value;
  std::size_t line;
};

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path + "'");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open '" + path + "'");
  return in;
}

}  // namespace

void write_trace(std::ostream& out, const Trace& trace) {
  const TraceHeader& h = trace.header;
  out << kTraceTag << " schema_version=" << kTraceSchemaVersion << " n_subcarriers=" << h.n_subcarriers
      << " n_rx=" << h.n_rx << " n_tx=" << h.n_tx;
  if (h.sample_rate) out << " sample_rate=" << fmt17(*h.sample_rate);
  if (h.seed) out << " seed=" << *h.seed;
  out << '\n' << kTraceColumns << '\n';
  std::uint64_t last_t = 0;
  bool first = true;
  for (const auto& f : trace.frames) {
    if (f.n_subcarriers != h.n_subcarriers || f.n_rx != h.n_rx || f.n_tx != h.n_tx)
      throw ContractViolation("write_trace: frame shape differs from the header");
    if (!first && f.t_index <= last_t) throw ContractViolation("write_trace: t_index must increase");
    first = false;
    last_t = f.t_index;
    for (int k = 0; k < f.n_subcarriers; ++k) {
      for (int rx = 0; rx < f.n_rx; ++rx) {
        for (int tx = 0; tx < f.n_tx; ++tx) {
          const cdouble v = f.at(k, rx, tx);
          out << f.t_index << ',' << k << ',' << rx << ',' << tx << ',' << fmt17(v.real()) << ','
              << fmt17(v.imag()) << '\n';
        }
      }
    }
  }
}

void export_trace(const std::string& path, const Trace& trace) {
  auto out = open_out(path);
  write_trace(out, trace);
  if (!out) throw Error("failed writing '" + path + "'");
}

Trace read_trace(std::istream& in) {
  Trace trace;
  std::string line;
  std::size_t line_no = 0;
  bool have_meta = false;

  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.rfind(kTraceTag, 0) == 0) {
      const auto meta = parse_meta(line, kTraceTag);
      check_schema(meta, kTraceSchemaVersion, "trace");
      trace.header.n_subcarriers = meta_value<int>(meta, "n_subcarriers", line_no);
      trace.header.n_rx = meta_value<int>(meta, "n_rx", line_no);
      trace.header.n_tx = meta_value<int>(meta, "n_tx", line_no);
      if (meta.count("sample_rate")) trace.header.sample_rate = meta_value<double>(meta, "sample_rate", line_no);
      if (meta.count("seed")) trace.header.seed = meta_value<std::uint64_t>(meta, "seed", line_no);
      if (trace.header.n_subcarriers < 1 || trace.header.n_rx < 1 || trace.header.n_tx < 1)
        throw IngestError("line " + std::to_string(line_no) + ": dimensions must be positive");
      have_meta = true;
      continue;
    }
    if (!line.empty() && line[0] == '#') continue;
    break;
  }
  if (line_no == 0 || line != kTraceColumns)
    throw IngestError("line " + std::to_string(line_no) + ": expected header row '" + kTraceColumns + "'");

  std::vector<Row> rows;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const auto f = split_csv(line);
    Row r{};
    double re = 0.0;
    double im = 0.0;
    if (f.size() != 6 || !parse_field(f[0], r.t) || !parse_field(f[1], r.k) || !parse_field(f[2], r.rx) ||
        !parse_field(f[3], r.tx) || !parse_field(f[4], re) || !parse_field(f[5], im))
      throw IngestError("line " + std::to_string(line_no) + ": malformed row '" + line + "'");
    if (!std::isfinite(re) || !std::isfinite(im))
      throw IngestError("line " + std::to_string(line_no) + ": non-finite value");
    if (r.k < 0 || r.rx < 0 || r.tx < 0) throw IngestError("line " + std::to_string(line_no) + ": negative index");
    r.value = {re, im};
    r.line = line_no;
    rows.push_back(r);
  }

  TraceHeader& h = trace.header;
  if (!have_meta) {
    for (const auto& r : rows) {
      h.n_subcarriers = std::max(h.n_subcarriers, r.k + 1);
      h.n_rx = std::max(h.n_rx, r.rx + 1);
      h.n_tx = std::max(h.n_tx, r.tx + 1);
    }
  }
  const std::size_t per_frame = static_cast<std::size_t>(h.n_subcarriers) * h.n_rx * h.n_tx;

  std::size_t i = 0;
  while (i < rows.size()) {
    CsiFrame f;
    f.t_index = rows[i].t;
    f.n_subcarriers = h.n_subcarriers;
    f.n_rx = h.n_rx;
    f.n_tx = h.n_tx;
    if (!trace.frames.empty() && f.t_index <= trace.frames.back().t_index)
      throw IngestError("line " + std::to_string(rows[i].line) + ": t=" + std::to_string(f.t_index) +
                        " does not increase (previous frame t=" + std::to_string(trace.frames.back().t_index) + ")");
    f.values.assign(per_frame, cdouble{});
    std::vector<char> seen(per_frame, 0);
    for (; i < rows.size() && rows[i].t == f.t_index; ++i) {
      const Row& r = rows[i];
      if (r.k >= h.n_subcarriers || r.rx >= h.n_rx || r.tx >= h.n_tx)
        throw IngestError("line " + std::to_string(r.line) + ": index outside the declared dimensions");
      const std::size_t idx = f.index(r.k, r.rx, r.tx);
      if (seen[idx]) throw IngestError("line " + std::to_string(r.line) + ": duplicate cell");
      seen[idx] = 1;
      f.values[idx] = r.value;
    }
    for (int k = 0; k < f.n_subcarriers; ++k) {
      for (int rx = 0; rx < f.n_rx; ++rx) {
        for (int tx = 0; tx < f.n_tx; ++tx) {
          if (!seen[f.index(k, rx, tx)])
            throw IngestError("missing cell t=" + std::to_string(f.t_index) + " k=" + std::to_string(k) +
                              " rx=" + std::to_string(rx) + " tx=" + std::to_string(tx));
        }
      }
    }
    trace.frames.push_back(std::move(f));
  }
  return trace;
}

Trace ingest_trace(const std::string& path) {
  auto in = open_in(path);
  return read_trace(in);
}

void write_observation(std::ostream& out, const ObservationSeries& obs) {
  out << kObservationTag << " schema_version=" << kObservationSchemaVersion
      << " sample_rate=" << fmt17(obs.sample_rate) << " window_s=" << fmt17(obs.window_s)
      << " first_index=" << obs.first_index << " seed=" << obs.meta.seed;
  if (!obs.meta.source.empty()) out << " source=" << escape(obs.meta.source);
  if (!obs.meta.config_hash.empty()) out << " config_hash=" << escape(obs.meta.config_hash);
  out << '\n' << kObservationColumns << '\n';
  for (std::size_t i = 0; i < obs.values.size(); ++i) {
    out << fmt17(obs.time_of(i)) << ',' << fmt17(obs.values[i]) << '\n';
  }
}

void export_observation(const std::string& path, const ObservationSeries& obs) {
  auto out = open_out(path);
  write_observation(out, obs);
  if (!out) throw Error("failed writing '" + path + "'");
}

ObservationSeries read_observation(std::istream& in) {
  ObservationSeries obs;
  std::string line;
  std::size_t line_no = 0;
  bool have_meta = false;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.rfind(kObservationTag, 0) == 0) {
      const auto meta = parse_meta(line, kObservationTag);
      check_schema(meta, kObservationSchemaVersion, "observation");
      obs.sample_rate = meta_value<double>(meta, "sample_rate", line_no);
      obs.window_s = meta_value<double>(meta, "window_s", line_no);
      obs.first_index = meta_value<std::uint64_t>(meta, "first_index", line_no);
      if (meta.count("seed")) obs.meta.seed = meta_value<std::uint64_t>(meta, "seed", line_no);
      if (meta.count("source")) obs.meta.source = meta.at("source");
      if (meta.count("config_hash")) obs.meta.config_hash = meta.at("config_hash");
      if (!(obs.sample_rate > 0.0)) throw IngestError("observation sample_rate must be positive");
      have_meta = true;
      continue;
    }
    if (!line.empty() && line[0] == '#') continue;
    break;
  }
  if (line != kObservationColumns)
    throw IngestError("line " + std::to_string(line_no) + ": expected header row '" + kObservationColumns + "'");

  std::vector<double> times;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const auto f = split_csv(line);
    double t = 0.0;
    double v = 0.0;
    if (f.size() != 2 || !parse_field(f[0], t) || !parse_field(f[1], v))
      throw IngestError("line " + std::to_string(line_no) + ": malformed row '" + line + "'");
    if (!std::isfinite(v) || v < 0.0)
      throw IngestError("line " + std::to_string(line_no) + ": sigma_bar must be finite and nonnegative");
    if (!times.empty() && !(t > times.back()))
      throw IngestError("line " + std::to_string(line_no) + ": t_seconds does not increase");
    times.push_back(t);
    obs.values.push_back(v);
  }
  if (!have_meta && times.size() >= 2) {
    obs.sample_rate = 1.0 / (times[1] - times[0]);
    obs.first_index = static_cast<std::uint64_t>(std::llround(times[0] * obs.sample_rate));
  }
  return obs;
}

ObservationSeries ingest_observation(const std::string& path) {
  auto in = open_in(path);
  ObservationSeries obs = read_observation(in);
  if (obs.meta.source.empty()) obs.meta.source = path;
  return obs;
}

}  // namespace irshield

// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <random>
#include <sstream>

#include "doctest.h"
#include "irshield/errors.hpp"
#include "irshield/results_io.hpp"
#include "irshield/trace_io.hpp"

using namespace irshield;

namespace {

Trace small_trace(int k, int n_rx, int n_tx, int n_frames, std::uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Trace t;
  t.header.n_subcarriers = k;
  t.header.n_rx = n_rx;
  t.header.n_tx = n_tx;
  t.header.sample_rate = 70.0;
  t.header.seed = seed;
  for (int i = 0; i < n_frames; ++i) {
    CsiFrame f;
    f.t_index = 10 + 2 * static_cast<std::uint64_t>(i);
    f.n_subcarriers = k;
    f.n_rx = n_rx;
    f.n_tx = n_tx;
    for (int j = 0; j < k * n_rx * n_tx; ++j) f.values.emplace_back(g(rng), g(rng));
    t.frames.push_back(f);
  }
  return t;
}

std::string to_text(const Trace& t) {
  std::ostringstream s;
  write_trace(s, t);
  return s.str();
}

Trace from_text(const std::string& text) {
  std::istringstream s(text);
  return read_trace(s);
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream s(text);
  for (std::string l; std::getline(s, l);) out.push_back(l);
  return out;
}

std::string join(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

}  // namespace

TEST_CASE("two single-entry frames round trip") {
  const Trace t = small_trace(1, 1, 1, 2);
  const std::string text = to_text(t);
  CHECK(lines_of(text).size() == 4);
  const Trace back = from_text(text);
  REQUIRE(back.frames.size() == 2);
  CHECK(back.frames[0].values == t.frames[0].values);
  CHECK(back.frames[1].t_index == t.frames[1].t_index);
  CHECK(*back.header.sample_rate == 70.0);
  CHECK(*back.header.seed == 1);
  CHECK(to_text(back) == text);
}

TEST_CASE("row order within a frame is free") {
  const Trace t = small_trace(3, 2, 2, 3, 5);
  auto lines = lines_of(to_text(t));
  std::mt19937 rng(3);
  // Rows 2..13 belong to the first frame, 14..25 to the second.
  std::shuffle(lines.begin() + 2, lines.begin() + 14, rng);
  std::shuffle(lines.begin() + 14, lines.begin() + 26, rng);
  const Trace back = from_text(join(lines));
  for (std::size_t i = 0; i < t.frames.size(); ++i) CHECK(back.frames[i].values == t.frames[i].values);
}

TEST_CASE("dimensions are inferred without a metadata line") {
  const Trace t = small_trace(4, 2, 1, 2);
  auto lines = lines_of(to_text(t));
  lines.erase(lines.begin());
  const Trace back = from_text(join(lines));
  CHECK(back.header.n_subcarriers == 4);
  CHECK(back.header.n_rx == 2);
  CHECK(back.header.n_tx == 1);
  CHECK_FALSE(back.header.sample_rate);
  CHECK(back.frames[1].values == t.frames[1].values);
}

TEST_CASE("trace schema violations") {
  const Trace t = small_trace(2, 1, 1, 2);
  auto lines = lines_of(to_text(t));

  SUBCASE("a missing cell names the gap") {
    auto l = lines;
    l.erase(l.begin() + 3);  // t=10 k=1
    try {
      from_text(join(l));
      FAIL("expected an ingest error");
    } catch (const IngestError& e) {
      CHECK(std::string(e.what()).find("t=10 k=1") != std::string::npos);
    }
  }
  SUBCASE("time must increase") {
    auto l = lines;
    std::swap(l[2], l[4]);
    std::swap(l[3], l[5]);
    CHECK_THROWS_AS(from_text(join(l)), IngestError);
  }
  SUBCASE("duplicate cells") {
    auto l = lines;
    l[3] = l[2];
    CHECK_THROWS_AS(from_text(join(l)), IngestError);
  }
  SUBCASE("indices outside the declared lattice") {
    auto l = lines;
    l.push_back("12,5,0,0,1,1");
    CHECK_THROWS_AS(from_text(join(l)), IngestError);
  }
  SUBCASE("newer schema") {
    auto l = lines;
    l[0].replace(l[0].find("schema_version=1"), 16, "schema_version=2");
    CHECK_THROWS_AS(from_text(join(l)), IngestError);
  }
  SUBCASE("malformed number") {
    auto l = lines;
    l[2] = "10,0,0,0,abc,1";
    CHECK_THROWS_AS(from_text(join(l)), IngestError);
  }
}

TEST_CASE("observation files") {
  ObservationSeries obs;
  obs.values = {0.0, 1.5e-5, 2.25e-5, 1e-300};
  obs.sample_rate = 70.0;
  obs.window_s = 1.0;
  obs.first_index = 69;
  obs.meta.seed = 4;
  obs.meta.source = "my run, take 2";
  obs.meta.config_hash = "abc";
  std::ostringstream out;
  write_observation(out, obs);
  const auto lines = lines_of(out.str());
  CHECK(lines.size() == obs.size() + 2);
  CHECK(lines[1] == "t_seconds,sigma_bar");

  std::istringstream in(out.str());
  const ObservationSeries back = read_observation(in);
  CHECK(back.values == obs.values);
  CHECK(back.first_index == 69);
  CHECK(back.meta.source == obs.meta.source);
  CHECK(back.meta.seed == 4);

  std::istringstream bare(join({lines.begin() + 1, lines.end()}));
  const ObservationSeries guessed = read_observation(bare);
  CHECK(guessed.sample_rate == doctest::Approx(70.0));
  CHECK(guessed.first_index == 69);

  std::istringstream negative("t_seconds,sigma_bar\n0,-1\n");
  CHECK_THROWS_AS(read_observation(negative), IngestError);
}

TEST_CASE("report JSON") {
  DetectionReport r;
  r.threshold = 0.25;
  ReportInfo info;
  info.seed = 3;
  const std::string empty = report_json(r, info);
  CHECK(empty.find("\"roc\": []") != std::string::npos);

  r.decisions = {0, 1, 1};
  r.detection_rate = 2.0 / 3.0;
  r.roc_points = {{0, 0}, {0.5, 0.75}, {1, 1}};
  r.auc = 0.8125;
  info.config_hash = "deadbeef";
  info.rule = "max";
  const std::string text = report_json(r, info);
  const StoredReport back = parse_report(text);
  CHECK(back.report.roc_points == r.roc_points);
  CHECK(back.report.decisions == r.decisions);
  CHECK(back.info.rule == "max");
  CHECK(report_json(back.report, back.info) == text);

  std::string newer = text;
  newer.replace(newer.find("\"1.0\""), 5, "\"2.0\"");
  CHECK_THROWS_AS(parse_report(newer), IngestError);
  std::string minor = text;
  minor.replace(minor.find("\"1.0\""), 5, "\"1.7\"");
  CHECK_NOTHROW(parse_report(minor));
  CHECK_THROWS_AS(parse_report("{\"threshold\": 1}"), IngestError);
  CHECK_THROWS_AS(parse_report("not json"), IngestError);
}

TEST_CASE("infinite thresholds survive JSON") {
  DetectionReport r;
  r.threshold = -std::numeric_limits<double>::infinity();
  const StoredReport back = parse_report(report_json(r, {}));
  CHECK(back.report.threshold == r.threshold);
}

TEST_CASE("result CSVs") {
  SweepResult s{"size", {{32, 1, 0.5, 2, 0.1, 2.1}, {64, 2, 1, 3, 0.2, 4.2}}};
  std::ostringstream out;
  write_sweep_csv(out, s);
  const auto lines = lines_of(out.str());
  CHECK(lines.size() == 1 + 2 * 5);
  CHECK(lines[0] == "sweep_var,value,stat,number");
  CHECK(lines[1] == "size,32,median,1");

  CoverageResult c;
  c.cells.resize(20);
  std::ostringstream cov;
  write_coverage_csv(cov, c);
  CHECK(lines_of(cov.str()).size() == 21);

  std::ostringstream ps;
  write_paramstudy_csv(ps, std::vector<ParamStudyCell>(6));
  CHECK(lines_of(ps.str()).size() == 7);
}

TEST_CASE("manifest has no volatile fields") {
  Manifest m;
  m.subcommand = "sweep";
  m.arguments = {{"var", "size"}};
  m.seed = 7;
  m.outputs = {"sweep.csv"};
  const std::string a = manifest_json(m);
  CHECK(a == manifest_json(m));
  CHECK(a.find("\"code_version\"") != std::string::npos);
  CHECK(a.find("time") == std::string::npos);
}

// SPDX-License-Identifier: Apache-2.0
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "irshield/cli.hpp"
#include "irshield/errors.hpp"
#include "irshield/results_io.hpp"
#include "irshield/trace_io.hpp"

using namespace irshield;
namespace fs = std::filesystem;

namespace {

struct Sandbox {
  fs::path root;
  std::string quick = std::string(IRSHIELD_SOURCE_DIR) + "/configs/quick.yaml";
  std::string noiseless;

  Sandbox() {
    root = fs::temp_directory_path() / "irshield_cli_tests";
    fs::remove_all(root);
    fs::create_directories(root);
    noiseless = (root / "noiseless.yaml").string();
    std::ofstream(noiseless) << "seed: 2\nradio:\n  snr_db: .inf\nexperiment:\n  session_s: 4\n";
  }
  ~Sandbox() { fs::remove_all(root); }

  std::string dir(const std::string& name) const { return (root / name).string(); }

  int run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int rc = cli::run(args, out, err);
    last_err = err.str();
    return rc;
  }

  std::string last_err;
};

std::size_t data_rows(const std::string& path) {
  std::ifstream in(path);
  std::size_t n = 0;
  for (std::string l; std::getline(in, l);) n += !l.empty() && l[0] != '#';
  return n - 1;
}

}  // namespace

TEST_CASE("value lists and ranges") {
  CHECK(cli::parse_values("32:256:32").size() == 8);
  CHECK(cli::parse_values("32:256:32").back() == 256.0);
  CHECK(cli::parse_values("0,0.4,0.6") == std::vector<double>{0, 0.4, 0.6});
  CHECK(cli::parse_values("0.15") == std::vector<double>{0.15});
  CHECK_THROWS_AS(cli::parse_values("1:2"), ValidationError);
  CHECK_THROWS_AS(cli::parse_values("a,b"), ValidationError);
  CHECK_THROWS_AS(cli::parse_values("5:1:1"), ValidationError);
}

TEST_CASE("exit codes") {
  Sandbox sb;
  CHECK(sb.run({}) == cli::kExitUsage);
  CHECK(sb.run({"simulate", "--motion", "run"}) == cli::kExitUsage);
  CHECK(sb.run({"simulate", "--duration", "0.5", "--out", sb.dir("short")}) == cli::kExitValidation);
  CHECK(sb.last_err.find("--duration") != std::string::npos);

  const std::string bad = sb.dir("bad.yaml");
  std::ofstream(bad) << "radio:\n  n_subcarriers: -1\n";
  CHECK(sb.run({"simulate", "--config", bad, "--out", sb.dir("bad")}) == cli::kExitValidation);

  const std::string broken = sb.dir("broken.csv");
  std::ofstream(broken) << "t_seconds,sigma_bar\n0,1\n0,2\n";
  CHECK(sb.run({"attack", "--reference", broken, "--motion", broken, "--out", sb.dir("x")}) == cli::kExitValidation);
  CHECK(sb.run({"attack", "--reference", broken, "--motion", broken, "--C", "2", "--max-ref"}) == cli::kExitUsage);
}

TEST_CASE("simulate and attack") {
  Sandbox sb;
  REQUIRE(sb.run({"simulate", "--config", sb.noiseless, "--motion", "none", "--defense", "off", "--out",
                  sb.dir("quiet")}) == 0);
  const ObservationSeries quiet = ingest_observation(sb.dir("quiet") + "/observation.csv");
  CHECK(quiet.size() == 4 * 70 - 69);
  for (double v : quiet.values) CHECK(v == 0.0);
  CHECK(fs::exists(sb.dir("quiet") + "/trace.csv"));
  CHECK(fs::exists(sb.dir("quiet") + "/manifest.json"));

  REQUIRE(sb.run({"simulate", "--config", sb.quick, "--motion", "none", "--out", sb.dir("ref")}) == 0);
  REQUIRE(sb.run({"simulate", "--config", sb.quick, "--motion", "walk", "--out", sb.dir("walk")}) == 0);
  const std::string ref = sb.dir("ref") + "/observation.csv";
  const std::string walk = sb.dir("walk") + "/observation.csv";

  REQUIRE(sb.run({"attack", "--reference", ref, "--motion", ref, "--out", sb.dir("self")}) == 0);
  CHECK(ingest_report(sb.dir("self") + "/report.json").report.auc == doctest::Approx(0.5).epsilon(0.01));

  REQUIRE(sb.run({"attack", "--reference", ref, "--motion", walk, "--C", "11", "--out", sb.dir("c11")}) == 0);
  REQUIRE(sb.run({"attack", "--reference", ref, "--motion", walk, "--C", "1", "--out", sb.dir("c1")}) == 0);
  const auto r11 = ingest_report(sb.dir("c11") + "/report.json");
  const auto r1 = ingest_report(sb.dir("c1") + "/report.json");
  CHECK(r11.report.threshold >= r1.report.threshold);
  CHECK(r11.info.conservativeness == 11.0);

  REQUIRE(sb.run({"attack", "--reference", ref, "--motion", walk, "--max-ref", "--out", sb.dir("max")}) == 0);
  const auto rm = ingest_report(sb.dir("max") + "/report.json");
  CHECK(rm.report.fpr == 0.0);
  CHECK(rm.info.rule == "max");
}

TEST_CASE("ingest recomputes the simulated observation") {
  Sandbox sb;
  REQUIRE(sb.run({"simulate", "--config", sb.quick, "--motion", "walk", "--defense", "on", "--duration", "5", "--out",
                  sb.dir("sim")}) == 0);
  REQUIRE(sb.run({"ingest", "--config", sb.quick, "--trace", sb.dir("sim") + "/trace.csv", "--out", sb.dir("ing")}) == 0);
  const auto a = ingest_observation(sb.dir("sim") + "/observation.csv");
  const auto b = ingest_observation(sb.dir("ing") + "/observation.csv");
  CHECK(a.values == b.values);
  CHECK(a.first_index == b.first_index);
}

TEST_CASE("experiment subcommands emit their tables") {
  Sandbox sb;
  REQUIRE(sb.run({"coverage", "--config", sb.quick, "--grid", "5x4", "--defense", "off", "--jobs", "2", "--out",
                  sb.dir("cov")}) == 0);
  CHECK(data_rows(sb.dir("cov") + "/coverage.csv") == 20);

  REQUIRE(sb.run({"sweep", "--config", sb.quick, "--var", "size", "--values", "32:256:32", "--out", sb.dir("sw")}) == 0);
  CHECK(data_rows(sb.dir("sw") + "/sweep.csv") == 8 * 5);

  REQUIRE(sb.run({"paramstudy", "--config", sb.quick, "--R", "0.025,0.05", "--P", "0,0.4,0.6", "--duration", "4",
                  "--out", sb.dir("ps")}) == 0);
  CHECK(data_rows(sb.dir("ps") + "/paramstudy.csv") == 6);

  CHECK(sb.run({"sweep", "--config", sb.quick, "--var", "size", "--values", "32.5", "--out", sb.dir("frac")}) ==
        cli::kExitValidation);
}

TEST_CASE("output directory falls back to IRSHIELD_OUT") {
  Sandbox sb;
  const std::string target = sb.dir("env");
  setenv("IRSHIELD_OUT", target.c_str(), 1);
  const int rc = sb.run({"simulate", "--config", sb.noiseless, "--duration", "2"});
  unsetenv("IRSHIELD_OUT");
  REQUIRE(rc == 0);
  CHECK(fs::exists(target + "/observation.csv"));
}

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "doctest.h"
#include "structsynth/cli.hpp"
#include "structsynth/io.hpp"

using namespace structsynth;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "structsynth");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("structsynth_cli_" + std::to_string(::getpid()))) {
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name, const std::string& contents) const {
    const fs::path p = path / name;
    std::ofstream(p) << contents;
    return p.string();
  }
  std::string at(const std::string& name) const { return (path / name).string(); }
};

const char* kScalarSystem = R"({"n": 1, "n_u": 1, "N": 3,
  "A": [[[1.0]], [[1.0]]], "B": [[[1.0]], [[1.0]]], "D": [[[1.0]], [[1.0]], [[1.0]]]})";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("validate accepts a good system and rejects a singular D0") {
  TempDir dir;
  const auto good = dir.file("good.json", kScalarSystem);
  const Result ok = run_cli({"validate", "--system", good});
  CHECK(ok.code == cli::kExitOk);
  CHECK(ok.out.find("n=1") != std::string::npos);

  const auto bad = dir.file("bad.json", R"({"n": 1, "n_u": 1, "N": 2,
    "A": [[[1.0]]], "B": [[[1.0]]], "D": [[[0.0]], [[1.0]]]})");
  CHECK(run_cli({"validate", "--system", bad}).code == cli::kExitInputError);
}

TEST_CASE("malformed JSON reports a line-anchored error") {
  TempDir dir;
  const auto broken = dir.file("broken.json", "{\n  \"n\": 1,\n  \"A\": [\n}");
  const Result r = run_cli({"validate", "--system", broken});
  CHECK(r.code == cli::kExitInputError);
  CHECK(r.err.find("broken.json:4:") != std::string::npos);
  CHECK(r.err.find("malformed JSON") != std::string::npos);
}

TEST_CASE("parse and usage errors exit with code 2") {
  CHECK(run_cli({}).code == cli::kExitInputError);
  CHECK(run_cli({"frobnicate"}).code == cli::kExitInputError);
  CHECK(run_cli({"validate", "--system", "/nonexistent/sys.json"}).code == cli::kExitInputError);
  TempDir dir;
  const auto sys = dir.file("s.json", kScalarSystem);
  CHECK(run_cli({"synth", "--system", sys, "--objective", "kyfan:x"}).code == cli::kExitInputError);
  CHECK(run_cli({"synth", "--system", sys, "--objective", "kyfan:4"}).code == cli::kExitInputError);
  CHECK(run_cli({"opt", "--system", sys, "--target", "h3"}).code == cli::kExitInputError);
  CHECK(run_cli({"--help"}).code == cli::kExitOk);
}

TEST_CASE("synth then bound reproduces the reported objective") {
  TempDir dir;
  const auto sys = dir.file("s.json", kScalarSystem);
  for (const std::string obj : {"spectral", "nuclear", "kyfan:2", "h2", "hinf"}) {
    const auto report = dir.at("report.json");
    REQUIRE(run_cli({"synth", "--system", sys, "--objective", obj, "--out", report}).code == 0);
    const Json rep = read_json_file(report);
    const Result b = run_cli({"bound", "--system", sys, "--gains", report, "--objective", obj});
    REQUIRE(b.code == 0);
    const Json j = parse_json_text(b.out, "bound");
    const double expected = rep["value"].get<double>();
    CHECK(std::abs(j["value"].get<double>() - expected) <= 1e-10 * std::max(1.0, std::abs(expected)));
    CHECK(j["ub_h2"].get<double>() >= j["h2"].get<double>() * (1.0 - 1e-12));
    CHECK(j["ub_hinf"].get<double>() >= j["hinf"].get<double>() * (1.0 - 1e-12));
    CHECK(j.contains("aposteriori_bound_h2"));
  }
}

TEST_CASE("synth runs the Ky-Fan(nN-1) surrogate on an n = 10, N = 3 system") {
  TempDir dir;
  const auto report = dir.at("r.json");
  const Result r = run_cli({"synth", "--seed", "4", "--horizon", "3", "--objective", "kyfan:29", "--max-iters",
                            "30", "--out", report});
  REQUIRE(r.code == 0);
  const Json j = read_json_file(report);
  CHECK(j["objective"] == "kyfan:29");
  CHECK(j["singular_values"].size() == 30);
  CHECK(j["system"]["n"] == 10);
  CHECK(j["trace"].size() >= 1);

  // The embedded system and constraints are valid inputs.
  const auto sys = dir.file("sys.json", j["system"].dump());
  const auto mask = dir.file("mask.json", j["constraints"].dump());
  CHECK(run_cli({"validate", "--system", sys, "--mask", mask}).code == 0);
}

TEST_CASE("opt writes the baseline value and gains") {
  TempDir dir;
  const auto sys = dir.file("s.json", kScalarSystem);
  const Result h2 = run_cli({"opt", "--system", sys, "--target", "h2"});
  REQUIRE(h2.code == 0);
  CHECK(parse_json_text(h2.out, "opt")["value"].get<double>() == doctest::Approx(3.0));
  const Result hinf = run_cli({"opt", "--system", sys, "--target", "hinf", "--tol", "1e-9"});
  REQUIRE(hinf.code == 0);
  const Json j = parse_json_text(hinf.out, "opt");
  CHECK(j["critical_gamma"].get<double>() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(j["gains"]["K"].size() == 2);
}

TEST_CASE("bound accepts a reference optimum for the ratio bounds") {
  TempDir dir;
  const auto sys = dir.file("s.json", kScalarSystem);
  const auto ref = dir.at("ref.json");
  REQUIRE(run_cli({"opt", "--system", sys, "--target", "h2", "--out", ref}).code == 0);
  const auto gains = dir.file("g.json", R"({"K": [[[-0.5]], [[-0.5]]]})");
  const Result r = run_cli({"bound", "--system", sys, "--gains", gains, "--reference", ref});
  REQUIRE(r.code == 0);
  const Json j = parse_json_text(r.out, "bound");
  CHECK(j.contains("subopt_ratio_h2"));
  CHECK(j.contains("subopt_ratio_hinf"));
  const auto wrong = dir.file("w.json", R"({"K": [[[1.0, 2.0]]]})");
  CHECK(run_cli({"bound", "--system", sys, "--gains", wrong}).code == cli::kExitInputError);
}

TEST_CASE("curves emits the default 401-row table") {
  const Result r = run_cli({"curves", "--horizon", "100"});
  REQUIRE(r.code == 0);
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 402);
  CHECK(r.out.rfind("k,h2,hinf,ub_h2,ub_hinf", 0) == 0);
}

TEST_CASE("bench writes the trial CSV and is repeatable") {
  TempDir dir;
  const auto cfg = dir.file("cfg.json", R"({"horizon": 2, "max_iterations": 30, "threads": 1})");
  const std::vector<std::string> args = {"bench", "--config", cfg, "--trials", "2", "--target", "hinf", "--seed", "5"};
  const Result a = run_cli(args);
  REQUIRE(a.code == 0);
  CHECK(std::count(a.out.begin(), a.out.end(), '\n') == 3);
  const auto out = dir.at("t.csv");
  std::vector<std::string> with_out = args;
  with_out.insert(with_out.end(), {"--out", out});
  const Result b = run_cli(with_out);
  REQUIRE(b.code == 0);
  CHECK(b.out.find("trials: 2") != std::string::npos);
  CHECK(fs::exists(out));
  const auto bad_cfg = dir.file("bad.json", R"({"coupling": "sparse"})");
  CHECK(run_cli({"bench", "--config", bad_cfg, "--trials", "1"}).code == cli::kExitInputError);
}

}  // TEST_SUITE

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "rwlab/experiment.hpp"

namespace fs = std::filesystem;

namespace {

fs::path sandbox() {
  const auto dir = fs::temp_directory_path() / "rwlab_expcli_test";
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kSpeedConfig = R"({
  "model": "gwtree",
  "experiment_note": "small speed curve",
  "seed": 20240701,
  "params": {
    "experiment": "speed_curve",
    "pmf": {"0": 0.1, "2": 0.9},
    "beta_grid": [0.8, 2.0, 6.0]
  },
  "budget": {"steps": 20000, "replicas": 8, "workers": 2},
  "output": "OUTDIR"
})";

}  // namespace

TEST_CASE("run writes results, summary digests and a manifest") {
  const auto dir = sandbox();
  const auto cfg = dir / "speed.json";
  std::string text(kSpeedConfig);
  text.replace(text.find("OUTDIR"), 6, (dir / "run1").string());
  write(cfg, text);

  CHECK(rwlab::run_experiment(cfg.string()) == 0);
  CHECK(fs::exists(dir / "run1" / "results.csv"));
  CHECK(fs::exists(dir / "run1" / "manifest.json"));
  const auto results = slurp(dir / "run1" / "results.csv");
  CHECK(results.find("beta,v_hat,ci_lo,ci_hi,n_steps") == 0);
  CHECK(results.find("\r") == std::string::npos);  // LF endings only
}

TEST_CASE("reruns are byte-identical and worker-count independent") {
  const auto dir = sandbox();
  const auto cfg = dir / "rerun.json";
  std::string text(kSpeedConfig);
  text.replace(text.find("OUTDIR"), 6, (dir / "runA").string());
  write(cfg, text);
  CHECK(rwlab::run_experiment(cfg.string()) == 0);
  CHECK(rwlab::run_experiment(cfg.string(), (dir / "runB").string()) == 0);
  CHECK(slurp(dir / "runA" / "results.csv") ==
        slurp(dir / "runB" / "results.csv"));

  // 1 worker vs 8 workers
  std::string one(kSpeedConfig);
  one.replace(one.find("OUTDIR"), 6, (dir / "runW1").string());
  one.replace(one.find("\"workers\": 2"), 12, "\"workers\": 1");
  write(dir / "w1.json", one);
  std::string eight(kSpeedConfig);
  eight.replace(eight.find("OUTDIR"), 6, (dir / "runW8").string());
  eight.replace(eight.find("\"workers\": 2"), 12, "\"workers\": 8");
  write(dir / "w8.json", eight);
  CHECK(rwlab::run_experiment((dir / "w1.json").string()) == 0);
  CHECK(rwlab::run_experiment((dir / "w8.json").string()) == 0);
  CHECK(slurp(dir / "runW1" / "results.csv") ==
        slurp(dir / "runW8" / "results.csv"));
}

TEST_CASE("figure reshapes results into long format") {
  const auto dir = sandbox();
  const auto cfg = dir / "fig.json";
  std::string text(kSpeedConfig);
  text.replace(text.find("OUTDIR"), 6, (dir / "runF").string());
  write(cfg, text);
  CHECK(rwlab::run_experiment(cfg.string()) == 0);
  CHECK(rwlab::make_figure((dir / "runF").string()) == 0);
  const auto fig = slurp(dir / "runF" / "figure.csv");
  CHECK(fig.find("x,y,series,ci_lo,ci_hi") == 0);
  CHECK(fig.find("speed") != std::string::npos);
}

TEST_CASE("aging figure emits empirical and arcsine series") {
  const auto dir = sandbox();
  write(dir / "aging.json", std::string(R"({
    "model": "btm", "seed": 7,
    "params": {"experiment": "aging", "alpha": 0.5, "beta": "inf",
               "t": 3000.0, "ratio_grid": [0.3, 0.6]},
    "budget": {"replicas": 200},
    "output": ")") + (dir / "runG").string() + "\"}\n");
  CHECK(rwlab::run_experiment((dir / "aging.json").string()) == 0);
  CHECK(rwlab::make_figure((dir / "runG").string()) == 0);
  const auto fig = slurp(dir / "runG" / "figure.csv");
  CHECK(fig.find("empirical") != std::string::npos);
  CHECK(fig.find("arcsine") != std::string::npos);
}

TEST_CASE("bad configs exit with code 2") {
  const auto dir = sandbox();
  CHECK(rwlab::run_experiment((dir / "missing.json").string()) == 2);
  write(dir / "broken.json", "{ not json");
  CHECK(rwlab::run_experiment((dir / "broken.json").string()) == 2);
  write(dir / "nomodel.json", R"({"seed": 1})");
  CHECK(rwlab::run_experiment((dir / "nomodel.json").string()) == 2);
  write(dir / "badmodel.json",
        R"({"model": "nope", "seed": 1, "params": {}, "budget": {}})");
  CHECK(rwlab::run_experiment((dir / "badmodel.json").string()) == 2);
}

TEST_CASE("selftest passes") { CHECK(rwlab::selftest() == 0); }

TEST_CASE("analytics handles pmf atoms and rejects malformed input") {
  CHECK(rwlab::print_analytics({"0:0.1", "2:0.9"}, 6.0) == 0);
  CHECK(rwlab::print_analytics({"0:0.25", "1:0.3333333333", "2:0.4166666667"},
                               0.0) == 0);
  CHECK(rwlab::print_analytics({"nonsense"}, 0.0) == 2);
}

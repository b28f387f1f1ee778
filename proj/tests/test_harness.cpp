#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "treerange/harness.hpp"
#include "treerange/verify.hpp"

using namespace treerange;
using harness::ExperimentConfig;

namespace {

std::string strip_elapsed(const std::string& csv) {
  // Remove the final (elapsed) column from every row.
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) {
    auto pos = line.rfind(',');
    out += line.substr(0, pos);
    out += '\n';
  }
  return out;
}

int run_cfg(const std::string& json, std::string* csv_out = nullptr) {
  auto cfg = harness::parse_config(json);
  std::ostringstream csv, err;
  int code = harness::run(cfg, csv, err);
  if (csv_out) *csv_out = csv.str();
  return code;
}

}  // namespace

TEST_CASE("config parsing rejects unknown keys") {
  CHECK_THROWS_AS(harness::parse_config(R"({"experiment":"brw","bogus":1})"),
                  ConfigError);
  CHECK_THROWS_AS(harness::parse_config(R"({"experiment":"brw","jump":{"kind":"srw","dims":4}})"),
                  ConfigError);
  CHECK_THROWS_AS(harness::parse_config("not json"), ConfigError);
  CHECK_THROWS_AS(harness::parse_config(R"({"n": 5})"), ConfigError);

  auto cfg = harness::parse_config(
      R"({"experiment":"no-return","offspring":{"kind":"geometric"},)"
      R"("jump":{"kind":"srw","dim":5},"horizon":10,"reps":5,"seed":3})");
  CHECK(cfg.experiment == "no-return");
  CHECK(cfg.dim == 5);
  CHECK(cfg.horizon == 10);
}

TEST_CASE("unknown experiment exits with code 2") {
  std::string csv;
  CHECK(run_cfg(R"({"experiment":"frobnicate"})", &csv) == 2);
  // Validation failures too.
  CHECK(run_cfg(R"({"experiment":"no-return","horizon":0,"reps":3})") == 2);
  CHECK(run_cfg(R"({"experiment":"brw","p":0})") == 2);
}

TEST_CASE("csv header and reps=1 warning") {
  std::string csv;
  int code = run_cfg(
      R"({"experiment":"infinite-range","jump":{"kind":"srw","dim":5},)"
      R"("n":100,"reps":1,"seed":5})",
      &csv);
  CHECK(code == 0);
  CHECK(csv.rfind("experiment,dim,n,p,reps,seed,value,stderr,extra_json,elapsed_ms\n",
                  0) == 0);
  CHECK(csv.find("reps=1") != std::string::npos);
}

TEST_CASE("worker count does not change results") {
  const char* base =
      R"({"experiment":"%s","jump":{"kind":"srw","dim":5},%s"reps":40,"seed":9,"workers":%d})";
  for (std::string exp : {"infinite-range", "no-return", "snake-excursion"}) {
    std::string params = exp == "no-return" ? R"("horizon":200,)" : R"("n":200,)";
    char buf1[256], buf2[256];
    std::snprintf(buf1, sizeof buf1, base, exp.c_str(), params.c_str(), 1);
    std::snprintf(buf2, sizeof buf2, base, exp.c_str(), params.c_str(), 3);
    std::string csv1, csv2;
    CHECK(run_cfg(buf1, &csv1) == 0);
    CHECK(run_cfg(buf2, &csv2) == 0);
    CHECK(strip_elapsed(csv1) == strip_elapsed(csv2));
  }
}

TEST_CASE("environment seed override") {
  auto cfg = harness::parse_config(R"({"experiment":"brw","seed":5})");
  setenv("TREERANGE_SEED", "777", 1);
  harness::apply_env_seed(cfg);
  unsetenv("TREERANGE_SEED");
  CHECK(cfg.seed == 777);
}

TEST_CASE("population experiment writes replica rows") {
  std::string path = "/tmp/treerange_test_brw.csv";
  std::string csv;
  std::string cfg = std::string(
      R"({"experiment":"brw","jump":{"kind":"srw","dim":5},"p":2,"reps":25,)") +
      R"("seed":11,"cap":100000,"out":")" + path + R"("})";
  CHECK(run_cfg(cfg, &csv) == 0);
  std::ifstream f(path);
  REQUIRE(f.good());
  std::string line;
  std::getline(f, line);
  CHECK(line == "replica,p,dim,R,N,generations,truncated");
  int rows = 0;
  while (std::getline(f, line)) ++rows;
  CHECK(rows == 25);
  std::remove(path.c_str());
}

TEST_CASE("fast verification level passes") {
  auto checks = verify::run_checks(verify::Level::kFast, 1, 2024);
  for (const auto& c : checks) {
    INFO(c.id, ": value=", c.value, " expected=", c.expected, " note=", c.note);
    CHECK(c.pass);
  }
}

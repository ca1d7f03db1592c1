// Copyright 2026 The QPR Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fixtures.hpp"
#include "qpr/config.hpp"
#include "qpr/pipeline.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace qpr;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json cos_doc() {
  return json::parse(R"({
    "omega": [1.0, 0.6180339887498949],
    "forcing": [{"nu": [0, 0], "mu": [1], "re": 0.5}, {"nu": [0, 0], "mu": [-1], "re": 0.5}],
    "eps": [1e-3, 1e-2], "K": 3, "grid": 16
  })");
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("qpr_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> csv_lines(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);)
    if (line.empty() || line[0] != '#') out.push_back(line);
  return out;
}

int run_quiet(const RunConfig& cfg) {
  std::ostringstream log, err;
  return run(cfg, false, log, err);
}

}  // namespace

TEST_CASE("config parsing") {
  const RunConfig cfg = parse_config(cos_doc());
  CHECK(cfg.r == 1);
  CHECK(cfg.omega.size() == 2);
  CHECK(cfg.eps == std::vector<double>{1e-3, 1e-2});
  CHECK(cfg.K == 3);
  CHECK(cfg.mode == "expand");
  CHECK(cfg.forcing.size() == 2);

  auto bad = [](const std::function<void(json&)>& edit) {
    json d = cos_doc();
    edit(d);
    return d;
  };
  CHECK_THROWS_AS(parse_config(bad([](json& d) { d["typo"] = 1; })), ConfigError);
  CHECK_THROWS_AS(parse_config(bad([](json& d) { d["eps"] = {1e-2, 1e-3}; })), ConfigError);
  CHECK_THROWS_AS(parse_config(bad([](json& d) { d["K"] = 0; })), ConfigError);
  CHECK_THROWS_AS(parse_config(bad([](json& d) { d["mode"] = "plot"; })), ConfigError);
  CHECK_THROWS_AS(parse_config(bad([](json& d) { d["forcing"][1]["mu"] = {1, 0}; })), ConfigError);
  CHECK_THROWS_AS(parse_config(bad([](json& d) { d["forcing"][0]["nu"] = {0}; })), ConfigError);
  CHECK_THROWS_AS(parse_config(bad([](json& d) { d.erase("omega"); })), ConfigError);
  // reality broken: the model is rejected before any computation
  const RunConfig broken = parse_config(bad([](json& d) { d["forcing"][1]["im"] = 0.1; }));
  CHECK_THROWS_AS(build_model(broken), ConfigError);
  CHECK_NOTHROW(build_model(cfg));
}

TEST_CASE("config hash") {
  RunConfig a = parse_config(cos_doc());
  RunConfig b = a;
  b.output_dir = "elsewhere";
  b.workers = 8;
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 40);
  b.eps = {1e-3};
  CHECK(config_hash(a) != config_hash(b));
  CHECK_FALSE(config_echo(a).contains("output_dir"));
}

TEST_CASE("bryuno mode writes the tables with provenance") {
  RunConfig cfg = parse_config(cos_doc());
  cfg.mode = "bryuno";
  cfg.output_dir = scratch("bryuno").string();
  REQUIRE(run_quiet(cfg) == kExitOk);
  const fs::path dir = cfg.output_dir;
  const std::string alpha = slurp(dir / "alpha.csv");
  CHECK(alpha.rfind("# config_sha1=" + config_hash(cfg) + "\n", 0) == 0);
  const auto rows = csv_lines(dir / "alpha.csv");
  REQUIRE(rows.size() == 10);
  CHECK(rows[0] == "m,alpha_m");
  const AlphaTable table(testing::golden(), 8);
  for (int m = 0; m <= 8; ++m) {
    const std::string& line = rows[static_cast<std::size_t>(m) + 1];
    CHECK(std::stod(line.substr(line.find(',') + 1)) == doctest::Approx(table[m]).epsilon(1e-15));
  }
  const json report = json::parse(slurp(dir / "report.json"));
  CHECK(report["status"] == "ok");
  CHECK(report["config_sha1"] == config_hash(cfg));
  CHECK(report["artifacts"].size() == 2);
  CHECK(report["artifacts"][0]["module"] == "frequency");
}

TEST_CASE("trees mode reports shape counts and a clean audit") {
  json d = json::parse(slurp(fs::path(QPR_CONFIG_DIR) / "benchmark.json"), nullptr, true, true);
  RunConfig cfg = parse_config(d);
  cfg.mode = "trees";
  cfg.K = 4;
  cfg.output_dir = scratch("trees").string();
  REQUIRE(run_quiet(cfg) == kExitOk);
  const auto rows = csv_lines(fs::path(cfg.output_dir) / "trees_summary.csv");
  const std::vector<std::string> shapes{"1", "1", "2", "4"};
  for (std::size_t k = 1; k <= 4; ++k) {
    std::vector<std::string> cols;
    std::stringstream ss(rows[k]);
    for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
    CHECK(cols[1] == shapes[k - 1]);
    CHECK(cols[5] == "0");
    CHECK(cols[6] == "0");
  }
}

TEST_CASE("verify on cos(beta) passes and is reproducible") {
  RunConfig cfg = parse_config(cos_doc());
  cfg.mode = "verify";
  cfg.output_dir = scratch("verify_a").string();
  REQUIRE(run_quiet(cfg) == kExitOk);
  const json report = json::parse(slurp(fs::path(cfg.output_dir) / "report.json"));
  for (const auto& e : report["results"]["verify"]) {
    CHECK(e["beta0_star"][0].get<double>() == 0.0);
    for (const auto& c : e["checks"]) CHECK(c["pass"].get<bool>());
  }
  RunConfig again = cfg;
  again.output_dir = scratch("verify_b").string();
  REQUIRE(run_quiet(again) == kExitOk);
  for (const char* f : {"verify.csv", "locked.csv"})
    CHECK(slurp(fs::path(cfg.output_dir) / f) == slurp(fs::path(again.output_dir) / f));
}

TEST_CASE("exit codes") {
  RunConfig cfg = parse_config(cos_doc());
  cfg.mode = "expand";
  cfg.beta0 = {std::numbers::pi};
  cfg.output_dir = scratch("p1").string();
  CHECK(run_quiet(cfg) == kExitMathRegion);
  const json err = json::parse(slurp(fs::path(cfg.output_dir) / "error.json"));
  CHECK(err["kind"] == "property1");

  RunConfig budget = parse_config(cos_doc());
  budget.p_max = 9;
  budget.output_dir = scratch("budget").string();
  CHECK(run_quiet(budget) == kExitBudget);
  CHECK(json::parse(slurp(fs::path(budget.output_dir) / "error.json"))["kind"] == "budget");

  RunConfig resonant = parse_config(cos_doc());
  resonant.omega = {1.0, 0.5};
  resonant.output_dir = scratch("resonant").string();
  CHECK(run_quiet(resonant) == kExitMathRegion);

  std::ostringstream log, e;
  RunOptions opt;
  opt.out = scratch("missing").string();
  CHECK(run_file("/nonexistent/config.json", opt, log, e) == kExitConfig);
  CHECK(e.str().find("\"exit_code\":2") != std::string::npos);
}

TEST_CASE("command line front end") {
  const fs::path out = scratch("cli");
  const std::string base = std::string(QPR_CLI_PATH) + " --config " + QPR_CONFIG_DIR + "/bryuno.json --out " +
                           out.string() + " 2>/dev/null";
  CHECK(WEXITSTATUS(std::system(base.c_str())) == 0);
  CHECK(fs::exists(out / "alpha.csv"));
  const std::string bogus = std::string(QPR_CLI_PATH) + " --config " + QPR_CONFIG_DIR +
                            "/bryuno.json --mode plot --out " + out.string() + " 2>/dev/null";
  CHECK(WEXITSTATUS(std::system(bogus.c_str())) == 2);
}

// Copyright 2026 The pathtrace Authors
//
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

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "experiment.hpp"
#include "pathtrace/errors.hpp"
#include "pathtrace/selfcheck.hpp"

using namespace pathtrace;
using namespace pathtrace::cli;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / ("pathtrace_test_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& f) const { return (path / f).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

std::string small_config(const std::string& prefix, int points, int paths,
                         const std::string& mode) {
  nlohmann::json j = {{"task", {{"task", "swap2"}, {"N", 5}}},
                      {"grid", {{"T0", 0.4}, {"T_end", 0.2}, {"points", points}}},
                      {"search", {{"seed", 3}, {"max_iter", 200}}},
                      {"paths", paths},
                      {"mode", mode},
                      {"output", prefix}};
  return j.dump();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("config round trip through print-config") {
  for (const std::string name : {"fig1", "fig2", "fig3"}) {
    const ExperimentConfig c = recipe(name);
    const ExperimentConfig back =
        config_from_json(nlohmann::json::parse(config_to_json(c).dump()));
    CHECK(config_to_json(back) == config_to_json(c));
  }
  TempDir dir("print");
  spit(dir / "c.json", small_config("x", 3, 2, "trace"));
  const ExperimentConfig loaded = load_config(dir / "c.json");
  CHECK(loaded.paths == 2);
  CHECK(loaded.search.seed == 3);
  CHECK(loaded.grid.values().size() == 3);
}

TEST_CASE("recipes") {
  const ExperimentConfig f1 = recipe("fig1");
  CHECK(f1.paths == 11);
  CHECK(f1.grid.points == 2000);
  CHECK(f1.task.n_segments == 5);
  CHECK(recipe("fig2").grid.points == 900);
  CHECK(recipe("fig3").effective_sweep_grid().points == 400);
  CHECK(recipe("fig3").grid.points == 1350);
  CHECK_THROWS_AS(recipe("fig4"), ConfigError);
}

TEST_CASE("config diagnostics") {
  TempDir dir("diag");
  spit(dir / "broken.json", "{\n  \"task\": {\"task\": \"swap2\"},\n  \"grid\": \n");
  try {
    load_config(dir / "broken.json");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("broken.json:4:") != std::string::npos);
  }
  spit(dir / "field.json",
       R"({"task": {"task": "swap2"}, "grid": {"T0": 0.1, "T_end": 0.2, "points": 3}})");
  try {
    load_config(dir / "field.json");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("grid") != std::string::npos);
  }
  CHECK(run({"pathtrace", "run", "--config", dir / "field.json"}) == kExitConfig);
  CHECK(run({"pathtrace", "run", "--config", dir / "missing.json"}) == kExitConfig);
  CHECK(run({"pathtrace", "bogus"}) == kExitConfig);

  spit(dir / "empty.json", R"({"task": {"task": "swap2"}, "grid": [], "output": ")" +
                               (dir / "e") + "\"}");
  CHECK(run({"pathtrace", "sweep", "--config", dir / "empty.json"}) == kExitConfig);
}

TEST_CASE("single point writes a single row") {
  TempDir dir("one");
  spit(dir / "c.json", small_config(dir / "one", 1, 1, "trace"));
  REQUIRE(run({"pathtrace", "trace", "--config", dir / "c.json"}) == kExitOk);
  const auto rows = lines(slurp(dir / "one.path0.csv"));
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] ==
        "path_id,point_index,T_over_tau,epsilon,iterations,converged_reason,"
        "p_1,p_2,p_3,p_4,p_5");
  CHECK(read_curve_csv(dir / "one.path0.csv").size() == 1);
}

TEST_CASE("reruns and thread counts give byte-identical files") {
  TempDir dir("det");
  spit(dir / "a.json", small_config(dir / "a", 6, 3, "frontier"));
  spit(dir / "b.json", small_config(dir / "b", 6, 3, "frontier"));
  REQUIRE(run({"pathtrace", "run", "--config", dir / "a.json", "--threads", "1"}) == kExitOk);
  REQUIRE(run({"pathtrace", "run", "--config", dir / "b.json", "--threads", "3"}) == kExitOk);
  for (const std::string suffix :
       {".path0.csv", ".path1.csv", ".path2.csv", ".frontier.csv", ".sweep.csv"}) {
    const std::string a = slurp(dir / ("a" + suffix));
    CHECK(!a.empty());
    CHECK(a == slurp(dir / ("b" + suffix)));
  }
  for (const auto& entry : fs::directory_iterator(dir.path)) {
    CHECK(entry.path().extension() != ".tmp");
  }
}

TEST_CASE("seed precedence") {
  TempDir dir("seed");
  spit(dir / "c.json", small_config(dir / "s", 2, 1, "trace"));
  auto seed_of = [&](std::vector<std::string> extra) {
    std::vector<std::string> args = {"pathtrace", "run", "--config", dir / "c.json", "--out",
                                     dir / "s"};
    args.insert(args.end(), extra.begin(), extra.end());
    REQUIRE(run(args) == kExitOk);
    return nlohmann::json::parse(slurp(dir / "s.config.json")).at("search").at("seed").get<int>();
  };
  CHECK(seed_of({}) == 3);
  setenv("PATHTRACE_SEED", "17", 1);
  CHECK(seed_of({}) == 17);
  CHECK(seed_of({"--seed", "5"}) == 5);
  unsetenv("PATHTRACE_SEED");
}

TEST_CASE("simulate") {
  TempDir dir("sim");
  spit(dir / "net.json", nlohmann::json(two_mode_network()).dump());
  spit(dir / "zero.json", protocol_to_json(Protocol::zeros(0.3, 1, 5), {}).dump());
  REQUIRE(run({"pathtrace", "simulate", "--protocol", dir / "zero.json", "--network",
               dir / "net.json", "--out", dir / "zero.csv"}) == kExitOk);
  const auto rows = lines(slurp(dir / "zero.csv"));
  REQUIRE(rows.size() == 7);
  CHECK(rows[0] == "segment,t_over_tau,n_A,n_B,S_A,S_B,nu_1,nu_2");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const std::string n_a = rows[i].substr(0, rows[i].find(",", rows[i].find(",") + 1));
    CHECK(std::stod(rows[i].substr(n_a.size() + 1)) == doctest::Approx(1.0).epsilon(1e-12));
  }

  // Best protocol from a short trace: final n_A equals the stored error.
  spit(dir / "c.json", small_config(dir / "t", 3, 1, "trace"));
  REQUIRE(run({"pathtrace", "trace", "--config", dir / "c.json"}) == kExitOk);
  const auto frontier = read_curve_csv(dir / "t.frontier.csv");
  REQUIRE(run({"pathtrace", "extract", "--csv", dir / "t.frontier.csv", "--row", "0",
               "--out", dir / "best.json"}) == kExitOk);
  REQUIRE(run({"pathtrace", "simulate", "--protocol", dir / "best.json", "--network",
               dir / "net.json", "--out", dir / "best.csv"}) == kExitOk);
  const auto sim = lines(slurp(dir / "best.csv"));
  std::vector<double> nu1;
  std::vector<double> last;
  for (std::size_t i = 1; i < sim.size(); ++i) {
    std::vector<double> cells;
    std::stringstream ss(sim[i]);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(std::stod(c));
    nu1.push_back(cells[6]);
    last = cells;
  }
  CHECK(std::abs(last[2] - frontier[0].error) <= 1e-12);
  for (double v : nu1) CHECK(std::abs(v - nu1.front()) <= 1e-9);

  spit(dir / "two.json", protocol_to_json(Protocol::zeros(0.3, 2, 5), {}).dump());
  CHECK(run({"pathtrace", "simulate", "--protocol", dir / "two.json", "--network",
             dir / "net.json"}) == kExitConfig);
}

TEST_CASE("check command and mutation") {
  CHECK(run({"pathtrace", "check"}) == kExitOk);

  CheckOptions broken;
  broken.drift = [](const NetworkSpec& net, std::span<const double> controls) {
    ComplexMatrix a = build_drift(net, controls).entries();
    a(ann(0), ann(0)) = -a(ann(0), ann(0));  // sign error on one diagonal
    return DriftMatrix(a);
  };
  const auto results = run_self_checks(broken);
  bool commutator_failed = false;
  for (const auto& r : results) {
    if (r.name == "commutator-preservation") commutator_failed = !r.passed;
  }
  CHECK(commutator_failed);

  CheckOptions coupling;
  coupling.drift = [](const NetworkSpec& net, std::span<const double> controls) {
    ComplexMatrix a = build_drift(net, controls).entries();
    a(ann(0), ann(1)) = -a(ann(0), ann(1));  // sign error on one coupling
    return DriftMatrix(a);
  };
  for (const auto& r : run_self_checks(coupling)) {
    if (r.name == "commutator-preservation") CHECK(!r.passed);
  }

  CheckOptions a;
  a.seed = 99;
  const auto r1 = run_self_checks(a);
  const auto r2 = run_self_checks(a);
  REQUIRE(r1.size() == r2.size());
  for (std::size_t i = 0; i < r1.size(); ++i) CHECK(r1[i].detail == r2[i].detail);
}

TEST_CASE("atomic write replaces the file") {
  TempDir dir("atomic");
  write_atomic(dir / "f.txt", "first");
  write_atomic(dir / "f.txt", "second");
  CHECK(slurp(dir / "f.txt") == "second");
  CHECK(!fs::exists(dir / "f.txt.tmp"));
}

}

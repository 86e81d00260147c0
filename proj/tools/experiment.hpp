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

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pathtrace/optimizer.hpp"
#include "pathtrace/tasks.hpp"
#include "pathtrace/tracer.hpp"

namespace pathtrace::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

// Either {"T0", "T_end", "points"} or an explicit list of durations.
struct GridSpec {
  double t0 = 0.5;
  double t_end = 0.02;
  int points = 200;
  std::optional<std::vector<double>> explicit_values;

  [[nodiscard]] std::vector<double> values() const;
};

enum class RunMode { Sweep, Trace, Frontier };

std::string to_string(RunMode mode);

struct ExperimentConfig {
  TaskSpec task;
  GridSpec grid;
  // Grid for the independent sweep; defaults to `grid`.
  std::optional<GridSpec> sweep_grid;
  SearchConfig search;
  int paths = 1;
  RunMode mode = RunMode::Trace;
  std::string output = "run";

  [[nodiscard]] const GridSpec& effective_sweep_grid() const {
    return sweep_grid ? *sweep_grid : grid;
  }
};

nlohmann::json config_to_json(const ExperimentConfig& config);
// Throws ConfigError naming the offending field.
ExperimentConfig config_from_json(const nlohmann::json& j);
// Throws ConfigError with line/column for malformed JSON.
ExperimentConfig load_config(const std::filesystem::path& path);

// Built-in recipes "fig1", "fig2", "fig3".
ExperimentConfig recipe(const std::string& name);

// Writes `contents` to a sibling temp file and renames it over `path`.
void write_atomic(const std::filesystem::path& path,
                  const std::string& contents);

// path_id, point_index, T_over_tau, epsilon, iterations, converged_reason,
// p_1 ... p_MN. Floats with 17 significant digits.
std::string curve_to_csv(const FrontierCurve& curve, std::size_t n_params);

// One row of a curve CSV read back.
struct CsvRow {
  int path_id = 0;
  int point_index = 0;
  double duration = 0.0;
  double error = 0.0;
  int iterations = 0;
  std::string converged_reason;
  std::vector<double> params;
};

// Throws ConfigError on a malformed header or row.
std::vector<CsvRow> read_curve_csv(const std::filesystem::path& path);

// Per-segment-boundary diagnostics of a protocol applied to a state.
std::string trajectory_csv(const NetworkSpec& network,
                           const MomentMatrix& initial,
                           const Protocol& protocol);

// Entry point shared by the executable and the tests. argv[0] is ignored.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

}  // namespace pathtrace::cli

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

#include "experiment.hpp"

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "pathtrace/errors.hpp"
#include "pathtrace/selfcheck.hpp"

namespace pathtrace::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

GridSpec grid_from_json(const json& j, const std::string& field) {
  GridSpec g;
  if (j.is_array()) {
    std::vector<double> values;
    for (const auto& v : j) values.push_back(parse_double(v, field));
    g.explicit_values = std::move(values);
    return g;
  }
  if (!j.is_object()) {
    throw ConfigError("field '" + field +
                      "': expected {T0, T_end, points} or a list");
  }
  try {
    g.t0 = parse_double(j.at("T0"), field + ".T0");
    g.t_end = parse_double(j.at("T_end"), field + ".T_end");
    g.points = j.at("points").get<int>();
  } catch (const json::exception& e) {
    throw ConfigError("field '" + field + "': " + e.what());
  }
  if (g.points < 1) throw ConfigError("field '" + field + ".points': must be >= 1");
  if (!(g.t_end > 0.0)) throw ConfigError("field '" + field + ".T_end': must be > 0");
  if (g.points > 1 && !(g.t0 > g.t_end)) {
    throw ConfigError("field '" + field + "': T0 must exceed T_end");
  }
  return g;
}

json grid_to_json(const GridSpec& g) {
  if (g.explicit_values) return json(*g.explicit_values);
  return {{"T0", g.t0}, {"T_end", g.t_end}, {"points", g.points}};
}

RunMode mode_from_string(const std::string& s) {
  if (s == "sweep") return RunMode::Sweep;
  if (s == "trace") return RunMode::Trace;
  if (s == "frontier") return RunMode::Frontier;
  throw ConfigError("field 'mode': expected sweep, trace or frontier, got '" +
                    s + "'");
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_grid_point(double x) { return format_double(x); }

// Runs fn(i) for i in [0, n) on `threads` workers. Results must be written to
// per-index slots so the outcome does not depend on scheduling.
template <typename Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> workers;
  for (int t = 0; t < threads; ++t) {
    workers.emplace_back([&] {
      for (int i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& w : workers) w.join();
}

struct RunOptions {
  std::string config_path;
  std::string recipe_name;
  std::string out;
  int threads = 1;
  std::optional<std::uint64_t> seed;
  bool print_config = false;
};

ExperimentConfig resolve_config(const RunOptions& opt) {
  if (opt.config_path.empty() == opt.recipe_name.empty()) {
    throw ConfigError("give exactly one of --config or --recipe");
  }
  ExperimentConfig cfg = opt.config_path.empty() ? recipe(opt.recipe_name)
                                                 : load_config(opt.config_path);
  if (const char* env = std::getenv("PATHTRACE_SEED"); env != nullptr && *env) {
    try {
      cfg.search.seed = std::stoull(env);
    } catch (const std::exception&) {
      throw ConfigError("PATHTRACE_SEED is not an unsigned integer");
    }
  }
  if (opt.seed) cfg.search.seed = *opt.seed;
  if (!opt.out.empty()) cfg.output = opt.out;
  return cfg;
}

std::size_t n_params(const ExperimentConfig& cfg) { return cfg.task.n_params(); }

int do_sweep(const ExperimentConfig& cfg) {
  const auto grid = cfg.effective_sweep_grid().values();
  if (grid.empty()) throw ConfigError("field 'grid': empty grid");
  FrontierCurve curve;
  int code = kExitOk;
  try {
    curve = independent_sweep(cfg.task, grid, cfg.search);
  } catch (const TraceAborted& e) {
    std::cerr << "sweep aborted: " << e.what() << "\n";
    curve = e.partial();
    code = kExitNumerical;
  }
  write_atomic(cfg.output + ".sweep.csv", curve_to_csv(curve, n_params(cfg)));
  std::cout << "wrote " << cfg.output << ".sweep.csv (" << curve.points.size()
            << " points)\n";
  return code;
}

int do_trace(const ExperimentConfig& cfg, int threads) {
  const auto grid = cfg.grid.values();
  if (grid.empty()) throw ConfigError("field 'grid': empty grid");
  std::vector<FrontierCurve> paths(static_cast<std::size_t>(cfg.paths));
  std::vector<std::string> failures(paths.size());
  parallel_for(cfg.paths, threads, [&](int k) {
    const auto idx = static_cast<std::size_t>(k);
    try {
      paths[idx] = trace_path(cfg.task, grid, cfg.search, k);
    } catch (const TraceAborted& e) {
      paths[idx] = e.partial();
      failures[idx] = e.what();
    }
  });
  int code = kExitOk;
  for (std::size_t k = 0; k < paths.size(); ++k) {
    const std::string name = cfg.output + ".path" + std::to_string(k) + ".csv";
    write_atomic(name, curve_to_csv(paths[k], n_params(cfg)));
    if (!failures[k].empty()) {
      std::cerr << "path " << k << " aborted: " << failures[k] << "\n";
      code = kExitNumerical;
    }
  }
  FrontierCurve frontier{CurveKind::MultiPathMin, {}};
  try {
    frontier = multi_path_frontier(paths);
  } catch (const GridMismatchError& e) {
    if (code == kExitOk) throw;
  }
  write_atomic(cfg.output + ".frontier.csv",
               curve_to_csv(frontier, n_params(cfg)));
  std::cout << "wrote " << paths.size() << " path file(s) and "
            << cfg.output << ".frontier.csv\n";
  if (!frontier.points.empty()) {
    const auto t_cr = detect_critical_time(frontier, 1e-4);
    std::cout << "frontier: " << frontier.points.size() << " points, T_cr(1e-4) = "
              << (t_cr ? format_double(*t_cr) : std::string("none")) << " tau\n";
  }
  return code;
}

int cmd_run(const RunOptions& opt, std::optional<RunMode> forced) {
  ExperimentConfig cfg = resolve_config(opt);
  if (forced) cfg.mode = *forced;
  if (opt.print_config) {
    std::cout << config_to_json(cfg).dump(2) << "\n";
    return kExitOk;
  }
  if (opt.threads < 1) throw ConfigError("--threads must be >= 1");
  write_atomic(cfg.output + ".config.json", config_to_json(cfg).dump(2) + "\n");
  int code = kExitOk;
  if (cfg.mode == RunMode::Sweep || cfg.mode == RunMode::Frontier) {
    code = std::max(code, do_sweep(cfg));
  }
  if (cfg.mode == RunMode::Trace || cfg.mode == RunMode::Frontier) {
    code = std::max(code, do_trace(cfg, opt.threads));
  }
  return code;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(parse_double(json(item), "--occupations"));
  }
  return out;
}

int cmd_simulate(const std::string& protocol_path,
                 const std::string& network_path,
                 const std::string& occupations, const std::string& out) {
  const Protocol protocol = protocol_from_json(
      [&] {
        try {
          return json::parse(read_file(protocol_path));
        } catch (const json::parse_error& e) {
          throw ConfigError(protocol_path + ": " + e.what());
        }
      }());
  NetworkSpec network;
  try {
    network = json::parse(read_file(network_path)).get<NetworkSpec>();
  } catch (const json::parse_error& e) {
    throw ConfigError(network_path + ": " + e.what());
  }
  if (protocol.n_controls() != network.n_controls()) {
    throw ConfigError("protocol has " + std::to_string(protocol.n_controls()) +
                      " controls but the network has " +
                      std::to_string(network.n_controls()));
  }
  std::vector<double> occ;
  if (occupations.empty()) {
    occ.assign(network.n_modes(), 0.0);
    occ[0] = 1.0;
  } else {
    occ = parse_list(occupations);
  }
  if (occ.size() != network.n_modes()) {
    throw ConfigError("--occupations: need one value per mode");
  }
  const std::string csv =
      trajectory_csv(network, thermal_state(network, occ), protocol);
  if (out.empty()) {
    std::cout << csv;
  } else {
    write_atomic(out, csv);
  }
  return kExitOk;
}

int cmd_check() {
  CheckOptions opt;
  if (const char* env = std::getenv("CHECK_SEED"); env != nullptr && *env) {
    try {
      opt.seed = std::stoull(env);
    } catch (const std::exception&) {
      throw ConfigError("CHECK_SEED is not an unsigned integer");
    }
  }
  bool all = true;
  for (const auto& r : run_self_checks(opt)) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail
              << "\n";
    all = all && r.passed;
  }
  std::cout << (all ? "all checks passed" : "check failures") << "\n";
  return all ? kExitOk : kExitCheckFailed;
}

int cmd_extract(const std::string& csv_path, int row, int controls,
                double duration_override, const std::string& task,
                const std::string& out) {
  const auto rows = read_curve_csv(csv_path);
  if (row < 0 || static_cast<std::size_t>(row) >= rows.size()) {
    throw ConfigError("--row out of range (file has " +
                      std::to_string(rows.size()) + " rows)");
  }
  const CsvRow& r = rows[static_cast<std::size_t>(row)];
  if (controls < 1 || r.params.size() % static_cast<std::size_t>(controls) != 0) {
    throw ConfigError("--controls does not divide the parameter count");
  }
  const double duration = duration_override >= 0.0 ? duration_override : r.duration;
  const Protocol p = from_parameter_vector(
      duration, static_cast<std::size_t>(controls),
      r.params.size() / static_cast<std::size_t>(controls), r.params);
  const std::string text = protocol_to_json(p, {0, task}).dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    write_atomic(out, text);
  }
  return kExitOk;
}

}  // namespace

std::vector<double> GridSpec::values() const {
  if (explicit_values) return *explicit_values;
  return descending_grid(t0, t_end, points);
}

std::string to_string(RunMode mode) {
  switch (mode) {
    case RunMode::Sweep:
      return "sweep";
    case RunMode::Trace:
      return "trace";
    case RunMode::Frontier:
      return "frontier";
  }
  return "trace";
}

nlohmann::json config_to_json(const ExperimentConfig& config) {
  json j = {{"task", task_to_json(config.task)},
            {"grid", grid_to_json(config.grid)},
            {"search", search_to_json(config.search)},
            {"paths", config.paths},
            {"mode", to_string(config.mode)},
            {"output", config.output}};
  if (config.sweep_grid) j["sweep_grid"] = grid_to_json(*config.sweep_grid);
  return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c;
  if (!j.contains("task")) throw ConfigError("field 'task': missing");
  c.task = task_from_json(j.at("task"));
  if (!j.contains("grid")) throw ConfigError("field 'grid': missing");
  c.grid = grid_from_json(j.at("grid"), "grid");
  if (j.contains("sweep_grid")) {
    c.sweep_grid = grid_from_json(j.at("sweep_grid"), "sweep_grid");
  }
  if (j.contains("search")) c.search = search_from_json(j.at("search"));
  try {
    c.paths = j.value("paths", 1);
    c.mode = mode_from_string(j.value("mode", std::string("trace")));
    c.output = j.value("output", std::string("run"));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (c.paths < 1) throw ConfigError("field 'paths': must be >= 1");
  if (c.output.empty()) throw ConfigError("field 'output': must not be empty");
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    // Translate the byte offset into line and column.
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(path.string() + ":" + std::to_string(line) + ":" +
                      std::to_string(col) + ": " + e.what());
  }
  try {
    return config_from_json(j);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

ExperimentConfig recipe(const std::string& name) {
  ExperimentConfig c;
  if (name == "fig1") {
    c.task = make_swap2(5);
    c.grid = {0.5, 0.005, 2000, std::nullopt};
    c.paths = 11;
    c.mode = RunMode::Frontier;
  } else if (name == "fig2") {
    c.task = make_transfer3(10);
    c.grid = {0.5, 0.005, 900, std::nullopt};
    c.paths = 1;
    c.mode = RunMode::Trace;
  } else if (name == "fig3") {
    c.task = make_tmss3(2.0, 10);
    c.grid = {0.05, 0.0005, 1350, std::nullopt};
    c.sweep_grid = GridSpec{0.05, 0.0005, 400, std::nullopt};
    c.paths = 1;
    c.mode = RunMode::Frontier;
  } else {
    throw ConfigError("unknown recipe '" + name + "' (expected fig1, fig2, fig3)");
  }
  c.output = name;
  return c;
}

void write_atomic(const std::filesystem::path& path,
                  const std::string& contents) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw ConfigError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string curve_to_csv(const FrontierCurve& curve, std::size_t n_params) {
  std::string out =
      "path_id,point_index,T_over_tau,epsilon,iterations,converged_reason";
  for (std::size_t i = 1; i <= n_params; ++i) out += ",p_" + std::to_string(i);
  out += "\n";
  for (const auto& p : curve.points) {
    out += std::to_string(p.path_id) + "," + std::to_string(p.point_index) +
           "," + format_grid_point(p.duration) + "," + format_double(p.error) +
           "," + std::to_string(p.iterations) + "," +
           to_string(p.converged_reason);
    for (Eigen::Index i = 0; i < p.params.size(); ++i) {
      out += "," + format_double(p.params(i));
    }
    out += "\n";
  }
  return out;
}

std::vector<CsvRow> read_curve_csv(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path.string() + ": empty file");
  const std::string prefix =
      "path_id,point_index,T_over_tau,epsilon,iterations,converged_reason";
  if (line.rfind(prefix, 0) != 0) {
    throw ConfigError(path.string() + ": unexpected header");
  }
  std::vector<CsvRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() < 6) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                        ": too few columns");
    }
    try {
      CsvRow r;
      r.path_id = std::stoi(cells[0]);
      r.point_index = std::stoi(cells[1]);
      r.duration = std::stod(cells[2]);
      r.error = std::stod(cells[3]);
      r.iterations = std::stoi(cells[4]);
      r.converged_reason = cells[5];
      for (std::size_t i = 6; i < cells.size(); ++i) {
        r.params.push_back(std::stod(cells[i]));
      }
      rows.push_back(std::move(r));
    } catch (const std::exception&) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                        ": malformed number");
    }
  }
  return rows;
}

std::string trajectory_csv(const NetworkSpec& network,
                           const MomentMatrix& initial,
                           const Protocol& protocol) {
  const Propagation prop =
      propagate_protocol(initial, protocol, network, true);
  const std::size_t m = network.n_modes();
  std::string out = "segment,t_over_tau";
  for (const auto& mode : network.modes()) out += ",n_" + mode.label;
  for (const auto& mode : network.modes()) out += ",S_" + mode.label;
  for (std::size_t k = 1; k <= m; ++k) out += ",nu_" + std::to_string(k);
  out += "\n";
  for (std::size_t s = 0; s < prop.trajectory.size(); ++s) {
    const MomentMatrix& c = prop.trajectory[s];
    out += std::to_string(s) + "," +
           format_double(protocol.segment_duration() * static_cast<double>(s));
    for (std::size_t k = 0; k < m; ++k) out += "," + format_double(c.occupation(k));
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t only[] = {k};
      out += "," + format_double(mode_entropy(reduced_state(c, only))[0]);
    }
    for (double nu : symplectic_eigenvalues(c)) out += "," + format_double(nu);
    out += "\n";
  }
  return out;
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

int run(int argc, const char* const* argv) {
  CLI::App app{"Time-optimal control of linear oscillator networks by path tracing"};
  app.require_subcommand(1);

  RunOptions opt;
  auto add_run_flags = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "Experiment config JSON");
    sub->add_option("--recipe", opt.recipe_name, "Built-in recipe: fig1, fig2, fig3");
    sub->add_option("--out", opt.out, "Output file prefix");
    sub->add_option("--threads", opt.threads, "Worker threads for path tracing");
    sub->add_option("--seed", opt.seed, "RNG seed (overrides config and PATHTRACE_SEED)");
    sub->add_flag("--print-config", opt.print_config,
                  "Print the resolved config and exit");
  };
  auto* run_cmd = app.add_subcommand("run", "Run the config's mode (sweep, trace or frontier)");
  auto* trace_cmd = app.add_subcommand("trace", "Trace paths and assemble the frontier");
  auto* sweep_cmd = app.add_subcommand("sweep", "Independent searches over the grid");
  for (auto* sub : {run_cmd, trace_cmd, sweep_cmd}) add_run_flags(sub);

  std::string protocol_path, network_path, occupations, sim_out;
  auto* sim_cmd = app.add_subcommand("simulate", "Propagate a protocol and write per-segment diagnostics");
  sim_cmd->add_option("--protocol", protocol_path, "Protocol JSON")->required();
  sim_cmd->add_option("--network", network_path, "Network JSON")->required();
  sim_cmd->add_option("--occupations", occupations,
                      "Initial thermal occupations, comma separated (default 1,0,...)");
  sim_cmd->add_option("--out", sim_out, "Output CSV (stdout if omitted)");

  auto* check_cmd = app.add_subcommand("check", "Run the invariant self-checks");

  std::string csv_path, task_name, extract_out;
  int row = 0;
  int controls = 1;
  double duration = -1.0;
  auto* extract_cmd = app.add_subcommand("extract", "Turn a CSV row back into protocol JSON");
  extract_cmd->add_option("--csv", csv_path, "Path, sweep or frontier CSV")->required();
  extract_cmd->add_option("--row", row, "Data row, 0-based");
  extract_cmd->add_option("--controls", controls, "Number of controls M");
  extract_cmd->add_option("--duration", duration, "Override T (units of tau)");
  extract_cmd->add_option("--task", task_name, "Task label stored in meta");
  extract_cmd->add_option("--out", extract_out, "Output JSON (stdout if omitted)");

  std::string recipe_name;
  auto* recipe_cmd = app.add_subcommand("recipe", "Print a built-in recipe config");
  recipe_cmd->add_option("name", recipe_name, "fig1, fig2 or fig3")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run_cmd) return cmd_run(opt, std::nullopt);
    if (*trace_cmd) return cmd_run(opt, RunMode::Trace);
    if (*sweep_cmd) return cmd_run(opt, RunMode::Sweep);
    if (*sim_cmd) return cmd_simulate(protocol_path, network_path, occupations, sim_out);
    if (*check_cmd) return cmd_check();
    if (*extract_cmd) {
      return cmd_extract(csv_path, row, controls, duration, task_name, extract_out);
    }
    if (*recipe_cmd) {
      std::cout << config_to_json(recipe(recipe_name)).dump(2) << "\n";
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ArgumentError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitConfig;
}

}  // namespace pathtrace::cli

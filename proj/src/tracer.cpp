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

#include "pathtrace/tracer.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "pathtrace/errors.hpp"

namespace pathtrace {
namespace {

void check_grid(std::span<const double> grid, bool descending_only) {
  for (double t : grid) {
    if (!(t > 0.0) || !std::isfinite(t)) {
      throw ArgumentError("grid durations must be finite and > 0");
    }
  }
  if (grid.size() < 2) return;
  const bool down = grid[1] < grid[0];
  if (descending_only && !down) {
    throw ArgumentError("trace grid must be strictly descending");
  }
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (down ? !(grid[i] < grid[i - 1]) : !(grid[i] > grid[i - 1])) {
      throw ArgumentError("grid must be strictly monotone");
    }
  }
}

TracePoint solve_point(const TaskSpec& task, double duration,
                       const RealVector& start, const SearchConfig& config,
                       int path_id, int point_index) {
  const SearchResult r = minimize(make_objective(task, duration), start, config);
  TracePoint p;
  p.duration = duration;
  p.error = r.best_error;
  p.params = r.best_params;
  p.iterations = r.iterations;
  p.path_id = path_id;
  p.point_index = point_index;
  p.converged_reason = r.converged_reason;
  p.start_error = r.initial_error;
  return p;
}

void sort_ascending(FrontierCurve& curve) {
  std::sort(curve.points.begin(), curve.points.end(),
            [](const TracePoint& a, const TracePoint& b) {
              return a.duration < b.duration;
            });
}

}  // namespace

std::string to_string(CurveKind kind) {
  switch (kind) {
    case CurveKind::IndependentSweep:
      return "IndependentSweep";
    case CurveKind::SinglePath:
      return "SinglePath";
    case CurveKind::MultiPathMin:
      return "MultiPathMin";
  }
  return "Unknown";
}

std::vector<double> descending_grid(double t0, double t_end, int points) {
  if (points < 1) throw ArgumentError("grid needs at least one point");
  if (!(t0 > 0.0) || !(t_end > 0.0)) {
    throw ArgumentError("grid endpoints must be > 0");
  }
  if (points == 1) return {t0};
  if (!(t0 > t_end)) throw ArgumentError("grid needs T0 > T_end");
  std::vector<double> grid(static_cast<std::size_t>(points));
  const double step = (t0 - t_end) / static_cast<double>(points - 1);
  for (int i = 0; i < points; ++i) {
    grid[static_cast<std::size_t>(i)] = t0 - step * static_cast<double>(i);
  }
  grid.back() = t_end;
  return grid;
}

std::uint64_t sweep_stream(std::size_t grid_index) {
  return (std::uint64_t{1} << 40) + grid_index;
}

FrontierCurve independent_sweep(const TaskSpec& task,
                                std::span<const double> grid,
                                const SearchConfig& config) {
  check_grid(grid, false);
  FrontierCurve curve{CurveKind::IndependentSweep, {}};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const RealVector start = random_protocol(task, config, sweep_stream(i));
    try {
      curve.points.push_back(solve_point(task, grid[i], start, config, -1,
                                         static_cast<int>(i)));
    } catch (const SearchAborted& e) {
      sort_ascending(curve);
      throw TraceAborted(e.what(), std::move(curve));
    }
  }
  sort_ascending(curve);
  return curve;
}

FrontierCurve trace_path(const TaskSpec& task, std::span<const double> grid,
                         const SearchConfig& config, int path_id) {
  check_grid(grid, true);
  FrontierCurve curve{CurveKind::SinglePath, {}};
  RealVector start =
      random_protocol(task, config, static_cast<std::uint64_t>(path_id));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    try {
      // The parameter vector is the values grid, so carrying it over to a
      // shorter duration is exactly the rescale warm start.
      curve.points.push_back(solve_point(task, grid[i], start, config, path_id,
                                         static_cast<int>(i)));
    } catch (const SearchAborted& e) {
      sort_ascending(curve);
      throw TraceAborted(e.what(), std::move(curve));
    }
    start = curve.points.back().params;
  }
  sort_ascending(curve);
  return curve;
}

FrontierCurve multi_path_frontier(std::span<const FrontierCurve> paths) {
  FrontierCurve out{CurveKind::MultiPathMin, {}};
  if (paths.empty()) return out;
  std::map<double, std::size_t> counts;
  for (const auto& path : paths) {
    for (const auto& p : path.points) ++counts[p.duration];
  }
  std::map<double, TracePoint> best;
  for (const auto& path : paths) {
    for (const auto& p : path.points) {
      if (counts[p.duration] != paths.size()) continue;
      auto it = best.find(p.duration);
      if (it == best.end()) {
        best.emplace(p.duration, p);
      } else if (p.error < it->second.error) {
        it->second = p;
      }
    }
  }
  if (best.empty()) {
    throw GridMismatchError("paths share no common duration");
  }
  for (auto& [t, p] : best) out.points.push_back(std::move(p));
  return out;
}

std::optional<double> detect_critical_time(const FrontierCurve& curve,
                                           double threshold) {
  std::optional<double> t_cr;
  for (auto it = curve.points.rbegin(); it != curve.points.rend(); ++it) {
    if (!(it->error <= threshold)) break;
    t_cr = it->duration;
  }
  return t_cr;
}

}  // namespace pathtrace

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

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pathtrace/errors.hpp"
#include "pathtrace/optimizer.hpp"
#include "pathtrace/tasks.hpp"

namespace pathtrace {

struct TracePoint {
  double duration = 0.0;  // T in units of tau
  double error = 0.0;
  RealVector params;
  int iterations = 0;
  int path_id = 0;
  // Position of this duration in the grid as it was supplied (computation
  // order for a traced path).
  int point_index = 0;
  ConvergedReason converged_reason = ConvergedReason::MaxIter;
  // Error at the search's starting point.
  double start_error = 0.0;
};

enum class CurveKind { IndependentSweep, SinglePath, MultiPathMin };

std::string to_string(CurveKind kind);

// Points are kept in ascending order of duration.
struct FrontierCurve {
  CurveKind kind = CurveKind::SinglePath;
  std::vector<TracePoint> points;
};

// A search hit a non-finite objective; carries the points finished so far.
class TraceAborted : public NumericalError {
 public:
  TraceAborted(const std::string& what, FrontierCurve partial)
      : NumericalError(what), partial_(std::move(partial)) {}
  [[nodiscard]] const FrontierCurve& partial() const { return partial_; }

 private:
  FrontierCurve partial_;
};

// `points` durations from t0 down to t_end inclusive, evenly spaced.
std::vector<double> descending_grid(double t0, double t_end, int points);

// Random-stream index used by independent_sweep for grid point i, disjoint
// from the streams used by traced paths.
std::uint64_t sweep_stream(std::size_t grid_index);

/// One cold-started search per duration. Points whose search stalls are
/// recorded with their converged_reason rather than aborting the sweep.
FrontierCurve independent_sweep(const TaskSpec& task,
                                std::span<const double> grid,
                                const SearchConfig& config);

/// Path tracing: optimise at grid[0] from random_protocol(path_id), then
/// for each shorter duration restart the search from the previous optimum
/// with the same values squeezed onto the new duration. Every point is
/// kept, including ones where the error rose.
FrontierCurve trace_path(const TaskSpec& task, std::span<const double> grid,
                         const SearchConfig& config, int path_id);

/// Pointwise minimum over paths, restricted to durations present in every
/// path. Ties go to the earlier path. Throws GridMismatchError if the paths
/// share no duration.
FrontierCurve multi_path_frontier(std::span<const FrontierCurve> paths);

/// Smallest T such that every point at T' >= T has error <= threshold;
/// nullopt if even the longest duration fails.
std::optional<double> detect_critical_time(const FrontierCurve& curve,
                                           double threshold);

}  // namespace pathtrace

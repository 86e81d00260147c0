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

#include <algorithm>
#include <cmath>

#include "pathtrace/errors.hpp"
#include "pathtrace/tracer.hpp"

using namespace pathtrace;

namespace {

TracePoint point(double t, double eps, int path) {
  TracePoint p;
  p.duration = t;
  p.error = eps;
  p.path_id = path;
  p.params = RealVector::Constant(1, eps);
  return p;
}

FrontierCurve curve(const std::vector<std::pair<double, double>>& pts, int path) {
  FrontierCurve c;
  for (const auto& [t, e] : pts) c.points.push_back(point(t, e, path));
  return c;
}

double reevaluate(const TaskSpec& task, const TracePoint& p) {
  return evaluate(task,
                  std::span<const double>(p.params.data(),
                                          static_cast<std::size_t>(p.params.size())),
                  p.duration);
}

}  // namespace

TEST_SUITE("tracer") {

TEST_CASE("descending grid") {
  const auto g = descending_grid(0.5, 0.1, 5);
  REQUIRE(g.size() == 5);
  CHECK(g.front() == 0.5);
  CHECK(g.back() == 0.1);
  CHECK(g[1] == doctest::Approx(0.4));
  CHECK(descending_grid(0.3, 0.1, 1) == std::vector<double>{0.3});
}

TEST_CASE("single-point sweep at long duration") {
  const TaskSpec s = make_swap2();
  const std::vector<double> grid = {0.5};
  const FrontierCurve c = independent_sweep(s, grid, SearchConfig{});
  REQUIRE(c.points.size() == 1);
  CHECK(c.kind == CurveKind::IndependentSweep);
  CHECK(c.points[0].error <= 1e-8);
  CHECK(c.points[0].path_id == -1);
}

TEST_CASE("empty grid gives an empty curve") {
  const std::vector<double> grid;
  CHECK(independent_sweep(make_swap2(), grid, SearchConfig{}).points.empty());
  CHECK(trace_path(make_swap2(), grid, SearchConfig{}, 0).points.empty());
}

TEST_CASE("a one-point path is a single search") {
  const TaskSpec s = make_swap2();
  SearchConfig cfg;
  cfg.seed = 4;
  const std::vector<double> grid = {0.3};
  const FrontierCurve path = trace_path(s, grid, cfg, 2);
  const SearchResult direct = minimize(make_objective(s, 0.3), random_protocol(s, cfg, 2), cfg);
  REQUIRE(path.points.size() == 1);
  CHECK(path.points[0].error == direct.best_error);
  CHECK(path.points[0].params == direct.best_params);
}

TEST_CASE("warm start and self-consistency along a path") {
  const TaskSpec s = make_swap2();
  SearchConfig cfg;
  cfg.seed = 1;
  const auto grid = descending_grid(0.4, 0.1, 16);
  const FrontierCurve path = trace_path(s, grid, cfg, 0);
  REQUIRE(path.points.size() == grid.size());
  // Points are stored ascending in T; computation order is descending.
  for (std::size_t i = 0; i + 1 < path.points.size(); ++i) {
    CHECK(path.points[i].duration < path.points[i + 1].duration);
    const TracePoint& prev = path.points[i + 1];
    const TracePoint& cur = path.points[i];
    const double warm = evaluate(
        s,
        std::span<const double>(prev.params.data(), static_cast<std::size_t>(prev.params.size())),
        cur.duration);
    CHECK(std::abs(cur.start_error - warm) <= 1e-12);
  }
  for (const auto& p : path.points) {
    CHECK(std::abs(reevaluate(s, p) - p.error) <= 1e-12);
    CHECK(p.error >= 0.0);
  }
  CHECK_THROWS_AS(trace_path(s, std::vector<double>{0.1, 0.2}, cfg, 0), ArgumentError);
}

TEST_CASE("paths are reproducible") {
  const TaskSpec t = make_transfer3();
  SearchConfig cfg;
  cfg.seed = 12;
  const auto grid = descending_grid(0.3, 0.2, 4);
  const FrontierCurve a = trace_path(t, grid, cfg, 1);
  const FrontierCurve b = trace_path(t, grid, cfg, 1);
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    CHECK(a.points[i].error == b.points[i].error);
    CHECK(a.points[i].params == b.points[i].params);
  }
}

TEST_CASE("multi-path frontier") {
  const FrontierCurve one = curve({{0.1, 0.5}, {0.2, 0.1}}, 0);
  const FrontierCurve single = multi_path_frontier(std::vector<FrontierCurve>{one});
  CHECK(single.kind == CurveKind::MultiPathMin);
  REQUIRE(single.points.size() == 2);
  CHECK(single.points[0].error == 0.5);

  const FrontierCurve better = curve({{0.1, 0.2}, {0.2, 0.05}}, 1);
  const FrontierCurve dom = multi_path_frontier(std::vector<FrontierCurve>{one, better});
  CHECK(dom.points[0].path_id == 1);
  CHECK(dom.points[1].path_id == 1);

  const FrontierCurve mixed = curve({{0.1, 0.9}, {0.15, 0.0}, {0.2, 0.01}}, 2);
  const std::vector<FrontierCurve> all = {one, better, mixed};
  const FrontierCurve f = multi_path_frontier(all);
  REQUIRE(f.points.size() == 2);  // 0.15 is not shared
  for (const auto& p : f.points) {
    for (const auto& c : all) {
      for (const auto& q : c.points) {
        if (q.duration == p.duration) CHECK(p.error <= q.error);
      }
    }
  }
  CHECK(f.points[1].path_id == 2);

  // Ties go to the earlier path.
  const FrontierCurve tie = curve({{0.1, 0.5}, {0.2, 0.1}}, 7);
  CHECK(multi_path_frontier(std::vector<FrontierCurve>{one, tie}).points[0].path_id == 0);

  const FrontierCurve disjoint = curve({{0.3, 0.1}}, 3);
  CHECK_THROWS_AS(multi_path_frontier(std::vector<FrontierCurve>{one, disjoint}),
                  GridMismatchError);
}

TEST_CASE("critical time") {
  CHECK(detect_critical_time(curve({{0.1, 1e-6}, {0.2, 1e-7}}, 0), 1e-4) == 0.1);
  CHECK(!detect_critical_time(curve({{0.1, 1.0}, {0.2, 0.5}}, 0), 1e-4).has_value());
  FrontierCurve step;
  for (int i = 1; i <= 10; ++i) {
    const double t = 0.05 * i;
    step.points.push_back(point(t, t >= 0.3 - 1e-12 ? 0.0 : 0.5, 0));
  }
  const auto tcr = detect_critical_time(step, 1e-4);
  REQUIRE(tcr.has_value());
  CHECK(*tcr == doctest::Approx(0.3));
  // A dip below the knee does not count.
  CHECK(detect_critical_time(curve({{0.1, 0.0}, {0.2, 0.5}, {0.3, 0.0}}, 0), 1e-4) == 0.3);
}

TEST_CASE("sweep and path streams are disjoint") {
  const TaskSpec s = make_swap2();
  SearchConfig cfg;
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(sweep_stream(i) >= (std::uint64_t{1} << 32));
  }
  CHECK(random_protocol(s, cfg, sweep_stream(0)) != random_protocol(s, cfg, 0));
}

}

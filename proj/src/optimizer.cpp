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

#include "pathtrace/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "pathtrace/errors.hpp"

namespace pathtrace {
namespace {

constexpr double kSufficientDecrease = 1e-4;
constexpr double kCurvature = 0.9;
constexpr int kMaxBracketSteps = 40;
constexpr int kMaxZoomSteps = 40;

struct LinePoint {
  double alpha = 0.0;
  double f = 0.0;
  double slope = 0.0;  // directional derivative along the search direction
  RealVector x;
  RealVector g;
  [[nodiscard]] bool finite() const {
    return std::isfinite(f) && std::isfinite(slope);
  }
};

class LineSearch {
 public:
  LineSearch(const Objective& objective, const RealVector& x,
             const RealVector& direction, double f0, double slope0,
             int& evaluations)
      : objective_(objective),
        x_(x),
        direction_(direction),
        f0_(f0),
        slope0_(slope0),
        evaluations_(evaluations) {}

  std::optional<LinePoint> run(double alpha_init) {
    LinePoint prev{0.0, f0_, slope0_, x_, {}};
    double alpha = alpha_init;
    for (int i = 0; i < kMaxBracketSteps; ++i) {
      LinePoint cur = probe(alpha);
      if (!cur.finite() || violates_decrease(cur) || (i > 0 && cur.f >= prev.f)) {
        return zoom(prev, cur);
      }
      if (std::abs(cur.slope) <= -kCurvature * slope0_) return cur;
      if (cur.slope >= 0.0) return zoom(cur, prev);
      prev = std::move(cur);
      alpha *= 2.0;
    }
    return std::nullopt;
  }

 private:
  LinePoint probe(double alpha) {
    LinePoint p;
    p.alpha = alpha;
    p.x = x_ + alpha * direction_;
    p.g = RealVector::Zero(x_.size());
    ++evaluations_;
    p.f = objective_(p.x, p.g);
    p.slope = p.g.allFinite() ? p.g.dot(direction_)
                              : std::numeric_limits<double>::quiet_NaN();
    return p;
  }

  [[nodiscard]] bool violates_decrease(const LinePoint& p) const {
    return p.f > f0_ + kSufficientDecrease * p.alpha * slope0_;
  }

  // Minimiser of the cubic through (lo, hi), clamped to the inner 80% of the
  // bracket; bisection when hi carries no usable information.
  static double interpolate(const LinePoint& lo, const LinePoint& hi) {
    const double a = lo.alpha;
    const double b = hi.alpha;
    const double width = b - a;
    double t = 0.5 * (a + b);
    if (hi.finite()) {
      const double d1 = lo.slope + hi.slope - 3.0 * (lo.f - hi.f) / (a - b);
      const double disc = d1 * d1 - lo.slope * hi.slope;
      if (disc >= 0.0) {
        const double d2 = std::copysign(std::sqrt(disc), b - a);
        const double denom = hi.slope - lo.slope + 2.0 * d2;
        if (denom != 0.0) {
          const double cand = b - (b - a) * (hi.slope + d2 - d1) / denom;
          if (std::isfinite(cand)) t = cand;
        }
      }
    }
    const double lo_b = std::min(a + 0.1 * width, b - 0.1 * width);
    const double hi_b = std::max(a + 0.1 * width, b - 0.1 * width);
    return std::clamp(t, lo_b, hi_b);
  }

  std::optional<LinePoint> zoom(LinePoint lo, LinePoint hi) {
    for (int i = 0; i < kMaxZoomSteps; ++i) {
      if (std::abs(hi.alpha - lo.alpha) <=
          1e-16 * std::max(1.0, std::abs(lo.alpha))) {
        break;
      }
      LinePoint cur = probe(interpolate(lo, hi));
      if (!cur.finite() || violates_decrease(cur) || cur.f >= lo.f) {
        hi = std::move(cur);
        continue;
      }
      if (std::abs(cur.slope) <= -kCurvature * slope0_) return cur;
      if (cur.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
      lo = std::move(cur);
    }
    // Bracket collapsed without the curvature condition: a strict decrease
    // is still worth taking.
    if (lo.alpha > 0.0 && lo.f < f0_) return lo;
    return std::nullopt;
  }

  const Objective& objective_;
  const RealVector& x_;
  const RealVector& direction_;
  double f0_;
  double slope0_;
  int& evaluations_;
};

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

void validate(const SearchConfig& config) {
  if (config.max_iterations < 1) throw ConfigError("max_iter must be >= 1");
  if (!(config.gradient_tolerance > 0.0)) throw ConfigError("gtol must be > 0");
  if (!(config.error_tolerance > 0.0)) throw ConfigError("etol must be > 0");
  if (!(config.init_amplitude >= 0.0) || !std::isfinite(config.init_amplitude)) {
    throw ConfigError("init_amp must be finite and >= 0");
  }
}

nlohmann::json search_to_json(const SearchConfig& config) {
  return {{"max_iter", config.max_iterations},
          {"gtol", config.gradient_tolerance},
          {"etol", config.error_tolerance},
          {"init_amp", config.init_amplitude},
          {"seed", config.seed}};
}

SearchConfig search_from_json(const nlohmann::json& j) {
  SearchConfig c;
  try {
    c.max_iterations = j.value("max_iter", c.max_iterations);
    c.gradient_tolerance = j.value("gtol", c.gradient_tolerance);
    c.error_tolerance = j.value("etol", c.error_tolerance);
    c.init_amplitude = j.value("init_amp", c.init_amplitude);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("search JSON: ") + e.what());
  }
  validate(c);
  return c;
}

std::string to_string(ConvergedReason reason) {
  switch (reason) {
    case ConvergedReason::GradientTol:
      return "GradientTol";
    case ConvergedReason::ErrorTol:
      return "ErrorTol";
    case ConvergedReason::MaxIter:
      return "MaxIter";
    case ConvergedReason::LineSearchFail:
      return "LineSearchFail";
  }
  return "Unknown";
}

ConvergedReason converged_reason_from_string(const std::string& name) {
  for (auto r : {ConvergedReason::GradientTol, ConvergedReason::ErrorTol,
                 ConvergedReason::MaxIter, ConvergedReason::LineSearchFail}) {
    if (to_string(r) == name) return r;
  }
  throw ConfigError("unknown converged_reason '" + name + "'");
}

SearchResult minimize(const Objective& objective, const RealVector& x0,
                      const SearchConfig& config) {
  validate(config);
  const Eigen::Index dim = x0.size();
  SearchResult result;
  RealVector x = x0;
  RealVector g = RealVector::Zero(dim);
  double f = objective(x, g);
  result.evaluations = 1;
  result.initial_error = f;
  if (!std::isfinite(f) || !g.allFinite()) {
    throw SearchAborted("objective is not finite at the starting point", x, f);
  }

  RealMatrix h = RealMatrix::Identity(dim, dim);
  bool fresh_hessian = true;
  while (true) {
    if (f <= config.error_tolerance) {
      result.converged_reason = ConvergedReason::ErrorTol;
      break;
    }
    if (dim == 0 || g.lpNorm<Eigen::Infinity>() <= config.gradient_tolerance) {
      result.converged_reason = ConvergedReason::GradientTol;
      break;
    }
    if (result.iterations >= config.max_iterations) {
      result.converged_reason = ConvergedReason::MaxIter;
      break;
    }

    std::optional<LinePoint> step;
    for (int attempt = 0; attempt < 2 && !step; ++attempt) {
      if (attempt == 1) {
        if (fresh_hessian) break;  // nothing left to reset
        h.setIdentity();
        fresh_hessian = true;
      }
      RealVector direction = -h * g;
      double slope = g.dot(direction);
      if (!(slope < 0.0)) {
        h.setIdentity();
        fresh_hessian = true;
        direction = -g;
        slope = g.dot(direction);
      }
      const double alpha0 =
          fresh_hessian ? std::min(1.0, 1.0 / g.lpNorm<Eigen::Infinity>())
                        : 1.0;
      LineSearch search(objective, x, direction, f, slope, result.evaluations);
      step = search.run(alpha0);
    }
    if (!step) {
      result.converged_reason = ConvergedReason::LineSearchFail;
      break;
    }

    const RealVector s = step->x - x;
    const RealVector y = step->g - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (fresh_hessian) {
        h = RealMatrix::Identity(dim, dim) * (sy / y.squaredNorm());
      }
      const double rho = 1.0 / sy;
      const RealVector hy = h * y;
      // (I - rho s y^T) H (I - rho y s^T) + rho s s^T, expanded.
      h += (rho * rho * y.dot(hy) + rho) * (s * s.transpose()) -
           rho * (hy * s.transpose() + s * hy.transpose());
      fresh_hessian = false;
    }
    x = std::move(step->x);
    g = std::move(step->g);
    f = step->f;
    ++result.iterations;
  }

  result.best_params = std::move(x);
  result.best_error = f;
  return result;
}

double counter_uniform(std::uint64_t seed, std::uint64_t stream,
                       std::uint64_t counter) {
  const std::uint64_t key = splitmix64(splitmix64(seed) ^ splitmix64(~stream));
  const std::uint64_t bits = splitmix64(key + 0x9e3779b97f4a7c15ULL * counter);
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

RealVector random_protocol(const TaskSpec& task, const SearchConfig& config,
                           std::uint64_t path_index) {
  const auto n = static_cast<Eigen::Index>(task.n_params());
  RealVector out(n);
  const double c0 = config.init_amplitude;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u =
        counter_uniform(config.seed, path_index, static_cast<std::uint64_t>(i));
    out(i) = c0 * (2.0 * u - 1.0) + 0.0;  // no negative zeros
  }
  return out;
}

}  // namespace pathtrace

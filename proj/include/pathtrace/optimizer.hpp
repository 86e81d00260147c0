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

#include <cstddef>
#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "pathtrace/errors.hpp"
#include "pathtrace/tasks.hpp"

namespace pathtrace {

struct SearchConfig {
  int max_iterations = 2000;
  double gradient_tolerance = 1e-10;  // stop when max |grad| <= this
  double error_tolerance = 1e-12;     // stop when error <= this
  double init_amplitude = 1.0;        // random starts uniform in [-c0, c0]
  std::uint64_t seed = 0;

  bool operator==(const SearchConfig&) const = default;
};

// Throws ConfigError on non-positive tolerances or iteration cap.
void validate(const SearchConfig& config);

// {"max_iter", "gtol", "etol", "init_amp", "seed"}; missing keys keep defaults.
nlohmann::json search_to_json(const SearchConfig& config);
SearchConfig search_from_json(const nlohmann::json& j);

enum class ConvergedReason { GradientTol, ErrorTol, MaxIter, LineSearchFail };

std::string to_string(ConvergedReason reason);
ConvergedReason converged_reason_from_string(const std::string& name);

struct SearchResult {
  RealVector best_params;
  double best_error = 0.0;
  double initial_error = 0.0;
  int iterations = 0;
  int evaluations = 0;
  ConvergedReason converged_reason = ConvergedReason::MaxIter;
};

// Thrown when the objective is non-finite at the starting point, or the
// search cannot continue from any finite point. Carries the last finite
// iterate.
class SearchAborted : public NumericalError {
 public:
  SearchAborted(const std::string& what, RealVector last_params,
                double last_error)
      : NumericalError(what),
        last_params_(std::move(last_params)),
        last_error_(last_error) {}
  [[nodiscard]] const RealVector& last_params() const { return last_params_; }
  [[nodiscard]] double last_error() const { return last_error_; }

 private:
  RealVector last_params_;
  double last_error_;
};

/// BFGS on the inverse Hessian with a strong-Wolfe line search
/// (c1 = 1e-4, c2 = 0.9).
///
/// When the line search fails the inverse Hessian is reset to a scaled
/// identity and the step retried once; a second consecutive failure ends
/// the search with LineSearchFail. Accepted iterates never increase the
/// objective. Deterministic in (objective, x0, config).
SearchResult minimize(const Objective& objective, const RealVector& x0,
                      const SearchConfig& config);

/// M*N values uniform in [-c0, c0], drawn from a counter-based stream keyed
/// by (config.seed, path_index). Independent of call order and thread.
RealVector random_protocol(const TaskSpec& task, const SearchConfig& config,
                           std::uint64_t path_index);

// Uniform double in [0, 1) at position `counter` of stream (seed, stream).
double counter_uniform(std::uint64_t seed, std::uint64_t stream,
                       std::uint64_t counter);

}  // namespace pathtrace

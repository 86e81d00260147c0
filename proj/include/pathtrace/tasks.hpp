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
#include <functional>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "pathtrace/dynamics.hpp"
#include "pathtrace/protocol.hpp"

namespace pathtrace {

enum class TaskKind { Swap2, Transfer3, Tmss3 };

std::string to_string(TaskKind kind);
// Accepts "swap2", "transfer3", "tmss3"; throws ConfigError otherwise.
TaskKind task_kind_from_string(const std::string& name);

/// A control problem: which network is driven, from which initial state, and
/// which error functional scores the final state.
struct TaskSpec {
  TaskKind kind = TaskKind::Swap2;
  NetworkSpec network;
  MomentMatrix initial_state;
  double r = 0.0;  // target squeezing, Tmss3 only
  std::size_t n_segments = 5;

  [[nodiscard]] std::size_t n_controls() const { return network.n_controls(); }
  [[nodiscard]] std::size_t n_params() const {
    return n_controls() * n_segments;
  }
};

// Oscillator A thermal with n = 1, B in the ground state.
TaskSpec make_swap2(std::size_t n_segments = 5);
// A thermal with n = 1; B and mediator C in the ground state.
TaskSpec make_transfer3(std::size_t n_segments = 10);
// All three modes in the ground state; target a two-mode squeezed A-B pair.
TaskSpec make_tmss3(double r = 2.0, std::size_t n_segments = 10);

// Default initial state for a task kind on a given network.
MomentMatrix default_initial_state(TaskKind kind, const NetworkSpec& network);

// Throws ConfigError if kind, network and parameters disagree.
void validate(const TaskSpec& task);

// {"task": "swap2"|"transfer3"|"tmss3", "N": int, "r": real?, "network": {...}}
nlohmann::json task_to_json(const TaskSpec& task);
TaskSpec task_from_json(const nlohmann::json& j);

// The error functionals reject states whose occupations carry an imaginary
// part above 1e-10 relative to `magnitude`, the largest moment encountered
// while computing `c` (defaults to c's own largest entry, floor 1).
// TaskMismatchError on the wrong mode count.

// <a^dag a> of mode A.
double swap_error(const MomentMatrix& c, double magnitude = 0.0);
// <a^dag a> + <c^dag c>, A = mode 0 and mediator C = mode 2.
double transfer_error(const MomentMatrix& c, double magnitude = 0.0);
// (<a^dag a> - cosh2r/2)^2 + (<b^dag b> - cosh2r/2)^2 + |<a b^dag> - sinh2r/2|^2
double tmss_error(const MomentMatrix& c, double r, double magnitude = 0.0);
// Entanglement of the r-squeezed pair in bits.
double tmss_entanglement(double r);

double task_error(const TaskSpec& task, const MomentMatrix& c,
                  double magnitude = 0.0);

// Matrix G with d(error) = Re sum_ij G_ij dC_ij at the state c.
ComplexMatrix task_error_sensitivity(const TaskSpec& task,
                                     const MomentMatrix& c);

// Error of the protocol with parameters `params` (row-major, see
// as_parameter_vector) and duration T in units of tau.
double evaluate(const TaskSpec& task, std::span<const double> params,
                double duration);

struct ValueAndGradient {
  double value = 0.0;
  RealVector gradient;
};

/// Error and its exact gradient with respect to every c_jk.
///
/// One backward sweep: the adjoint of the final-state sensitivity is pulled
/// back through each segment map C -> U C U^T, and the derivative of U in
/// the direction of each control comes from the Frechet derivative of the
/// matrix exponential. Cost is one extra block exponential per segment.
ValueAndGradient evaluate_with_gradient(const TaskSpec& task,
                                        std::span<const double> params,
                                        double duration);

RealVector gradient(const TaskSpec& task, std::span<const double> params,
                    double duration);

// Central differences with step 1e-6 * max(1, |c_jk|).
RealVector finite_difference_gradient(const TaskSpec& task,
                                      std::span<const double> params,
                                      double duration);

// f(x, grad) -> value; writes the gradient into grad.
using Objective = std::function<double(const RealVector&, RealVector&)>;

Objective make_objective(const TaskSpec& task, double duration);

}  // namespace pathtrace

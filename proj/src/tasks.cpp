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

#include "pathtrace/tasks.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>

#include "pathtrace/errors.hpp"

namespace pathtrace {
namespace {

void require_modes(const MomentMatrix& c, std::size_t expected,
                   const char* what) {
  if (c.n_modes() != expected) {
    throw TaskMismatchError(std::string(what) + ": expected " +
                            std::to_string(expected) + " modes, got " +
                            std::to_string(c.n_modes()));
  }
}

// <a_k^dag a_k> is real for any physical state; a sizeable imaginary part
// means the propagation has gone wrong and must not be silently discarded.
// Round-off scales with the largest moment seen along the way, which can far
// exceed the final state's entries after strong intermediate squeezing.
double real_occupation(const MomentMatrix& c, std::size_t mode,
                       double magnitude) {
  const std::complex<double> n = c(cre(mode), ann(mode));
  const double scale =
      std::max({1.0, magnitude, c.entries().cwiseAbs().maxCoeff()});
  if (std::abs(n.imag()) > 1e-10 * scale) {
    throw NumericalError("occupation of mode " + std::to_string(mode) +
                         " has imaginary part " + format_double(n.imag()));
  }
  return n.real();
}

}  // namespace

std::string to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::Swap2:
      return "swap2";
    case TaskKind::Transfer3:
      return "transfer3";
    case TaskKind::Tmss3:
      return "tmss3";
  }
  return "unknown";
}

TaskKind task_kind_from_string(const std::string& name) {
  if (name == "swap2") return TaskKind::Swap2;
  if (name == "transfer3") return TaskKind::Transfer3;
  if (name == "tmss3") return TaskKind::Tmss3;
  throw ConfigError("unknown task '" + name +
                    "' (expected swap2, transfer3 or tmss3)");
}

MomentMatrix default_initial_state(TaskKind kind, const NetworkSpec& network) {
  std::vector<double> occupations(network.n_modes(), 0.0);
  if (kind != TaskKind::Tmss3) occupations[0] = 1.0;
  return thermal_state(network, occupations);
}

TaskSpec make_swap2(std::size_t n_segments) {
  TaskSpec t;
  t.kind = TaskKind::Swap2;
  t.network = two_mode_network();
  t.initial_state = default_initial_state(t.kind, t.network);
  t.n_segments = n_segments;
  return t;
}

TaskSpec make_transfer3(std::size_t n_segments) {
  TaskSpec t;
  t.kind = TaskKind::Transfer3;
  t.network = mediated_network();
  t.initial_state = default_initial_state(t.kind, t.network);
  t.n_segments = n_segments;
  return t;
}

TaskSpec make_tmss3(double r, std::size_t n_segments) {
  if (!(r >= 0.0) || !std::isfinite(r)) {
    throw ConfigError("tmss3 needs a finite r >= 0");
  }
  TaskSpec t;
  t.kind = TaskKind::Tmss3;
  t.network = mediated_network();
  t.initial_state = default_initial_state(t.kind, t.network);
  t.r = r;
  t.n_segments = n_segments;
  return t;
}

void validate(const TaskSpec& task) {
  const std::size_t expected = task.kind == TaskKind::Swap2 ? 2 : 3;
  if (task.network.n_modes() != expected) {
    throw ConfigError("task " + to_string(task.kind) + " needs " +
                      std::to_string(expected) + " modes, network has " +
                      std::to_string(task.network.n_modes()));
  }
  if (task.initial_state.n_modes() != expected) {
    throw ConfigError("initial state has the wrong number of modes");
  }
  if (task.n_segments < 1) throw ConfigError("N must be >= 1");
  if (task.network.n_controls() < 1) {
    throw ConfigError("network has no controlled edges");
  }
  if (task.kind == TaskKind::Tmss3 && !(task.r > 0.0)) {
    throw ConfigError("tmss3 needs r > 0");
  }
}

nlohmann::json task_to_json(const TaskSpec& task) {
  nlohmann::json j = {{"task", to_string(task.kind)},
                      {"N", task.n_segments},
                      {"network", task.network}};
  if (task.kind == TaskKind::Tmss3) j["r"] = task.r;
  return j;
}

TaskSpec task_from_json(const nlohmann::json& j) {
  TaskSpec t;
  try {
    t.kind = task_kind_from_string(j.at("task").get<std::string>());
    const bool three = t.kind != TaskKind::Swap2;
    t.n_segments = j.value("N", std::size_t{three ? 10u : 5u});
    t.network = j.contains("network") ? j.at("network").get<NetworkSpec>()
                : three               ? mediated_network()
                                      : two_mode_network();
    if (t.kind == TaskKind::Tmss3) t.r = j.value("r", 2.0);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("task JSON: ") + e.what());
  }
  t.initial_state = default_initial_state(t.kind, t.network);
  validate(t);
  return t;
}

// Occupation errors are clamped at zero: near a perfect transfer, round-off
// can leave <a^dag a> a few ulps below zero.
double swap_error(const MomentMatrix& c, double magnitude) {
  require_modes(c, 2, "swap_error");
  return std::max(0.0, real_occupation(c, 0, magnitude));
}

double transfer_error(const MomentMatrix& c, double magnitude) {
  require_modes(c, 3, "transfer_error");
  return std::max(0.0, real_occupation(c, 0, magnitude) +
                           real_occupation(c, 2, magnitude));
}

double tmss_error(const MomentMatrix& c, double r, double magnitude) {
  require_modes(c, 3, "tmss_error");
  const double diag = std::cosh(2.0 * r) / 2.0;
  const double cross = std::sinh(2.0 * r) / 2.0;
  const double da = real_occupation(c, 0, magnitude) - diag;
  const double db = real_occupation(c, 1, magnitude) - diag;
  return da * da + db * db + std::norm(c(ann(0), cre(1)) - cross);
}

double tmss_entanglement(double r) {
  if (!(r >= 0.0)) throw ArgumentError("tmss_entanglement: r must be >= 0");
  if (r == 0.0) return 0.0;
  const double lambda = std::sinh(r) * std::sinh(r);
  return (1.0 + lambda) * std::log2(1.0 + lambda) - lambda * std::log2(lambda);
}

double task_error(const TaskSpec& task, const MomentMatrix& c,
                  double magnitude) {
  switch (task.kind) {
    case TaskKind::Swap2:
      return swap_error(c, magnitude);
    case TaskKind::Transfer3:
      return transfer_error(c, magnitude);
    case TaskKind::Tmss3:
      return tmss_error(c, task.r, magnitude);
  }
  throw ConfigError("unknown task kind");
}

ComplexMatrix task_error_sensitivity(const TaskSpec& task,
                                     const MomentMatrix& c) {
  const Eigen::Index d = c.entries().rows();
  ComplexMatrix g = ComplexMatrix::Zero(d, d);
  switch (task.kind) {
    case TaskKind::Swap2:
      g(cre(0), ann(0)) = 1.0;
      break;
    case TaskKind::Transfer3:
      g(cre(0), ann(0)) = 1.0;
      g(cre(2), ann(2)) = 1.0;
      break;
    case TaskKind::Tmss3: {
      const double diag = std::cosh(2.0 * task.r) / 2.0;
      const double cross = std::sinh(2.0 * task.r) / 2.0;
      g(cre(0), ann(0)) = 2.0 * (c(cre(0), ann(0)).real() - diag);
      g(cre(1), ann(1)) = 2.0 * (c(cre(1), ann(1)).real() - diag);
      g(ann(0), cre(1)) = 2.0 * std::conj(c(ann(0), cre(1)) - cross);
      break;
    }
  }
  return g;
}

double evaluate(const TaskSpec& task, std::span<const double> params,
                double duration) {
  const Protocol p = from_parameter_vector(duration, task.n_controls(),
                                           task.n_segments, params);
  const Propagation prop =
      propagate_protocol(task.initial_state, p, task.network, true);
  double magnitude = 0.0;
  for (const auto& state : prop.trajectory) {
    magnitude = std::max(magnitude, state.entries().cwiseAbs().maxCoeff());
  }
  return task_error(task, prop.final_state, magnitude);
}

ValueAndGradient evaluate_with_gradient(const TaskSpec& task,
                                        std::span<const double> params,
                                        double duration) {
  const Protocol p = from_parameter_vector(duration, task.n_controls(),
                                           task.n_segments, params);
  const std::size_t m = task.n_controls();
  const std::size_t n = task.n_segments;
  const double dt = p.segment_duration() * kTau;

  std::vector<ComplexMatrix> generators(n);
  std::vector<ComplexMatrix> maps(n);
  std::vector<MomentMatrix> states;
  states.reserve(n + 1);
  states.push_back(task.initial_state);
  std::vector<double> controls(m);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < m; ++j) {
      controls[j] = p.values()(static_cast<Eigen::Index>(j),
                               static_cast<Eigen::Index>(k));
    }
    generators[k] = build_drift(task.network, controls).entries() * dt;
    maps[k] = matrix_exponential(generators[k]);
    states.emplace_back(maps[k] * states.back().entries() *
                        maps[k].transpose());
  }

  double magnitude = 0.0;
  for (const auto& state : states) {
    magnitude = std::max(magnitude, state.entries().cwiseAbs().maxCoeff());
  }
  ValueAndGradient out;
  out.value = task_error(task, states.back(), magnitude);
  out.gradient = RealVector::Zero(static_cast<Eigen::Index>(m * n));

  std::vector<ComplexMatrix> directions;
  for (std::size_t j = 0; j < m; ++j) {
    directions.push_back(drift_derivative(task.network, static_cast<int>(j + 1)) *
                         dt);
  }

  // adjoint holds B with d(error) = Re tr(B dC_{k+1}).
  ComplexMatrix adjoint =
      task_error_sensitivity(task, states.back()).transpose();
  for (std::size_t kk = n; kk-- > 0;) {
    const ComplexMatrix& u = maps[kk];
    const ComplexMatrix& c = states[kk].entries();
    // dC_{k+1} = dU C U^T + U C dU^T  =>  d(error) = Re tr(dU K).
    const ComplexMatrix cub = c * u.transpose() * adjoint;
    const ComplexMatrix k_mat =
        cub + c.transpose() * u.transpose() * adjoint.transpose();
    // tr(L_X(E) K) = tr(E L_X(K)).
    const ComplexMatrix pulled = exp_frechet(generators[kk], k_mat).frechet;
    for (std::size_t j = 0; j < m; ++j) {
      const double dj =
          (directions[j].array() * pulled.transpose().array()).sum().real();
      out.gradient(static_cast<Eigen::Index>(j * n + kk)) = dj;
    }
    adjoint = u.transpose() * adjoint * u;
  }
  return out;
}

RealVector gradient(const TaskSpec& task, std::span<const double> params,
                    double duration) {
  return evaluate_with_gradient(task, params, duration).gradient;
}

RealVector finite_difference_gradient(const TaskSpec& task,
                                      std::span<const double> params,
                                      double duration) {
  std::vector<double> x(params.begin(), params.end());
  RealVector g(static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double x0 = x[i];
    const double h = 1e-6 * std::max(1.0, std::abs(x0));
    x[i] = x0 + h;
    const double fp = evaluate(task, x, duration);
    x[i] = x0 - h;
    const double fm = evaluate(task, x, duration);
    x[i] = x0;
    g(static_cast<Eigen::Index>(i)) = (fp - fm) / (2.0 * h);
  }
  return g;
}

Objective make_objective(const TaskSpec& task, double duration) {
  return [task, duration](const RealVector& x, RealVector& grad) {
    const std::span<const double> params(x.data(),
                                         static_cast<std::size_t>(x.size()));
    try {
      auto vg = evaluate_with_gradient(task, params, duration);
      grad = std::move(vg.gradient);
      return vg.value;
    } catch (const NumericalError&) {
      // Overflowing trial points are reported as non-finite so the line
      // search backs off instead of aborting.
      grad.setConstant(std::numeric_limits<double>::quiet_NaN());
      return std::numeric_limits<double>::quiet_NaN();
    }
  };
}

}  // namespace pathtrace

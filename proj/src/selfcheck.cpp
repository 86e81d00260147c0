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

#include "pathtrace/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include "pathtrace/optimizer.hpp"
#include "pathtrace/protocol.hpp"
#include "pathtrace/tasks.hpp"

namespace pathtrace {
namespace {

constexpr int kRandomTrials = 50;

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

// Random draw in [-amp, amp] from the check stream.
double draw(const CheckOptions& opt, std::uint64_t stream,
            std::uint64_t& counter, double amp) {
  return amp * (2.0 * counter_uniform(opt.seed, stream, counter++) - 1.0);
}

MomentMatrix propagate_with(const CheckOptions& opt, const NetworkSpec& net,
                            const MomentMatrix& c0, const Protocol& p) {
  const double dt = p.segment_duration() * kTau;
  MomentMatrix c = c0;
  std::vector<double> controls(p.n_controls());
  for (Eigen::Index k = 0; k < p.values().cols(); ++k) {
    for (std::size_t j = 0; j < controls.size(); ++j) {
      controls[j] = p.values()(static_cast<Eigen::Index>(j), k);
    }
    const ComplexMatrix u =
        matrix_exponential(opt.drift(net, controls).entries() * dt);
    c = MomentMatrix(u * c.entries() * u.transpose());
  }
  return c;
}

CheckResult check_invariants(const CheckOptions& opt) {
  double worst_comm = 0.0;
  double worst_conj = 0.0;
  double worst_nu = 0.0;
  std::uint64_t counter = 0;
  for (int trial = 0; trial < kRandomTrials; ++trial) {
    const bool three = trial % 2 == 1;
    const TaskSpec task = three ? make_transfer3() : make_swap2();
    std::vector<double> occ(task.network.n_modes());
    for (auto& n : occ) n = std::abs(draw(opt, 1, counter, 2.0));
    const MomentMatrix c0 = thermal_state(task.network, occ);
    RealMatrix values(static_cast<Eigen::Index>(task.n_controls()),
                      static_cast<Eigen::Index>(task.n_segments));
    for (Eigen::Index i = 0; i < values.size(); ++i) {
      values(i) = draw(opt, 1, counter, 0.4);
    }
    const double duration = std::abs(draw(opt, 1, counter, 1.0));
    const MomentMatrix c =
        propagate_with(opt, task.network, c0, Protocol(duration, values));
    worst_comm = std::max(worst_comm, commutator_defect(c));
    worst_conj = std::max(worst_conj, conjugation_defect(c));
    try {
      const auto before = symplectic_eigenvalues(c0);
      const auto after = symplectic_eigenvalues(c);
      for (std::size_t k = 0; k < before.size(); ++k) {
        worst_nu = std::max(worst_nu, std::abs(before[k] - after[k]));
      }
    } catch (const std::exception&) {
      worst_nu = std::numeric_limits<double>::infinity();
    }
  }
  const bool ok = worst_comm <= 1e-10 && worst_conj <= 1e-10 && worst_nu <= 1e-9;
  return {"commutator-preservation", ok,
          "max commutator defect " + sci(worst_comm) + ", conjugation " +
              sci(worst_conj) + ", symplectic drift " + sci(worst_nu)};
}

CheckResult check_expm_inverse(const CheckOptions& opt) {
  std::uint64_t counter = 0;
  double worst = 0.0;
  for (int trial = 0; trial < kRandomTrials; ++trial) {
    ComplexMatrix x(6, 6);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      x(i) = {draw(opt, 2, counter, 1.0), draw(opt, 2, counter, 1.0)};
    }
    const ComplexMatrix prod =
        matrix_exponential(x) * matrix_exponential(-x) -
        ComplexMatrix::Identity(6, 6);
    worst = std::max(worst, prod.cwiseAbs().maxCoeff());
  }
  return {"expm-inverse", worst <= 1e-10, "max |e^X e^-X - I| " + sci(worst)};
}

CheckResult check_gradient(const CheckOptions& opt) {
  double worst = 0.0;
  std::uint64_t counter = 0;
  for (const TaskSpec& task : {make_swap2(), make_transfer3(), make_tmss3()}) {
    for (int trial = 0; trial < 3; ++trial) {
      std::vector<double> x(task.n_params());
      for (auto& v : x) v = draw(opt, 3, counter, 2.0);
      const double duration = 0.05 + std::abs(draw(opt, 3, counter, 0.3));
      const RealVector g = gradient(task, x, duration);
      const RealVector fd = finite_difference_gradient(task, x, duration);
      for (Eigen::Index i = 0; i < g.size(); ++i) {
        const double scale = std::max(std::abs(fd(i)), 1e-3);
        worst = std::max(worst, std::abs(g(i) - fd(i)) / scale);
      }
    }
  }
  return {"gradient-vs-fd", worst <= 1e-5,
          "max relative deviation " + sci(worst)};
}

CheckResult check_rwa(const CheckOptions& opt) {
  // Constant resonant coupling g/2 is the rotating-wave equivalent of a
  // coupling g modulated at the difference frequency; it swaps at T = pi/g.
  const NetworkSpec net = two_mode_network();
  const std::vector<double> occ = {1.0, 0.0};
  const MomentMatrix c0 = thermal_state(net, occ);
  double residuals[3] = {};
  const double couplings[3] = {1e-2, 1e-3, 1e-4};
  try {
    for (int k = 0; k < 3; ++k) {
      const double g = couplings[k];
      const double duration = (std::numbers::pi / g) / kTau;
      // One segment per unit time keeps each exponential small.
      const auto segments =
          static_cast<Eigen::Index>(std::ceil(duration * kTau));
      const Protocol p(duration, RealMatrix::Constant(1, segments, g / 2.0));
      residuals[k] = swap_error(propagate_with(opt, net, c0, p));
    }
  } catch (const std::exception& e) {
    return {"rwa-swap", false, e.what()};
  }
  const bool ok = residuals[0] > residuals[1] && residuals[1] > residuals[2] &&
                  residuals[1] <= 1e-5;
  return {"rwa-swap", ok,
          "residual <a^dag a> at g = 1e-2, 1e-3, 1e-4: " + sci(residuals[0]) +
              ", " + sci(residuals[1]) + ", " + sci(residuals[2])};
}

CheckResult check_round_trips(const CheckOptions& opt) {
  std::uint64_t counter = 0;
  RealMatrix values(2, 7);
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    values(i) = draw(opt, 4, counter, 1e3);
  }
  const Protocol p(0.123456789, values);
  const Protocol back =
      protocol_from_json(nlohmann::json::parse(protocol_to_json(p, {}).dump()));
  const NetworkSpec net = mediated_network(1.25, 0.75);
  const NetworkSpec net_back =
      nlohmann::json::parse(nlohmann::json(net).dump()).get<NetworkSpec>();
  const RealVector vec = as_parameter_vector(p);
  const Protocol from_vec = from_parameter_vector(
      p.duration(), 2, 7,
      std::span<const double>(vec.data(), static_cast<std::size_t>(vec.size())));
  const bool ok = back == p && net_back == net && from_vec == p &&
                  rescale(rescale(p, 0.5), p.duration()) == p;
  return {"round-trips", ok, ok ? "protocol, network, parameter vector exact"
                                : "round trip altered values"};
}

}  // namespace

std::vector<CheckResult> run_self_checks(const CheckOptions& options) {
  std::vector<CheckResult> out;
  for (auto* check : {check_invariants, check_expm_inverse, check_gradient,
                      check_rwa, check_round_trips}) {
    try {
      out.push_back(check(options));
    } catch (const std::exception& e) {
      out.push_back({"unexpected-exception", false, e.what()});
    }
  }
  return out;
}

}  // namespace pathtrace

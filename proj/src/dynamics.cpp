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

#include "pathtrace/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <set>
#include <utility>

#include "pathtrace/errors.hpp"
#include "pathtrace/protocol.hpp"

namespace pathtrace {

using namespace std::complex_literals;

NetworkSpec::NetworkSpec(std::vector<Mode> modes, std::vector<Edge> edges)
    : modes_(std::move(modes)), edges_(std::move(edges)) {
  if (modes_.empty()) throw ConfigError("network has no modes");
  for (const auto& mode : modes_) {
    if (!(mode.frequency > 0.0) || !std::isfinite(mode.frequency)) {
      throw ConfigError("mode '" + mode.label + "': frequency must be > 0");
    }
  }
  std::set<std::pair<std::size_t, std::size_t>> seen;
  int max_control = 0;
  std::set<int> used;
  for (const auto& e : edges_) {
    if (e.mode_i >= modes_.size() || e.mode_j >= modes_.size()) {
      throw ConfigError("edge endpoint out of range");
    }
    if (e.mode_i == e.mode_j) {
      throw ConfigError("edge endpoints must be distinct");
    }
    if (!std::isfinite(e.base_rate)) {
      throw ConfigError("edge base rate must be finite");
    }
    const auto key = std::minmax(e.mode_i, e.mode_j);
    if (!seen.insert(key).second) {
      throw ConfigError("duplicate edge " + std::to_string(key.first) + "-" +
                        std::to_string(key.second));
    }
    if (e.control) {
      if (*e.control < 1) throw ConfigError("control index must be >= 1");
      max_control = std::max(max_control, *e.control);
      used.insert(*e.control);
    }
  }
  if (used.size() != static_cast<std::size_t>(max_control)) {
    throw ConfigError("control indices must cover 1.." +
                      std::to_string(max_control) + " without gaps");
  }
  n_controls_ = static_cast<std::size_t>(max_control);
}

NetworkSpec two_mode_network(double omega, double base_rate) {
  return NetworkSpec({{"A", omega}, {"B", omega}}, {{0, 1, base_rate, 1}});
}

NetworkSpec mediated_network(double omega, double base_rate) {
  return NetworkSpec({{"A", omega}, {"B", omega}, {"C", omega}},
                     {{0, 2, base_rate, 1}, {1, 2, base_rate, 2}});
}

void to_json(nlohmann::json& j, const NetworkSpec& net) {
  nlohmann::json modes = nlohmann::json::array();
  for (const auto& m : net.modes()) {
    modes.push_back({{"label", m.label}, {"omega", m.frequency}});
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : net.edges()) {
    nlohmann::json ej = {{"i", e.mode_i}, {"j", e.mode_j}, {"g", e.base_rate}};
    if (e.control) {
      ej["control"] = *e.control;
    } else {
      ej["control"] = "fixed";
    }
    edges.push_back(std::move(ej));
  }
  j = {{"modes", std::move(modes)}, {"edges", std::move(edges)}};
}

void from_json(const nlohmann::json& j, NetworkSpec& net) {
  std::vector<Mode> modes;
  std::vector<Edge> edges;
  try {
    for (const auto& mj : j.at("modes")) {
      modes.push_back(
          {mj.value("label", std::string{}), mj.at("omega").get<double>()});
    }
    for (const auto& ej : j.at("edges")) {
      Edge e;
      e.mode_i = ej.at("i").get<std::size_t>();
      e.mode_j = ej.at("j").get<std::size_t>();
      e.base_rate = ej.at("g").get<double>();
      const auto& ctl = ej.at("control");
      if (ctl.is_string()) {
        if (ctl.get<std::string>() != "fixed") {
          throw ConfigError("edge control must be an integer or \"fixed\"");
        }
      } else {
        e.control = ctl.get<int>();
      }
      edges.push_back(e);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("network JSON: ") + e.what());
  }
  net = NetworkSpec(std::move(modes), std::move(edges));
}

MomentMatrix::MomentMatrix(ComplexMatrix entries)
    : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols() || entries_.rows() % 2 != 0 ||
      entries_.rows() == 0) {
    throw ArgumentError("moment matrix must be 2m x 2m with m >= 1");
  }
}

namespace {

void add_edge(ComplexMatrix& a, std::size_t i, std::size_t j, double kappa) {
  // da_i/dt gets -i kappa (a_j + a_j^dag), da_i^dag/dt gets the conjugate.
  for (auto [p, q] : {std::pair{i, j}, std::pair{j, i}}) {
    a(ann(p), ann(q)) += -1i * kappa;
    a(ann(p), cre(q)) += -1i * kappa;
    a(cre(p), ann(q)) += 1i * kappa;
    a(cre(p), cre(q)) += 1i * kappa;
  }
}

}  // namespace

DriftMatrix build_drift(const NetworkSpec& network,
                        std::span<const double> control_values) {
  if (control_values.size() != network.n_controls()) {
    throw ConfigError("build_drift: got " +
                      std::to_string(control_values.size()) +
                      " control values for a network with " +
                      std::to_string(network.n_controls()) + " controls");
  }
  const Eigen::Index d = network.dim();
  ComplexMatrix a = ComplexMatrix::Zero(d, d);
  for (std::size_t k = 0; k < network.n_modes(); ++k) {
    const double w = network.modes()[k].frequency;
    a(ann(k), ann(k)) = -1i * w;
    a(cre(k), cre(k)) = 1i * w;
  }
  for (const auto& e : network.edges()) {
    const double lambda =
        e.control ? control_values[static_cast<std::size_t>(*e.control - 1)]
                  : 1.0;
    const double kappa = e.base_rate * lambda;
    if (kappa != 0.0) add_edge(a, e.mode_i, e.mode_j, kappa);
  }
  return DriftMatrix(std::move(a));
}

ComplexMatrix drift_derivative(const NetworkSpec& network, int control) {
  const Eigen::Index d = network.dim();
  ComplexMatrix a = ComplexMatrix::Zero(d, d);
  for (const auto& e : network.edges()) {
    if (e.control && *e.control == control) {
      add_edge(a, e.mode_i, e.mode_j, e.base_rate);
    }
  }
  return a;
}

ComplexMatrix commutator_matrix(std::size_t n_modes) {
  const auto d = static_cast<Eigen::Index>(2 * n_modes);
  ComplexMatrix omega = ComplexMatrix::Zero(d, d);
  for (std::size_t k = 0; k < n_modes; ++k) {
    omega(ann(k), cre(k)) = 1.0;
    omega(cre(k), ann(k)) = -1.0;
  }
  return omega;
}

std::vector<Eigen::Index> conjugation_permutation(std::size_t n_modes) {
  std::vector<Eigen::Index> perm(2 * n_modes);
  for (std::size_t k = 0; k < n_modes; ++k) {
    perm[2 * k] = cre(k);
    perm[2 * k + 1] = ann(k);
  }
  return perm;
}

double commutator_defect(const MomentMatrix& c) {
  const ComplexMatrix& e = c.entries();
  return (e - e.transpose() - commutator_matrix(c.n_modes()))
      .cwiseAbs()
      .maxCoeff();
}

double conjugation_defect(const MomentMatrix& c) {
  const auto perm = conjugation_permutation(c.n_modes());
  const ComplexMatrix& e = c.entries();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < e.rows(); ++i) {
    for (Eigen::Index j = 0; j < e.cols(); ++j) {
      const auto pi = perm[static_cast<std::size_t>(i)];
      const auto pj = perm[static_cast<std::size_t>(j)];
      worst = std::max(worst, std::abs(std::conj(e(i, j)) - e(pj, pi)));
    }
  }
  return worst;
}

MomentMatrix propagate_segment(const MomentMatrix& c, const DriftMatrix& a,
                               double dt) {
  if (!(dt >= 0.0)) throw ArgumentError("propagate_segment: dt must be >= 0");
  if (a.entries().rows() != c.entries().rows()) {
    throw ConfigError("propagate_segment: drift and moment sizes differ");
  }
  if (dt == 0.0) return c;
  const ComplexMatrix u = matrix_exponential(a.entries() * dt);
  return MomentMatrix(u * c.entries() * u.transpose());
}

Propagation propagate_protocol(const MomentMatrix& initial,
                               const Protocol& protocol,
                               const NetworkSpec& network,
                               bool record_trajectory) {
  if (protocol.n_controls() != network.n_controls()) {
    throw ConfigError("protocol has " + std::to_string(protocol.n_controls()) +
                      " controls, network expects " +
                      std::to_string(network.n_controls()));
  }
  if (initial.n_modes() != network.n_modes()) {
    throw ConfigError("initial state and network mode counts differ");
  }
  Propagation out;
  out.final_state = initial;
  if (record_trajectory) out.trajectory.push_back(initial);
  const double dt = protocol.segment_duration() * kTau;
  std::vector<double> controls(protocol.n_controls());
  for (Eigen::Index k = 0; k < protocol.values().cols(); ++k) {
    for (std::size_t j = 0; j < controls.size(); ++j) {
      controls[j] = protocol.values()(static_cast<Eigen::Index>(j), k);
    }
    out.final_state =
        propagate_segment(out.final_state, build_drift(network, controls), dt);
    if (record_trajectory) out.trajectory.push_back(out.final_state);
  }
  return out;
}

RealMatrix quadrature_covariance(const MomentMatrix& c) {
  const std::size_t m = c.n_modes();
  const Eigen::Index d = c.entries().rows();
  // r = T v with x = (a + a^dag)/sqrt2, p = -i (a - a^dag)/sqrt2.
  ComplexMatrix t = ComplexMatrix::Zero(d, d);
  const double s = 1.0 / std::sqrt(2.0);
  for (std::size_t k = 0; k < m; ++k) {
    t(ann(k), ann(k)) = s;
    t(ann(k), cre(k)) = s;
    t(cre(k), ann(k)) = -1i * s;
    t(cre(k), cre(k)) = 1i * s;
  }
  const ComplexMatrix rr = t * c.entries() * t.transpose();
  return (0.5 * (rr + rr.transpose())).real();
}

std::vector<double> symplectic_eigenvalues(const MomentMatrix& c) {
  const RealMatrix sigma = quadrature_covariance(c);
  const Eigen::Index d = sigma.rows();
  RealMatrix j = RealMatrix::Zero(d, d);
  for (Eigen::Index k = 0; k < d; k += 2) {
    j(k, k + 1) = 1.0;
    j(k + 1, k) = -1.0;
  }
  // Eigenvalues of J sigma are +-i nu_k.
  Eigen::EigenSolver<RealMatrix> solver(j * sigma, false);
  std::vector<double> mags;
  mags.reserve(static_cast<std::size_t>(d));
  for (Eigen::Index k = 0; k < d; ++k) {
    mags.push_back(std::abs(solver.eigenvalues()(k)));
  }
  std::sort(mags.begin(), mags.end());
  std::vector<double> nu;
  for (std::size_t k = 0; k < mags.size(); k += 2) {
    nu.push_back(0.5 * (mags[k] + mags[k + 1]));
  }
  for (double v : nu) {
    if (v < 0.5 - 1e-6 || !std::isfinite(v)) {
      throw PhysicalityError("symplectic eigenvalue " + format_double(v) +
                             " below the vacuum bound 1/2");
    }
  }
  return nu;
}

MomentMatrix thermal_state(std::size_t n_modes,
                           std::span<const double> occupations) {
  if (occupations.size() != n_modes) {
    throw ArgumentError("thermal_state: one occupation per mode required");
  }
  const auto d = static_cast<Eigen::Index>(2 * n_modes);
  ComplexMatrix c = ComplexMatrix::Zero(d, d);
  for (std::size_t k = 0; k < n_modes; ++k) {
    const double n = occupations[k];
    if (!(n >= 0.0) || !std::isfinite(n)) {
      throw ArgumentError("thermal_state: occupations must be finite and >= 0");
    }
    c(ann(k), cre(k)) = n + 1.0;
    c(cre(k), ann(k)) = n;
  }
  return MomentMatrix(std::move(c));
}

MomentMatrix thermal_state(const NetworkSpec& network,
                           std::span<const double> occupations) {
  return thermal_state(network.n_modes(), occupations);
}

MomentMatrix reduced_state(const MomentMatrix& c,
                           std::span<const std::size_t> modes) {
  const auto d = static_cast<Eigen::Index>(2 * modes.size());
  ComplexMatrix out(d, d);
  for (std::size_t p = 0; p < modes.size(); ++p) {
    for (std::size_t q = 0; q < modes.size(); ++q) {
      if (modes[p] >= c.n_modes() || modes[q] >= c.n_modes()) {
        throw ArgumentError("reduced_state: mode index out of range");
      }
      out.block<2, 2>(ann(p), ann(q)) =
          c.entries().block<2, 2>(ann(modes[p]), ann(modes[q]));
    }
  }
  return MomentMatrix(std::move(out));
}

double entropy_bits(double nu) {
  if (nu <= 0.5) return 0.0;
  const double hi = nu + 0.5;
  const double lo = nu - 0.5;
  return hi * std::log2(hi) - lo * std::log2(lo);
}

std::vector<double> mode_entropy(const MomentMatrix& c) {
  std::vector<double> out;
  for (double nu : symplectic_eigenvalues(c)) out.push_back(entropy_bits(nu));
  return out;
}

}  // namespace pathtrace

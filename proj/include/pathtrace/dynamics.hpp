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
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pathtrace/expm.hpp"

namespace pathtrace {

// Units: hbar = 1 and the reference frequency omega = 1, so one period of the
// slow oscillator is tau = 2 pi. Protocol durations are quoted in units of tau.
inline constexpr double kTau = 2.0 * std::numbers::pi;

struct Mode {
  std::string label;
  double frequency = 1.0;
  bool operator==(const Mode&) const = default;
};

// Coupling g x_i x_j between two modes. A controlled edge contributes
// g * c_j where c_j is the current value of control j (1-based); a fixed edge
// always contributes g.
struct Edge {
  std::size_t mode_i = 0;
  std::size_t mode_j = 0;
  double base_rate = 1.0;
  std::optional<int> control;
  bool operator==(const Edge&) const = default;
};

class NetworkSpec {
 public:
  NetworkSpec() = default;
  // Validates on construction; throws ConfigError.
  NetworkSpec(std::vector<Mode> modes, std::vector<Edge> edges);

  [[nodiscard]] const std::vector<Mode>& modes() const { return modes_; }
  [[nodiscard]] const std::vector<Edge>& edges() const { return edges_; }
  [[nodiscard]] std::size_t n_modes() const { return modes_.size(); }
  // Number of independent control functions M.
  [[nodiscard]] std::size_t n_controls() const { return n_controls_; }
  // Dimension of the moment vector, 2m.
  [[nodiscard]] Eigen::Index dim() const {
    return static_cast<Eigen::Index>(2 * modes_.size());
  }

  bool operator==(const NetworkSpec&) const = default;

 private:
  std::vector<Mode> modes_;
  std::vector<Edge> edges_;
  std::size_t n_controls_ = 0;
};

// Two identical modes A, B coupled by one controlled edge.
NetworkSpec two_mode_network(double omega = 1.0, double base_rate = 1.0);

// Chain A - C - B: modes (A, B, C) = (0, 1, 2); edge A-C is control 1 and
// edge B-C is control 2.
NetworkSpec mediated_network(double omega = 1.0, double base_rate = 1.0);

void to_json(nlohmann::json& j, const NetworkSpec& net);
void from_json(const nlohmann::json& j, NetworkSpec& net);

// Position of a_k and a_k^dagger in v = (a_1, a_1^dag, a_2, a_2^dag, ...).
constexpr Eigen::Index ann(std::size_t mode) {
  return static_cast<Eigen::Index>(2 * mode);
}
constexpr Eigen::Index cre(std::size_t mode) {
  return static_cast<Eigen::Index>(2 * mode + 1);
}

/// Second moments C_ij = <v_i v_j> of a zero-mean Gaussian state of m modes.
///
/// The matrix is stored as given; the physical constraints (commutator
/// structure, conjugation symmetry, uncertainty bound) are checked by the
/// free functions below rather than enforced on construction, since
/// propagated states carry round-off.
class MomentMatrix {
 public:
  MomentMatrix() = default;
  explicit MomentMatrix(ComplexMatrix entries);

  [[nodiscard]] std::size_t n_modes() const {
    return static_cast<std::size_t>(entries_.rows() / 2);
  }
  [[nodiscard]] const ComplexMatrix& entries() const { return entries_; }
  [[nodiscard]] std::complex<double> operator()(Eigen::Index i,
                                                Eigen::Index j) const {
    return entries_(i, j);
  }

  // <a_k^dag a_k>, real part.
  [[nodiscard]] double occupation(std::size_t mode) const {
    return entries_(cre(mode), ann(mode)).real();
  }

 private:
  ComplexMatrix entries_;
};

// Generator A of dC/dt = A C + C A^T.
class DriftMatrix {
 public:
  explicit DriftMatrix(ComplexMatrix entries) : entries_(std::move(entries)) {}
  [[nodiscard]] const ComplexMatrix& entries() const { return entries_; }

 private:
  ComplexMatrix entries_;
};

/// Drift matrix for the network at the given control values (length M).
///
/// Derived from the Heisenberg equations for
/// H = sum_k w_k a_k^dag a_k + sum_edges kappa x_i x_j with x = a + a^dag:
///   da_i/dt     = -i w_i a_i     - i kappa (a_j + a_j^dag)
///   da_i^dag/dt = +i w_i a_i^dag + i kappa (a_j + a_j^dag)
DriftMatrix build_drift(const NetworkSpec& network,
                        std::span<const double> control_values);

// dA/dc_j for control j (1-based). A is affine in the controls, so this does
// not depend on the operating point.
ComplexMatrix drift_derivative(const NetworkSpec& network, int control);

// Antisymmetric commutator matrix [v_i, v_j] for m modes.
ComplexMatrix commutator_matrix(std::size_t n_modes);

// Index permutation swapping a_k <-> a_k^dag.
std::vector<Eigen::Index> conjugation_permutation(std::size_t n_modes);

// max |(C - C^T) - Omega|.
double commutator_defect(const MomentMatrix& c);
// max |conj(C_ij) - C_{P(j) P(i)}|.
double conjugation_defect(const MomentMatrix& c);

MomentMatrix propagate_segment(const MomentMatrix& c, const DriftMatrix& a,
                               double dt);

class Protocol;

struct Propagation {
  MomentMatrix final_state;
  // States at each segment boundary, t = 0 first; empty unless requested.
  std::vector<MomentMatrix> trajectory;
};

Propagation propagate_protocol(const MomentMatrix& initial,
                               const Protocol& protocol,
                               const NetworkSpec& network,
                               bool record_trajectory = false);

/// Real quadrature covariance sigma = Re<{r_i, r_j}>/2 with
/// x = (a + a^dag)/sqrt2, p = -i(a - a^dag)/sqrt2. Vacuum is I/2.
RealMatrix quadrature_covariance(const MomentMatrix& c);

/// Symplectic eigenvalues, ascending. Throws PhysicalityError if any is below
/// 1/2 - 1e-6.
std::vector<double> symplectic_eigenvalues(const MomentMatrix& c);

// Block-diagonal thermal state with <a_k^dag a_k> = occupations[k].
MomentMatrix thermal_state(std::size_t n_modes,
                           std::span<const double> occupations);
MomentMatrix thermal_state(const NetworkSpec& network,
                           std::span<const double> occupations);

// Moments restricted to a subset of modes (in the order given).
MomentMatrix reduced_state(const MomentMatrix& c,
                           std::span<const std::size_t> modes);

// Von Neumann entropy in bits of a mode with symplectic eigenvalue nu.
double entropy_bits(double nu);

// Entropy of each symplectic mode, in bits, same order as
// symplectic_eigenvalues().
std::vector<double> mode_entropy(const MomentMatrix& c);

}  // namespace pathtrace

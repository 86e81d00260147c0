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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pathtrace/dynamics.hpp"

namespace pathtrace {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

using DriftBuilder =
    std::function<DriftMatrix(const NetworkSpec&, std::span<const double>)>;

struct CheckOptions {
  std::uint64_t seed = 0;
  // Replaceable so tests can confirm a corrupted drift matrix is caught.
  DriftBuilder drift = build_drift;
};

// Fast invariant suite behind `pathtrace check`: commutator and symplectic
// invariants under random propagation, expm inverse identity, gradient vs
// finite differences, the weak-coupling swap, and JSON round trips.
std::vector<CheckResult> run_self_checks(const CheckOptions& options = {});

}  // namespace pathtrace

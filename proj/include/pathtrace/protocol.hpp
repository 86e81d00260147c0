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
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "pathtrace/expm.hpp"

namespace pathtrace {

/// Piecewise-constant control protocol: M control functions, each constant on
/// N equal segments of a total duration T (units of tau).
///
/// Entry (j, k) of `values()` is the effective control c_jk = lambda_jk * g
/// in units of omega, applied on segment k.
class Protocol {
 public:
  Protocol() = default;
  // Throws ArgumentError on negative/non-finite duration or non-finite values.
  Protocol(double duration, RealMatrix values);

  static Protocol zeros(double duration, std::size_t n_controls,
                        std::size_t n_segments);

  [[nodiscard]] double duration() const { return duration_; }
  [[nodiscard]] std::size_t n_controls() const {
    return static_cast<std::size_t>(values_.rows());
  }
  [[nodiscard]] std::size_t n_segments() const {
    return static_cast<std::size_t>(values_.cols());
  }
  [[nodiscard]] const RealMatrix& values() const { return values_; }
  [[nodiscard]] double segment_duration() const {
    return duration_ / static_cast<double>(n_segments());
  }

  bool operator==(const Protocol& other) const {
    return duration_ == other.duration_ && values_ == other.values_;
  }

 private:
  double duration_ = 0.0;
  RealMatrix values_;
};

// Same values grid stretched or squeezed onto a new duration.
Protocol rescale(const Protocol& p, double new_duration);

// Row-major by control: (c_11, ..., c_1N, c_21, ..., c_MN).
RealVector as_parameter_vector(const Protocol& p);
Protocol from_parameter_vector(double duration, std::size_t n_controls,
                               std::size_t n_segments,
                               std::span<const double> params);

// N / (2T), in units of 1/tau. Throws ArgumentError when T = 0.
double implied_bandwidth(const Protocol& p);

// Concatenation in time of two protocols with equal segment length and
// control count. Used to compose sequential operations.
Protocol concatenate(const Protocol& first, const Protocol& second);

struct ProtocolMeta {
  std::uint64_t seed = 0;
  std::string task;
};

// {"T": "...", "N": int, "M": int, "values": [[...]], "meta": {...}}.
// Floats are written as 17-significant-digit strings; both strings and
// numbers are accepted on input.
nlohmann::json protocol_to_json(const Protocol& p, const ProtocolMeta& meta);
Protocol protocol_from_json(const nlohmann::json& j,
                            ProtocolMeta* meta = nullptr);

// 17 significant digits, enough to round-trip any double.
std::string format_double(double x);
double parse_double(const nlohmann::json& j, const std::string& field);

}  // namespace pathtrace

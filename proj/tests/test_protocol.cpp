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

#include <cmath>
#include <limits>

#include "pathtrace/errors.hpp"
#include "pathtrace/optimizer.hpp"
#include "pathtrace/protocol.hpp"

using namespace pathtrace;

namespace {

RealMatrix random_grid(Eigen::Index m, Eigen::Index n, std::uint64_t stream) {
  RealMatrix v(m, n);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v(i) = 1e3 * (2 * counter_uniform(11, stream, static_cast<std::uint64_t>(i)) - 1);
  }
  return v;
}

}  // namespace

TEST_SUITE("protocol") {

TEST_CASE("construction checks") {
  CHECK_THROWS_AS(Protocol(-0.1, RealMatrix::Zero(1, 5)), ArgumentError);
  RealMatrix v = RealMatrix::Zero(1, 2);
  v(0, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(Protocol(0.1, v), ArgumentError);
  const Protocol p = Protocol::zeros(0.5, 2, 10);
  CHECK(p.n_controls() == 2);
  CHECK(p.n_segments() == 10);
  CHECK(p.segment_duration() == doctest::Approx(0.05));
}

TEST_CASE("rescale keeps the values grid") {
  const Protocol p(0.4, random_grid(2, 7, 1));
  CHECK(rescale(p, p.duration()) == p);
  const Protocol half = rescale(p, 0.2);
  CHECK(half.values() == p.values());
  CHECK(half.segment_duration() == doctest::Approx(p.segment_duration() / 2));
  CHECK(rescale(rescale(p, 0.123), 0.4) == p);
  CHECK_THROWS_AS(rescale(p, -1.0), ArgumentError);
}

TEST_CASE("parameter vector ordering") {
  RealMatrix v(1, 5);
  v << 1, 2, 3, 4, 5;
  const RealVector x = as_parameter_vector(Protocol(0.1, v));
  REQUIRE(x.size() == 5);
  for (int k = 0; k < 5; ++k) CHECK(x(k) == k + 1);

  RealMatrix w(2, 10);
  for (Eigen::Index k = 0; k < 10; ++k) {
    w(0, k) = 1.0;
    w(1, k) = 2.0;
  }
  const RealVector y = as_parameter_vector(Protocol(0.1, w));
  REQUIRE(y.size() == 20);
  for (int k = 0; k < 10; ++k) CHECK(y(k) == 1.0);
  for (int k = 10; k < 20; ++k) CHECK(y(k) == 2.0);

  const Protocol p(0.3, random_grid(2, 10, 2));
  const RealVector z = as_parameter_vector(p);
  const std::span<const double> span(z.data(), static_cast<std::size_t>(z.size()));
  CHECK(from_parameter_vector(0.3, 2, 10, span) == p);
  CHECK_THROWS_AS(from_parameter_vector(0.3, 2, 9, span), ArgumentError);
}

TEST_CASE("implied bandwidth") {
  CHECK(implied_bandwidth(Protocol::zeros(0.05, 1, 5)) == doctest::Approx(50.0));
  CHECK(implied_bandwidth(Protocol::zeros(1.0, 1, 10)) == doctest::Approx(5.0));
  CHECK(implied_bandwidth(Protocol::zeros(0.5, 1, 1)) == doctest::Approx(1.0));
  CHECK_THROWS_AS(implied_bandwidth(Protocol::zeros(0.0, 1, 5)), ArgumentError);
}

TEST_CASE("concatenate") {
  const Protocol a(0.5, random_grid(2, 2, 3));
  const Protocol b(0.75, random_grid(2, 3, 4));
  const Protocol ab = concatenate(a, b);
  CHECK(ab.duration() == doctest::Approx(1.25));
  CHECK(ab.n_segments() == 5);
  CHECK(ab.values().leftCols(2) == a.values());
  CHECK_THROWS_AS(concatenate(a, Protocol(0.75, random_grid(2, 2, 5))), ArgumentError);
}

TEST_CASE("json round trip is exact") {
  const Protocol p(0.1 + 1e-17 * 3, random_grid(2, 7, 6));
  ProtocolMeta meta{42, "transfer3"};
  const std::string text = protocol_to_json(p, meta).dump();
  ProtocolMeta back_meta;
  const Protocol back = protocol_from_json(nlohmann::json::parse(text), &back_meta);
  CHECK(back == p);
  CHECK(back_meta.seed == 42);
  CHECK(back_meta.task == "transfer3");

  // Plain numbers are accepted too.
  const auto j = nlohmann::json::parse(
      R"({"T": 0.25, "N": 2, "M": 1, "values": [[1.5, -2]]})");
  const Protocol q = protocol_from_json(j);
  CHECK(q.duration() == 0.25);
  CHECK(q.values()(0, 1) == -2.0);

  CHECK_THROWS_AS(protocol_from_json(nlohmann::json::parse(
                      R"({"T": 0.25, "N": 3, "M": 1, "values": [[1.5, -2]]})")),
                  ConfigError);
}

TEST_CASE("format_double round trips") {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
    CHECK(std::stod(format_double(x)) == x);
  }
}

}

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
#include <complex>

#include "pathtrace/errors.hpp"
#include "pathtrace/expm.hpp"
#include "pathtrace/optimizer.hpp"

using namespace pathtrace;

namespace {

// Taylor series in long double after scaling the norm below 1/2, then
// repeated squaring.
ComplexMatrix taylor_exp(const ComplexMatrix& x) {
  using Cld = std::complex<long double>;
  using MatLd = Eigen::Matrix<Cld, Eigen::Dynamic, Eigen::Dynamic>;
  const double norm = x.cwiseAbs().colwise().sum().maxCoeff();
  int s = 0;
  while (std::ldexp(norm, -s) > 0.5) ++s;
  const MatLd y = x.cast<Cld>() * static_cast<long double>(std::ldexp(1.0, -s));
  MatLd sum = MatLd::Identity(x.rows(), x.cols());
  MatLd term = sum;
  for (int k = 1; k < 60; ++k) {
    term = term * y / static_cast<long double>(k);
    sum += term;
  }
  for (int i = 0; i < s; ++i) sum = sum * sum;
  ComplexMatrix out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    out(i) = {static_cast<double>(sum(i).real()),
              static_cast<double>(sum(i).imag())};
  }
  return out;
}

ComplexMatrix random_matrix(int n, double target_norm, std::uint64_t stream) {
  ComplexMatrix x(n, n);
  std::uint64_t c = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    x(i) = {2 * counter_uniform(7, stream, c) - 1,
            2 * counter_uniform(7, stream, c + 1) - 1};
    c += 2;
  }
  return x * (target_norm / x.norm());
}

}  // namespace

TEST_SUITE("expm") {

TEST_CASE("zero matrix gives identity") {
  const ComplexMatrix e = matrix_exponential(ComplexMatrix::Zero(4, 4));
  CHECK((e - ComplexMatrix::Identity(4, 4)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("diagonal") {
  ComplexMatrix x = ComplexMatrix::Zero(2, 2);
  x(0, 0) = 1.0;
  x(1, 1) = -1.0;
  const ComplexMatrix e = matrix_exponential(x);
  CHECK(std::abs(e(0, 0) - std::exp(1.0)) < 1e-14);
  CHECK(std::abs(e(1, 1) - std::exp(-1.0)) < 1e-15);
  CHECK(std::abs(e(0, 1)) == 0.0);
}

TEST_CASE("random 6x6 against Taylor reference") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const ComplexMatrix x = random_matrix(6, 5.0, s);
    const ComplexMatrix ref = taylor_exp(x);
    const double rel = (matrix_exponential(x) - ref).norm() / ref.norm();
    CHECK(rel < 1e-10);
  }
}

TEST_CASE("inverse identity") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const ComplexMatrix x = random_matrix(8, 3.0, 100 + s);
    const ComplexMatrix p = matrix_exponential(x) * matrix_exponential(-x);
    CHECK((p - ComplexMatrix::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("non-finite input is rejected") {
  ComplexMatrix x = ComplexMatrix::Zero(2, 2);
  x(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(matrix_exponential(x), NumericalError);
  CHECK_THROWS_AS(matrix_exponential(ComplexMatrix::Zero(2, 3)), NumericalError);
}

TEST_CASE("Frechet derivative matches central difference") {
  const ComplexMatrix x = random_matrix(6, 2.0, 300);
  const ComplexMatrix e = random_matrix(6, 1.0, 301);
  const ExpFrechet ef = exp_frechet(x, e);
  CHECK((ef.exp - matrix_exponential(x)).cwiseAbs().maxCoeff() < 1e-12);
  const double h = 1e-6;
  const ComplexMatrix fd =
      (matrix_exponential(x + h * e) - matrix_exponential(x - h * e)) / (2 * h);
  CHECK((ef.frechet - fd).norm() / fd.norm() < 1e-8);
  const ExpFrechet zero = exp_frechet(x, ComplexMatrix::Zero(6, 6));
  CHECK(zero.frechet.cwiseAbs().maxCoeff() == 0.0);
}

}

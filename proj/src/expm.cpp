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

#include "pathtrace/expm.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "pathtrace/errors.hpp"

namespace pathtrace {
namespace {

// Higham (2005) coefficients for the [13/13] approximant.
constexpr std::array<double, 14> kPade13 = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0,  129060195264000.0,   10559470521600.0,
    670442572800.0,      33522128640.0,       1323241920.0,
    40840800.0,          960960.0,            16380.0,
    182.0,               1.0};

constexpr double kTheta13 = 5.371920351148152;

double one_norm(const ComplexMatrix& x) {
  return x.cwiseAbs().colwise().sum().maxCoeff();
}

}  // namespace

ComplexMatrix matrix_exponential(const ComplexMatrix& x) {
  if (x.rows() != x.cols()) {
    throw NumericalError("matrix_exponential: matrix is not square");
  }
  if (!x.allFinite()) {
    throw NumericalError("matrix_exponential: non-finite entries");
  }
  const Eigen::Index n = x.rows();
  if (n == 0) return x;
  if (x.isZero(0.0)) return ComplexMatrix::Identity(n, n);

  const double norm = one_norm(x);
  int squarings = 0;
  if (norm > kTheta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / kTheta13)));
  }
  const ComplexMatrix a = x / std::ldexp(1.0, squarings);
  const ComplexMatrix ident = ComplexMatrix::Identity(n, n);
  const ComplexMatrix a2 = a * a;
  const ComplexMatrix a4 = a2 * a2;
  const ComplexMatrix a6 = a4 * a2;
  const auto& b = kPade13;

  const ComplexMatrix u_inner =
      a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 +
      b[3] * a2 + b[1] * ident;
  const ComplexMatrix u = a * u_inner;
  const ComplexMatrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) +
                          b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident;

  ComplexMatrix r = (v - u).partialPivLu().solve(v + u);
  for (int i = 0; i < squarings; ++i) {
    r = r * r;
  }
  return r;
}

ExpFrechet exp_frechet(const ComplexMatrix& x, const ComplexMatrix& direction) {
  const Eigen::Index n = x.rows();
  if (direction.rows() != n || direction.cols() != n) {
    throw NumericalError("exp_frechet: direction shape mismatch");
  }
  // L(X, E) is linear in E; normalising E keeps the block norm (and hence
  // the number of squarings) governed by X alone.
  const double dnorm = one_norm(direction);
  if (dnorm == 0.0) {
    return {matrix_exponential(x), ComplexMatrix::Zero(n, n)};
  }
  const double scale = std::max(one_norm(x), 1.0) / dnorm;
  ComplexMatrix block = ComplexMatrix::Zero(2 * n, 2 * n);
  block.topLeftCorner(n, n) = x;
  block.bottomRightCorner(n, n) = x;
  block.topRightCorner(n, n) = direction * scale;
  const ComplexMatrix e = matrix_exponential(block);
  return {e.topLeftCorner(n, n), e.topRightCorner(n, n) / scale};
}

}  // namespace pathtrace

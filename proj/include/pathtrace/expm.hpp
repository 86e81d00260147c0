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

#include <Eigen/Dense>

namespace pathtrace {

using ComplexMatrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

/// Matrix exponential by scaling and squaring around a degree-13 Pade
/// approximant. Accurate to roughly machine precision for the small,
/// well-conditioned generators used here.
///
/// Throws NumericalError if `x` has non-finite entries or is not square.
ComplexMatrix matrix_exponential(const ComplexMatrix& x);

/// e^X together with its Frechet derivative L(X, E), obtained from the
/// exponential of the block matrix [[X, E], [0, X]].
struct ExpFrechet {
  ComplexMatrix exp;
  ComplexMatrix frechet;
};

ExpFrechet exp_frechet(const ComplexMatrix& x, const ComplexMatrix& direction);

}  // namespace pathtrace

// Copyright 2026 The rsense Authors. All Rights Reserved.
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

// Signal/error decomposition of a factor against a rank-one truth u* u*^T:
//
//   U = u* r^T + E,   r = U^T u*,   E = (I - u* u*^T) U.

#pragma once

#include "rsense/model.hpp"

namespace rsense {

struct Decomposition {
  Vector signal;  // r, length r'
  Matrix error;   // E, d x r'

  Matrix reconstruct(const Vector& u_star) const { return u_star * signal.transpose() + error; }
};

namespace detail {

inline Vector rank_one_direction(const GroundTruth& truth) {
  if (truth.r_star != 1)
    throw UnsupportedError("signal/error decomposition requires a rank-one ground truth");
  Vector u = truth.factor.col(0);
  if (std::abs(u.norm() - 1.0) > 1e-10)
    throw DomainError("signal/error decomposition requires ||u*|| = 1");
  return u;
}

}  // namespace detail

inline Decomposition decompose(const Matrix& u, const GroundTruth& truth) {
  const Vector dir = detail::rank_one_direction(truth);
  require_shape(u.rows() == dir.size(), "factor must have d rows");
  Decomposition out;
  out.signal = u.transpose() * dir;
  out.error = u - dir * out.signal.transpose();
  return out;
}

inline double error_frobenius(const Matrix& u, const GroundTruth& truth) {
  require_shape(u.rows() == truth.d, "factor must have d rows");
  return (u * u.transpose() - truth.x_star).norm();
}

inline double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
}

// Exact expansion ||U U^T - u* u*^T||_F^2
//   = (1 - ||r||^2)^2 + 2 ||E r||^2 + ||E E^T||_F^2.
inline double decomposition_identity(const Decomposition& dec) {
  const double r2 = dec.signal.squaredNorm();
  return (1.0 - r2) * (1.0 - r2) + 2.0 * (dec.error * dec.signal).squaredNorm() +
         (dec.error * dec.error.transpose()).squaredNorm();
}

struct DecompositionBound {
  double lhs = 0.0;  // ||U U^T - X*||_F^2
  double rhs = 0.0;  // (1 - ||r||^2)^2 + 2 ||E||^2 ||r||^2 + ||E||_F^4
  bool holds = false;
};

inline DecompositionBound check_decomposition_bound(const Matrix& u, const GroundTruth& truth) {
  const Decomposition dec = decompose(u, truth);
  const double err = error_frobenius(u, truth);
  const double r2 = dec.signal.squaredNorm();
  const double e_op = spectral_norm(dec.error);
  const double e_f2 = dec.error.squaredNorm();
  DecompositionBound rep;
  rep.lhs = err * err;
  rep.rhs = (1.0 - r2) * (1.0 - r2) + 2.0 * e_op * e_op * r2 + e_f2 * e_f2;
  rep.holds = rep.lhs <= rep.rhs + 1e-8;
  return rep;
}

}  // namespace rsense

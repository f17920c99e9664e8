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

// Factorized recovery losses
//
//   f_l1(U) = 1/(2m) ||y - A(U U^T)||_1
//   f_l2(U) = 1/(2m) ||y - A(U U^T)||_2^2
//
// together with their (sub)gradients and the rank-restricted norm
// ||M||_{F,r} = max { <M, Y> : ||Y||_F = 1, rank Y <= r }.
//
// All sign weights are computed from the residual y_i - <A_i, U U^T>, so
// the sign convention of the outliers never enters explicitly.

#pragma once

#include "rsense/model.hpp"

namespace rsense {

struct SubgradientResult {
  Matrix direction;  // Q * U, an element of the subdifferential of f_l1
  Matrix q_matrix;   // Q = 1/m sum_i Sign(<A_i, U U^T> - y_i) A_i
  double q_frob = 0.0;
};

namespace detail {

template <SensingOperator Op>
void check_factor(const Op& op, const Vector& y, const Matrix& u) {
  require_shape(y.size() == op.size(), "measurement vector length must equal m");
  require_shape(u.rows() == op.dim(), "factor must have d rows");
  require(u.cols() >= 1, "factor must have at least one column");
}

}  // namespace detail

template <SensingOperator Op>
Vector residual(const Vector& y, const Op& op, const Matrix& u) {
  detail::check_factor(op, y, u);
  return y - op.apply(u * u.transpose());
}

inline double loss_l1_from_residual(const Vector& r) {
  return r.cwiseAbs().sum() / (2.0 * static_cast<double>(r.size()));
}

inline double loss_l2_from_residual(const Vector& r) {
  return r.squaredNorm() / (2.0 * static_cast<double>(r.size()));
}

template <SensingOperator Op>
double loss_l1(const Vector& y, const Op& op, const Matrix& u) {
  return loss_l1_from_residual(residual(y, op, u));
}

template <SensingOperator Op>
double loss_l2(const Vector& y, const Op& op, const Matrix& u) {
  return loss_l2_from_residual(residual(y, op, u));
}

// Sign weights w_i = Sign(<A_i, U U^T> - y_i) = Sign(-residual_i).
inline Vector sign_weights(const Vector& r, SignZero at_zero) {
  Vector w(r.size());
  for (Eigen::Index i = 0; i < r.size(); ++i) w(i) = sign_of(-r(i), at_zero);
  return w;
}

template <SensingOperator Op>
SubgradientResult subgrad_l1_from_residual(const Op& op, const Matrix& u, const Vector& r,
                                           SignZero at_zero = SignZero::kZero) {
  SubgradientResult out;
  out.q_matrix = op.adjoint(sign_weights(r, at_zero)) / static_cast<double>(op.size());
  out.q_frob = out.q_matrix.norm();
  out.direction = out.q_matrix * u;
  return out;
}

template <SensingOperator Op>
SubgradientResult subgrad_l1(const Vector& y, const Op& op, const Matrix& u,
                             SignZero at_zero = SignZero::kZero) {
  return subgrad_l1_from_residual(op, u, residual(y, op, u), at_zero);
}

// Exact gradient of f_l2: (2/m) sum_i (<A_i, U U^T> - y_i) A_i U.
template <SensingOperator Op>
Matrix grad_l2(const Vector& y, const Op& op, const Matrix& u) {
  const Vector r = residual(y, op, u);
  return (-2.0 / static_cast<double>(op.size())) * (op.adjoint(r) * u);
}

// ||M||_{F,r}: the l2 norm of the r largest singular values.
inline double f_r_norm(const Matrix& m, int r) {
  require(m.rows() >= 1 && m.cols() >= 1, "matrix must be non-empty");
  const auto full = std::min(m.rows(), m.cols());
  require(r >= 1 && r <= std::max(m.rows(), m.cols()), "rank budget r out of range");
  const Vector sv = Eigen::JacobiSVD<Matrix>(m).singularValues();  // descending
  return sv.head(std::min<Eigen::Index>(r, full)).norm();
}

}  // namespace rsense

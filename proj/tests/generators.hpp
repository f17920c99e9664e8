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

// Small random-instance generators for property tests.

#pragma once

#include <random>
#include <vector>

#include "rsense/core.hpp"

namespace rsense::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }
  std::uint64_t seed() { return rng_(); }

  Matrix matrix(int rows, int cols) {
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal();
    return m;
  }

  Matrix symmetric(int d) {
    const Matrix g = matrix(d, d);
    return 0.5 * (g + g.transpose());
  }

  Vector vector(int n) { return matrix(n, 1).col(0); }

  Vector unit(int n) {
    Vector v = vector(n);
    return v / v.norm();
  }

  Rng& rng() { return rng_; }

 private:
  Rng rng_;
};

// <A, X> by explicit double loop.
inline double inner_loop(const Matrix& a, const Matrix& x) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i) s += a(i, j) * x(i, j);
  return s;
}

}  // namespace rsense::testing

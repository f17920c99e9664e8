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

// Shared aliases, error types and seeding helpers.

#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace rsense {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Rng = std::mt19937_64;

inline constexpr double kSqrt2OverPi = 0.79788456080286535588;  // sqrt(2/pi)

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid scalar parameter (rank out of range, negative scale, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Operand dimensions do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Input lies outside the domain of the operation (e.g. a zero probe).
class DomainError : public Error {
 public:
  using Error::Error;
};

// The requested combination is valid but not implemented (e.g. r* > 1
// for rank-one diagnostics).
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

// Spectral initialization on an all-zero sign matrix.
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

// SplitMix64 finalizer. Used to derive independent child seeds from a base
// seed so every random object can be regenerated in isolation.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Sign with a caller-chosen value at zero. The subdifferential of |x| at 0
// is [-1, 1]; any value in it yields a valid subgradient.
enum class SignZero { kZero, kPlus, kMinus };

inline double sign_of(double x, SignZero at_zero = SignZero::kZero) {
  if (x > 0.0) return 1.0;
  if (x < 0.0) return -1.0;
  switch (at_zero) {
    case SignZero::kPlus:
      return 1.0;
    case SignZero::kMinus:
      return -1.0;
    case SignZero::kZero:
      break;
  }
  return 0.0;
}

inline Matrix standard_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(rows, cols);
  // Column-major fill order is part of the reproducibility contract.
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) g(i, j) = normal(rng);
  return g;
}

// Shortest round-trip decimal form; "nan" for NaN.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ParameterError(message);
}

inline void require_shape(bool condition, const std::string& message) {
  if (!condition) throw ShapeError(message);
}

}  // namespace rsense

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

// Problem generation: ground truths, Gaussian sensing ensembles, sparse
// outlier noise and measurement vectors y = A(X*) + s.
//
// Every random object is a pure function of its seed. Sensing matrix i is
// drawn from its own generator seeded with derive_seed(seed, i), so the
// dense and streaming ensembles below produce identical matrices, and an
// ensemble with m measurements is a prefix of one with m' > m.

#pragma once

#include <algorithm>
#include <array>
#include <concepts>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rsense/core.hpp"

namespace rsense {

// ---------------------------------------------------------------------------
// Ground truth

struct GroundTruth {
  int d = 0;
  int r_star = 0;
  Matrix factor;  // d x r_star
  Matrix x_star;  // factor * factor^T

  // Unit-norm leading factor column; only meaningful for r_star == 1.
  Vector direction() const { return factor.col(0); }

  static GroundTruth from_factor(Matrix factor) {
    require(factor.rows() >= 1 && factor.cols() >= 1,
            "ground truth factor must be non-empty");
    require(factor.cols() <= factor.rows(), "ground truth rank exceeds dimension");
    GroundTruth truth;
    truth.d = static_cast<int>(factor.rows());
    truth.r_star = static_cast<int>(factor.cols());
    const Matrix gram = factor * factor.transpose();
    // Blocked products are not bitwise symmetric; downstream code may rely on it.
    truth.x_star = 0.5 * (gram + gram.transpose());
    truth.factor = std::move(factor);
    return truth;
  }
};

// Factor columns are i.i.d. standard Gaussian. With unit_norm the factor is
// rescaled so that ||X*||_F = 1; for r_star = 1 this also gives ||u*|| = 1.
inline GroundTruth gen_ground_truth(int d, int r_star, bool unit_norm, std::uint64_t seed) {
  require(d >= 1, "dimension d must be positive");
  require(r_star >= 1 && r_star <= d, "r_star must satisfy 1 <= r_star <= d");
  Rng rng(derive_seed(seed, 0x67747275ULL));
  Matrix factor = standard_normal(d, r_star, rng);
  if (unit_norm) {
    const double frob = (factor * factor.transpose()).norm();
    factor /= std::sqrt(frob);
  }
  return GroundTruth::from_factor(std::move(factor));
}

// ---------------------------------------------------------------------------
// Sensing operators

// Goe: A = (G + G^T) / 2, diagonal variance 1, off-diagonal variance 1/2.
// IidSymmetric: upper triangle i.i.d. N(0, 1), mirrored.
enum class EnsembleKind { kGoe, kIidSymmetric };

namespace detail {

inline void fill_sensing_matrix(Eigen::Ref<Matrix> a, EnsembleKind kind, std::uint64_t seed,
                                std::uint64_t index) {
  const Eigen::Index d = a.rows();
  Rng rng(derive_seed(seed, index));
  if (kind == EnsembleKind::kGoe) {
    const Matrix g = standard_normal(d, d, rng);
    a = 0.5 * (g + g.transpose());
    return;
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i <= j; ++i) {
      const double v = normal(rng);
      a(i, j) = v;
      a(j, i) = v;
    }
}

}  // namespace detail

// A linear map X -> [<A_1, X>, ..., <A_m, X>] with symmetric A_i.
template <class Op>
concept SensingOperator = requires(const Op& op, const Matrix& x, const Vector& w) {
  { op.dim() } -> std::convertible_to<Eigen::Index>;
  { op.size() } -> std::convertible_to<Eigen::Index>;
  { op.apply(x) } -> std::convertible_to<Vector>;
  // sum_i w_i A_i
  { op.adjoint(w) } -> std::convertible_to<Matrix>;
};

// Dense ensemble: the m sensing matrices are stored as the rows of an
// m x d^2 matrix so A(X) and its adjoint are single matrix-vector products.
class MeasurementEnsemble {
 public:
  using Storage = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  MeasurementEnsemble(int d, int m, std::uint64_t seed, EnsembleKind kind = EnsembleKind::kGoe)
      : d_(d), m_(m), seed_(seed), kind_(kind) {
    require(d >= 1, "dimension d must be positive");
    require(m >= 1, "measurement count m must be positive");
    rows_.resize(m, static_cast<Eigen::Index>(d) * d);
    Matrix a(d, d);
    for (int i = 0; i < m; ++i) {
      detail::fill_sensing_matrix(a, kind, seed, static_cast<std::uint64_t>(i));
      rows_.row(i) = Eigen::Map<const Eigen::RowVectorXd>(a.data(), a.size());
    }
  }

  // Wraps explicit matrices; every A_i must be symmetric.
  explicit MeasurementEnsemble(const std::vector<Matrix>& matrices)
      : d_(matrices.empty() ? 0 : static_cast<int>(matrices.front().rows())),
        m_(static_cast<int>(matrices.size())) {
    require(!matrices.empty(), "ensemble needs at least one matrix");
    rows_.resize(m_, static_cast<Eigen::Index>(d_) * d_);
    for (int i = 0; i < m_; ++i) {
      const Matrix& a = matrices[i];
      require_shape(a.rows() == d_ && a.cols() == d_, "sensing matrices must all be d x d");
      require(a == a.transpose(), "sensing matrices must be symmetric");
      rows_.row(i) = Eigen::Map<const Eigen::RowVectorXd>(a.data(), a.size());
    }
  }

  Eigen::Index dim() const { return d_; }
  Eigen::Index size() const { return m_; }
  std::uint64_t seed() const { return seed_; }
  EnsembleKind kind() const { return kind_; }

  Eigen::Map<const Matrix> matrix(Eigen::Index i) const {
    return Eigen::Map<const Matrix>(rows_.row(i).data(), d_, d_);
  }

  Vector apply(const Matrix& x) const {
    require_shape(x.rows() == d_ && x.cols() == d_, "operand must be d x d");
    return rows_ * Eigen::Map<const Vector>(x.data(), x.size());
  }

  Matrix adjoint(const Vector& w) const {
    require_shape(w.size() == m_, "weight vector must have length m");
    const Vector flat = rows_.transpose() * w;
    return Eigen::Map<const Matrix>(flat.data(), d_, d_);
  }

  const Storage& rows() const { return rows_; }

 private:
  int d_ = 0;
  int m_ = 0;
  std::uint64_t seed_ = 0;
  EnsembleKind kind_ = EnsembleKind::kGoe;
  Storage rows_;
};

// Regenerates each A_i from its seed on every pass. O(d^2) memory, for
// sweeps where m * d^2 does not fit.
class StreamingEnsemble {
 public:
  StreamingEnsemble(int d, int m, std::uint64_t seed, EnsembleKind kind = EnsembleKind::kGoe)
      : d_(d), m_(m), seed_(seed), kind_(kind) {
    require(d >= 1, "dimension d must be positive");
    require(m >= 1, "measurement count m must be positive");
  }

  Eigen::Index dim() const { return d_; }
  Eigen::Index size() const { return m_; }
  std::uint64_t seed() const { return seed_; }

  Matrix matrix(Eigen::Index i) const {
    Matrix a(d_, d_);
    detail::fill_sensing_matrix(a, kind_, seed_, static_cast<std::uint64_t>(i));
    return a;
  }

  Vector apply(const Matrix& x) const {
    require_shape(x.rows() == d_ && x.cols() == d_, "operand must be d x d");
    Vector out(m_);
    Matrix a(d_, d_);
    for (int i = 0; i < m_; ++i) {
      detail::fill_sensing_matrix(a, kind_, seed_, static_cast<std::uint64_t>(i));
      out(i) = a.cwiseProduct(x).sum();
    }
    return out;
  }

  Matrix adjoint(const Vector& w) const {
    require_shape(w.size() == m_, "weight vector must have length m");
    Matrix out = Matrix::Zero(d_, d_);
    Matrix a(d_, d_);
    for (int i = 0; i < m_; ++i) {
      if (w(i) == 0.0) continue;
      detail::fill_sensing_matrix(a, kind_, seed_, static_cast<std::uint64_t>(i));
      out += w(i) * a;
    }
    return out;
  }

 private:
  int d_ = 0;
  int m_ = 0;
  std::uint64_t seed_ = 0;
  EnsembleKind kind_ = EnsembleKind::kGoe;
};

inline MeasurementEnsemble gen_ensemble(int d, int m, std::uint64_t seed,
                                        EnsembleKind kind = EnsembleKind::kGoe) {
  return MeasurementEnsemble(d, m, seed, kind);
}

template <SensingOperator Op>
Vector apply_operator(const Op& op, const Matrix& x) {
  return op.apply(x);
}

// ---------------------------------------------------------------------------
// Noise

enum class NoiseDist { kNone, kGaussian, kUniform, kLaplace, kCauchy, kRademacher };

inline constexpr std::array<std::pair<NoiseDist, std::string_view>, 6> kNoiseDistNames{{
    {NoiseDist::kNone, "none"},
    {NoiseDist::kGaussian, "gaussian"},
    {NoiseDist::kUniform, "uniform"},
    {NoiseDist::kLaplace, "laplace"},
    {NoiseDist::kCauchy, "cauchy"},
    {NoiseDist::kRademacher, "rademacher"},
}};

inline std::string_view to_string(NoiseDist dist) {
  for (const auto& [d, name] : kNoiseDistNames)
    if (d == dist) return name;
  return "unknown";
}

inline NoiseDist parse_noise_dist(std::string_view name) {
  for (const auto& [d, n] : kNoiseDistNames)
    if (n == name) return d;
  throw ParameterError("unknown noise distribution '" + std::string(name) +
                       "' (expected none, gaussian, uniform, laplace, cauchy or rademacher)");
}

// Sparse outlier model: a uniformly random subset of floor(p*m) indices is
// corrupted with i.i.d. draws from `dist`; all other entries are zero.
//
// `scale` is the natural parameter of each distribution:
//   gaussian   N(0, scale^2)
//   uniform    U(-scale, scale)
//   laplace    density exp(-|s|/scale) / (2 scale)
//   cauchy     location 0, scale `scale` (heavy-tailed, no mean)
//   rademacher +-scale with equal probability
struct NoiseSpec {
  double p = 0.0;
  NoiseDist dist = NoiseDist::kNone;
  double scale = 1.0;
  std::uint64_t seed = 0;

  // Picks `scale` so the distribution has the given variance. Cauchy has
  // none; its scale is set to sqrt(variance) by convention.
  static NoiseSpec with_variance(double p, NoiseDist dist, double variance,
                                 std::uint64_t seed = 0) {
    require(variance >= 0.0, "noise variance must be non-negative");
    double scale = std::sqrt(variance);
    switch (dist) {
      case NoiseDist::kUniform:
        scale = std::sqrt(3.0 * variance);
        break;
      case NoiseDist::kLaplace:
        scale = std::sqrt(variance / 2.0);
        break;
      default:
        break;
    }
    return NoiseSpec{p, dist, scale, seed};
  }

  bool heavy_tailed() const { return dist == NoiseDist::kCauchy; }

  double variance() const {
    switch (dist) {
      case NoiseDist::kNone:
        return 0.0;
      case NoiseDist::kGaussian:
      case NoiseDist::kRademacher:
        return scale * scale;
      case NoiseDist::kUniform:
        return scale * scale / 3.0;
      case NoiseDist::kLaplace:
        return 2.0 * scale * scale;
      case NoiseDist::kCauchy:
        break;
    }
    return std::numeric_limits<double>::quiet_NaN();
  }

  void validate() const {
    require(std::isfinite(p) && p >= 0.0 && p <= 1.0, "corruption probability p must lie in [0, 1]");
    require(std::isfinite(scale) && scale >= 0.0, "noise scale must be finite and non-negative");
  }

  // Size of the corrupted set. The small guard absorbs representation
  // error such as 0.1 * 1000 = 100.00000000000001.
  Eigen::Index support_size(Eigen::Index m) const {
    if (dist == NoiseDist::kNone) return 0;
    const auto k = static_cast<Eigen::Index>(std::floor(p * static_cast<double>(m) + 1e-9));
    return std::min(k, m);
  }

  double draw(Rng& rng) const {
    switch (dist) {
      case NoiseDist::kNone:
        return 0.0;
      case NoiseDist::kGaussian:
        return std::normal_distribution<double>(0.0, 1.0)(rng) * scale;
      case NoiseDist::kUniform:
        return std::uniform_real_distribution<double>(-1.0, 1.0)(rng) * scale;
      case NoiseDist::kLaplace: {
        const double e = std::exponential_distribution<double>(1.0)(rng);
        return (std::bernoulli_distribution(0.5)(rng) ? e : -e) * scale;
      }
      case NoiseDist::kCauchy:
        return std::cauchy_distribution<double>(0.0, 1.0)(rng) * scale;
      case NoiseDist::kRademacher:
        return std::bernoulli_distribution(0.5)(rng) ? scale : -scale;
    }
    return 0.0;
  }
};

struct NoiseVector {
  Vector s;
  std::vector<Eigen::Index> support;  // ascending

  static NoiseVector zeros(Eigen::Index m) { return NoiseVector{Vector::Zero(m), {}}; }
};

inline NoiseVector gen_noise(Eigen::Index m, const NoiseSpec& spec) {
  require(m >= 1, "measurement count m must be positive");
  spec.validate();
  NoiseVector out = NoiseVector::zeros(m);
  const Eigen::Index k = spec.support_size(m);
  if (k == 0) return out;

  Rng rng(derive_seed(spec.seed, 0x6e6f6973ULL));
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(m));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  // Partial Fisher-Yates: the first k entries are a uniform k-subset.
  for (Eigen::Index i = 0; i < k; ++i) {
    std::uniform_int_distribution<Eigen::Index> pick(i, m - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(static_cast<std::size_t>(k));
  std::sort(idx.begin(), idx.end());

  Rng values(derive_seed(spec.seed, 0x76616c73ULL));
  for (Eigen::Index i : idx) out.s(i) = spec.draw(values);
  out.support = std::move(idx);
  return out;
}

// ---------------------------------------------------------------------------
// Measurements

template <SensingOperator Op>
Vector measure(const Op& op, const Matrix& x_star, const NoiseVector& noise) {
  require_shape(noise.s.size() == op.size(), "noise length must equal m");
  return op.apply(x_star) + noise.s;
}

template <SensingOperator Op>
Vector measure(const Op& op, const GroundTruth& truth, const NoiseVector& noise) {
  require_shape(truth.d == op.dim(), "ground truth dimension must match the ensemble");
  return measure(op, truth.x_star, noise);
}

}  // namespace rsense

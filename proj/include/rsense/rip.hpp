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

// Monte-Carlo certifiers for restricted-isometry style properties of a
// sensing operator.
//
// Each certifier replaces a supremum over the unit rank-r sphere by a
// maximum over sampled probes, so every delta_hat is a lower bound on the
// true constant. Probe k is drawn from its own generator seeded with
// derive_seed(seed, k): estimates with more samples extend the same stream
// and are therefore non-decreasing in n_samples.
//
//   l2      max | 1/m ||A(X)||_2^2 - 1 |
//   l1/l2   max | 1/m ||A(X)||_1 - sqrt(2/pi) | / sqrt(2/pi)
//   sign    max || Q(X) - phi(X) X/||X||_F ||_{F,r} / phi(X)
//           with Q(X) = 1/m sum_i Sign(<A_i, X> - s_i) A_i

#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rsense/loss.hpp"
#include "rsense/model.hpp"

namespace rsense {

// ---------------------------------------------------------------------------
// Scaling function
//
// phi(X) = sqrt(2/pi) (1 - p + p E[exp(-s^2 / (2 c))]) with c = ||X||_F^2
// (kFrobSquared) or c = ||X||_F (kFrob).

enum class PhiMode { kClosedForm, kMonteCarlo };
enum class ExponentConvention { kFrob, kFrobSquared };

struct ScalingFunction {
  double p = 0.0;
  NoiseDist dist = NoiseDist::kNone;
  double scale = 0.0;
  PhiMode mode = PhiMode::kClosedForm;
  ExponentConvention convention = ExponentConvention::kFrobSquared;
  int mc_samples = 200000;
  std::uint64_t mc_seed = 0;

  static ScalingFunction from_noise(const NoiseSpec& noise) {
    ScalingFunction sf;
    sf.p = noise.p;
    sf.dist = noise.dist;
    sf.scale = noise.scale;
    if (noise.dist == NoiseDist::kNone) sf.p = 0.0;
    return sf;
  }
};

struct KernelEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

namespace detail {

// e^{x^2} erfc(x) for x >= 0.
inline double erfcx(double x) {
  if (x < 25.0) return std::exp(x * x) * std::erfc(x);
  const double x2 = x * x;
  return (1.0 - 0.5 / x2 + 0.75 / (x2 * x2) - 1.875 / (x2 * x2 * x2)) /
         (x * std::sqrt(std::numbers::pi));
}

}  // namespace detail

// E[exp(-s^2 / (2c))] for s ~ dist(scale), or nullopt when no closed form
// is implemented (Cauchy).
inline std::optional<double> gaussian_kernel_closed_form(NoiseDist dist, double scale, double c) {
  require(c > 0.0, "kernel width must be positive");
  if (dist == NoiseDist::kNone || scale == 0.0) return 1.0;
  switch (dist) {
    case NoiseDist::kGaussian:
      return 1.0 / std::sqrt(1.0 + scale * scale / c);
    case NoiseDist::kRademacher:
      return std::exp(-scale * scale / (2.0 * c));
    case NoiseDist::kUniform: {
      const double w = std::sqrt(2.0 * c);
      return std::sqrt(std::numbers::pi) * w / (2.0 * scale) * std::erf(scale / w);
    }
    case NoiseDist::kLaplace: {
      const double x = std::sqrt(c / 2.0) / scale;
      return std::sqrt(std::numbers::pi * c / 2.0) / scale * detail::erfcx(x);
    }
    default:
      break;
  }
  return std::nullopt;
}

inline KernelEstimate gaussian_kernel_monte_carlo(NoiseDist dist, double scale, double c, int n,
                                                  std::uint64_t seed) {
  require(c > 0.0, "kernel width must be positive");
  require(n >= 2, "Monte-Carlo kernel needs at least two samples");
  const NoiseSpec draw_spec{1.0, dist, scale, 0};
  Rng rng(derive_seed(seed, 0x70686900ULL));
  double mean = 0.0, m2 = 0.0;
  for (int k = 0; k < n; ++k) {
    const double s = draw_spec.draw(rng);
    const double v = std::exp(-s * s / (2.0 * c));
    const double delta = v - mean;
    mean += delta / (k + 1);
    m2 += delta * (v - mean);
  }
  return {mean, std::sqrt(m2 / (n - 1) / n)};
}

inline double scaling_phi(const ScalingFunction& sf, double frob_x) {
  require(frob_x > 0.0 && std::isfinite(frob_x), "||X||_F must be positive");
  require(sf.p >= 0.0 && sf.p <= 1.0, "corruption probability p must lie in [0, 1]");
  require(sf.scale >= 0.0, "noise scale must be non-negative");
  if (sf.p == 0.0) return kSqrt2OverPi;
  const double c = sf.convention == ExponentConvention::kFrobSquared ? frob_x * frob_x : frob_x;
  std::optional<double> kernel;
  if (sf.mode == PhiMode::kClosedForm) kernel = gaussian_kernel_closed_form(sf.dist, sf.scale, c);
  if (!kernel) kernel = gaussian_kernel_monte_carlo(sf.dist, sf.scale, c, sf.mc_samples, sf.mc_seed).mean;
  return kSqrt2OverPi * (1.0 - sf.p + sf.p * *kernel);
}

// ---------------------------------------------------------------------------
// Probes

// Symmetric rank-r probe L diag(+-1) L^T with Gaussian L, scaled to unit
// Frobenius norm. Symmetric because every A_i is: the antisymmetric part of
// a probe is invisible to A.
inline Matrix sample_rank_r_symmetric(int d, int r, Rng& rng) {
  require(r >= 1 && r <= d, "probe rank must satisfy 1 <= r <= d");
  Matrix l = standard_normal(d, r, rng);
  std::bernoulli_distribution coin(0.5);
  Vector signs(r);
  for (int k = 0; k < r; ++k) signs(k) = coin(rng) ? 1.0 : -1.0;
  Matrix x = l * signs.asDiagonal() * l.transpose();
  x = (0.5 * (x + x.transpose())).eval();
  return x / x.norm();
}

inline Matrix probe(int d, int r, std::uint64_t seed, int k) {
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
  return sample_rank_r_symmetric(d, r, rng);
}

// ---------------------------------------------------------------------------
// Estimates

enum class RipKind { kL2, kL1L2, kSign };

inline std::string_view to_string(RipKind k) {
  switch (k) {
    case RipKind::kL2:
      return "l2";
    case RipKind::kL1L2:
      return "l1l2";
    case RipKind::kSign:
      return "sign";
  }
  return "unknown";
}

inline RipKind parse_rip_kind(std::string_view name) {
  if (name == "l2") return RipKind::kL2;
  if (name == "l1l2") return RipKind::kL1L2;
  if (name == "sign") return RipKind::kSign;
  throw ParameterError("unknown RIP kind '" + std::string(name) + "' (expected l2, l1l2 or sign)");
}

struct RipEstimate {
  RipKind kind = RipKind::kL2;
  int rank = 1;
  double delta_hat = 0.0;
  int n_samples = 0;
  Matrix witness;
  double phi_at_witness = std::numeric_limits<double>::quiet_NaN();

  static constexpr std::string_view kCsvHeader = "kind,r,m,d,p,sigma,n_samples,delta_hat";

  // One CSV row; m, d, p and sigma describe the instance the estimate was
  // computed on.
  std::string csv_row(Eigen::Index m, Eigen::Index d, double p, double sigma) const {
    std::ostringstream os;
    os << to_string(kind) << ',' << rank << ',' << m << ',' << d << ',' << format_double(p) << ','
       << format_double(sigma) << ',' << n_samples << ',' << format_double(delta_hat);
    return os.str();
  }
};

template <SensingOperator Op>
double l2_rip_deficiency(const Op& op, const Matrix& x) {
  const double frob = x.norm();
  if (!(frob > 0.0)) throw DomainError("RIP probe must be nonzero");
  return std::abs(op.apply(x / frob).squaredNorm() / static_cast<double>(op.size()) - 1.0);
}

template <SensingOperator Op>
double l1l2_rip_deficiency(const Op& op, const Matrix& x) {
  const double frob = x.norm();
  if (!(frob > 0.0)) throw DomainError("RIP probe must be nonzero");
  const double mean_abs = op.apply(x / frob).cwiseAbs().sum() / static_cast<double>(op.size());
  return std::abs(mean_abs - kSqrt2OverPi) / kSqrt2OverPi;
}

// Q(X) = 1/m sum_i Sign(<A_i, X> - s_i) A_i.
template <SensingOperator Op>
Matrix sign_q_matrix(const Op& op, const NoiseVector& noise, const Matrix& x,
                     SignZero at_zero = SignZero::kZero) {
  require_shape(noise.s.size() == op.size(), "noise length must equal m");
  const Vector inner = op.apply(x) - noise.s;
  Vector w(inner.size());
  for (Eigen::Index i = 0; i < inner.size(); ++i) w(i) = sign_of(inner(i), at_zero);
  return op.adjoint(w) / static_cast<double>(op.size());
}

template <SensingOperator Op>
double sign_rip_deficiency(const Op& op, const NoiseVector& noise, const Matrix& x, int r,
                           const ScalingFunction& sf, SignZero at_zero = SignZero::kZero) {
  require_shape(x.rows() == op.dim() && x.cols() == op.dim(), "probe must be d x d");
  const double frob = x.norm();
  if (!(frob > 0.0)) throw DomainError("Sign-RIP probe must be nonzero");
  const double phi = scaling_phi(sf, frob);
  const Matrix q = sign_q_matrix(op, noise, x, at_zero);
  return f_r_norm(q - (phi / frob) * x, r) / phi;
}

namespace detail {

template <class Deficiency>
RipEstimate running_max(RipKind kind, int d, int r, int n_samples, std::uint64_t seed,
                        const std::vector<Matrix>& extra, Deficiency&& deficiency) {
  require(n_samples >= 1 || !extra.empty(), "at least one probe is required");
  require(r >= 1 && r <= d, "rank r must satisfy 1 <= r <= d");
  RipEstimate est;
  est.kind = kind;
  est.rank = r;
  est.delta_hat = -1.0;
  auto consider = [&](const Matrix& x) {
    const double v = deficiency(x);
    if (v > est.delta_hat) {
      est.delta_hat = v;
      est.witness = x;
    }
    ++est.n_samples;
  };
  for (int k = 0; k < n_samples; ++k) consider(probe(d, r, seed, k));
  for (const Matrix& x : extra) {
    require_shape(x.rows() == d && x.cols() == d, "structured probes must be d x d");
    consider(x);
  }
  return est;
}

}  // namespace detail

// `probes` are caller-supplied structured matrices (e.g. iterates
// U U^T - X*) evaluated after the random samples.
template <SensingOperator Op>
RipEstimate estimate_sign_rip(const Op& op, const NoiseVector& noise, const ScalingFunction& sf,
                              int r, int n_samples, std::uint64_t seed,
                              const std::vector<Matrix>& probes = {}) {
  RipEstimate est = detail::running_max(
      RipKind::kSign, static_cast<int>(op.dim()), r, n_samples, seed, probes,
      [&](const Matrix& x) { return sign_rip_deficiency(op, noise, x, r, sf); });
  est.phi_at_witness = scaling_phi(sf, est.witness.norm());
  return est;
}

template <SensingOperator Op>
RipEstimate estimate_l2_rip(const Op& op, int r, int n_samples, std::uint64_t seed,
                            const std::vector<Matrix>& probes = {}) {
  return detail::running_max(RipKind::kL2, static_cast<int>(op.dim()), r, n_samples, seed, probes,
                             [&](const Matrix& x) { return l2_rip_deficiency(op, x); });
}

template <SensingOperator Op>
RipEstimate estimate_l1l2_rip(const Op& op, int r, int n_samples, std::uint64_t seed,
                              const std::vector<Matrix>& probes = {}) {
  return detail::running_max(RipKind::kL1L2, static_cast<int>(op.dim()), r, n_samples, seed,
                             probes, [&](const Matrix& x) { return l1l2_rip_deficiency(op, x); });
}

// ---------------------------------------------------------------------------
// l2 deviation under noise
//
// The l2 analogue of Q, Q2(X) = 1/m sum_i (<A_i, X> - s_i) A_i, is compared
// with X over sampled full-rank unit-Frobenius symmetric X. The noise-only
// part 1/m sum_{i in S} s_i A_i is reported separately; it does not depend
// on X.

struct L2Deviation {
  double deviation = 0.0;
  double noise_term = 0.0;
  Matrix witness;
};

template <SensingOperator Op>
L2Deviation q_deviation_l2(const Op& op, const NoiseVector& noise, int n_samples,
                           std::uint64_t seed) {
  require_shape(noise.s.size() == op.size(), "noise length must equal m");
  require(n_samples >= 1, "at least one probe is required");
  const int d = static_cast<int>(op.dim());
  const double inv_m = 1.0 / static_cast<double>(op.size());
  L2Deviation out;
  out.noise_term = (op.adjoint(noise.s) * inv_m).norm();
  out.deviation = -1.0;
  for (int k = 0; k < n_samples; ++k) {
    const Matrix x = probe(d, d, seed, k);
    const double dev = (op.adjoint(op.apply(x) - noise.s) * inv_m - x).norm();
    if (dev > out.deviation) {
      out.deviation = dev;
      out.witness = x;
    }
  }
  return out;
}

}  // namespace rsense

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

// Subgradient descent on the l1 loss, gradient descent on the l2 loss,
// step-size policies and initializations.

#pragma once

#include <algorithm>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "rsense/diagnostics.hpp"
#include "rsense/loss.hpp"

namespace rsense {

// ---------------------------------------------------------------------------
// Step sizes

enum class StepKind {
  kQNormGeometric,        // eta0 * rho^t / ||Q_t||_F
  kGeometric,             // eta0 * rho^t
  kResidualProportional,  // eta0 * (pi/2) * (1/m) ||y - A(U_t U_t^T)||_1
  kInverseT,              // eta0 / (t + 1)
  kInverseSqrtT,          // eta0 / sqrt(t + 1)
  kConstant,              // eta0
};

inline constexpr std::array<std::pair<StepKind, std::string_view>, 6> kStepKindNames{{
    {StepKind::kQNormGeometric, "qnorm-geometric"},
    {StepKind::kGeometric, "geometric"},
    {StepKind::kResidualProportional, "residual"},
    {StepKind::kInverseT, "inverse-t"},
    {StepKind::kInverseSqrtT, "inverse-sqrt-t"},
    {StepKind::kConstant, "constant"},
}};

inline std::string_view to_string(StepKind kind) {
  for (const auto& [k, name] : kStepKindNames)
    if (k == kind) return name;
  return "unknown";
}

inline StepKind parse_step_kind(std::string_view name) {
  for (const auto& [k, n] : kStepKindNames)
    if (n == name) return k;
  throw ParameterError("unknown step policy '" + std::string(name) +
                       "' (expected qnorm-geometric, geometric, residual, inverse-t, "
                       "inverse-sqrt-t or constant)");
}

// Iteration indices t are zero-based; the polynomially decaying policies
// divide by the one-based count t + 1.
struct StepPolicy {
  StepKind kind = StepKind::kQNormGeometric;
  double eta0 = 0.4;
  double rho = 0.99;  // only read by the geometric kinds

  static StepPolicy qnorm_geometric(double eta0, double rho) {
    return {StepKind::kQNormGeometric, eta0, rho};
  }
  static StepPolicy geometric(double eta0, double rho) { return {StepKind::kGeometric, eta0, rho}; }
  static StepPolicy residual_proportional(double eta0) {
    return {StepKind::kResidualProportional, eta0, 1.0};
  }
  static StepPolicy inverse_t(double eta0) { return {StepKind::kInverseT, eta0, 1.0}; }
  static StepPolicy inverse_sqrt_t(double eta0) { return {StepKind::kInverseSqrtT, eta0, 1.0}; }
  static StepPolicy constant(double eta0) { return {StepKind::kConstant, eta0, 1.0}; }

  bool geometric_kind() const {
    return kind == StepKind::kQNormGeometric || kind == StepKind::kGeometric;
  }

  void validate() const {
    require(std::isfinite(eta0) && eta0 > 0.0, "step size eta0 must be positive");
    if (geometric_kind()) require(rho > 0.0 && rho < 1.0, "decay rate rho must lie in (0, 1)");
  }

  // Returns NaN when the step is undefined (||Q||_F = 0 under the
  // Q-normalized policy).
  double step(int t, double q_frob, double mean_abs_residual) const {
    const double tt = static_cast<double>(t);
    switch (kind) {
      case StepKind::kQNormGeometric:
        if (!(q_frob > 0.0)) return std::numeric_limits<double>::quiet_NaN();
        return eta0 * std::pow(rho, tt) / q_frob;
      case StepKind::kGeometric:
        return eta0 * std::pow(rho, tt);
      case StepKind::kResidualProportional:
        return eta0 * (std::numbers::pi / 2.0) * mean_abs_residual;
      case StepKind::kInverseT:
        return eta0 / (tt + 1.0);
      case StepKind::kInverseSqrtT:
        return eta0 / std::sqrt(tt + 1.0);
      case StepKind::kConstant:
        return eta0;
    }
    return std::numeric_limits<double>::quiet_NaN();
  }

  friend bool operator==(const StepPolicy&, const StepPolicy&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const StepPolicy& p) {
  os << to_string(p.kind) << "(eta0=" << p.eta0;
  if (p.geometric_kind()) os << ", rho=" << p.rho;
  return os << ")";
}

// Early-stopping horizon T = c * log(r'/delta) / eta0, rounded up.
inline int early_stopping_iterations(int r_prime, double delta, double eta0, double c = 1.0) {
  require(r_prime >= 1 && delta > 0.0 && eta0 > 0.0, "invalid early-stopping parameters");
  return std::max(1, static_cast<int>(std::ceil(c * std::log(r_prime / delta) / eta0)));
}

// rho = 1 - c * eta0 / log(1/alpha); requires alpha < 1.
inline double default_decay_rate(double eta0, double alpha, double c = 1.0) {
  require(alpha > 0.0 && alpha < 1.0, "initial scale alpha must lie in (0, 1)");
  const double rho = 1.0 - c * eta0 / std::log(1.0 / alpha);
  require(rho > 0.0 && rho < 1.0, "derived decay rate falls outside (0, 1)");
  return rho;
}

// alpha = sqrt(delta) / r'^(1/4).
inline double default_init_scale(double delta, int r_prime) {
  require(delta > 0.0 && r_prime >= 1, "invalid initialization-scale parameters");
  return std::sqrt(delta) / std::pow(static_cast<double>(r_prime), 0.25);
}

// ---------------------------------------------------------------------------
// Initialization

enum class InitKind { kSpectral, kRandomGaussian, kNearZero };

struct InitSpec {
  InitKind kind = InitKind::kSpectral;
  double scale = 0.1;  // alpha for spectral, Frobenius scale otherwise

  void validate() const {
    if (kind == InitKind::kSpectral)
      require(scale > 0.0, "spectral initialization scale alpha must be positive");
    else
      require(scale >= 0.0, "initialization scale must be non-negative");
  }
};

inline std::string_view to_string(InitKind kind) {
  switch (kind) {
    case InitKind::kSpectral:
      return "spectral";
    case InitKind::kRandomGaussian:
      return "random";
    case InitKind::kNearZero:
      return "near-zero";
  }
  return "unknown";
}

inline InitKind parse_init_kind(std::string_view name) {
  if (name == "spectral") return InitKind::kSpectral;
  if (name == "random") return InitKind::kRandomGaussian;
  if (name == "near-zero") return InitKind::kNearZero;
  throw ParameterError("unknown initialization '" + std::string(name) +
                       "' (expected spectral, random or near-zero)");
}

// i.i.d. Gaussian entries times scale / sqrt(d r'), so E||U0||_F^2 = scale^2.
inline Matrix random_init(int d, int r_prime, double scale, std::uint64_t seed) {
  require(d >= 1 && r_prime >= 1, "factor shape must be positive");
  require(scale >= 0.0, "initialization scale must be non-negative");
  Rng rng(derive_seed(seed, 0x696e6974ULL));
  return standard_normal(d, r_prime, rng) * (scale / std::sqrt(static_cast<double>(d) * r_prime));
}

namespace detail {

// Flip v so its first nonzero component is positive.
inline void canonical_sign(Eigen::Ref<Vector> v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v(i) != 0.0) {
      if (v(i) < 0.0) v = -v;
      return;
    }
  }
}

}  // namespace detail

// C = 1/m sum_i Sign(y_i) A_i, X = C / ||C||_F = V S V^T.
// Returns alpha * V_r' * sqrt(max(S_r', 0)) over the r' largest eigenvalues.
template <SensingOperator Op>
Matrix spectral_init(const Op& op, const Vector& y, int r_prime, double alpha) {
  require_shape(y.size() == op.size(), "measurement vector length must equal m");
  require(r_prime >= 1 && r_prime <= op.dim(), "r' must satisfy 1 <= r' <= d");
  require(alpha > 0.0, "spectral initialization scale alpha must be positive");
  Vector w(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) w(i) = sign_of(y(i));
  const Matrix c = op.adjoint(w) / static_cast<double>(op.size());
  const double frob = c.norm();
  if (!(frob > 0.0)) throw DegenerateInputError("spectral initialization: sign matrix C is zero");

  const Matrix x_hat = c / frob;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (x_hat + x_hat.transpose()));
  Matrix vecs = eig.eigenvectors();
  const Vector vals = eig.eigenvalues();
  const Eigen::Index d = vals.size();
  for (Eigen::Index k = 0; k < d; ++k) detail::canonical_sign(vecs.col(k));

  std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (vals(a) != vals(b)) return vals(a) > vals(b);
    const Vector& va = vecs.col(a);
    const Vector& vb = vecs.col(b);
    return std::lexicographical_compare(va.data(), va.data() + d, vb.data(), vb.data() + d);
  });

  Matrix b0(d, r_prime);
  for (int k = 0; k < r_prime; ++k) {
    const Eigen::Index j = order[static_cast<std::size_t>(k)];
    b0.col(k) = alpha * std::sqrt(std::max(vals(j), 0.0)) * vecs.col(j);
  }
  return b0;
}

template <SensingOperator Op>
Matrix initialize(const InitSpec& spec, const Op& op, const Vector& y, int r_prime,
                  std::uint64_t seed) {
  spec.validate();
  switch (spec.kind) {
    case InitKind::kSpectral:
      return spectral_init(op, y, r_prime, spec.scale);
    case InitKind::kRandomGaussian:
    case InitKind::kNearZero:
      return random_init(static_cast<int>(op.dim()), r_prime, spec.scale, seed);
  }
  return {};
}

// ---------------------------------------------------------------------------
// Runs

// One row per iterate U_t. `eta` and `q_frob` describe the step taken from
// U_t (for the final row, the step that would be taken). Quantities that
// need the ground truth are NaN when it is not supplied; the signal/error
// columns additionally need r* = 1.
struct IterationRow {
  int t = 0;
  double eta = 0.0;
  double loss_l1 = 0.0;
  double loss_l2 = 0.0;
  double err_frob = std::numeric_limits<double>::quiet_NaN();
  double signal_norm = std::numeric_limits<double>::quiet_NaN();
  double error_norm = std::numeric_limits<double>::quiet_NaN();
  double error_frob = std::numeric_limits<double>::quiet_NaN();
  double q_frob = 0.0;
};

struct RunRecord {
  std::vector<IterationRow> rows;

  static constexpr std::string_view kCsvHeader =
      "t,eta_t,loss_l1,loss_l2,err_frob,signal_norm,error_norm,error_frob,q_frob";

  void write_csv(std::ostream& os, bool header = true) const;
};

enum class RunStatus { kOk, kStepSingularity, kDiverged };

inline std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::kOk:
      return "ok";
    case RunStatus::kStepSingularity:
      return "step_singularity";
    case RunStatus::kDiverged:
      return "diverged";
  }
  return "unknown";
}

struct RunResult {
  Matrix u;
  RunRecord record;
  RunStatus status = RunStatus::kOk;
  int iterations = 0;
};

struct RunOptions {
  const GroundTruth* truth = nullptr;
  SignZero sign_zero = SignZero::kZero;
  // ||U_t||_F above this (or non-finite) aborts the run as diverged.
  double divergence_bound = 1e6;
};

namespace detail {

enum class Objective { kL1, kL2 };

inline IterationRow make_row(int t, const Matrix& u, const Vector& r, double eta, double q_frob,
                             const GroundTruth* truth) {
  IterationRow row;
  row.t = t;
  row.eta = eta;
  row.loss_l1 = loss_l1_from_residual(r);
  row.loss_l2 = loss_l2_from_residual(r);
  row.q_frob = q_frob;
  if (truth != nullptr) {
    row.err_frob = error_frobenius(u, *truth);
    if (truth->r_star == 1) {
      const Decomposition dec = decompose(u, *truth);
      row.signal_norm = dec.signal.norm();
      row.error_norm = spectral_norm(dec.error);
      row.error_frob = dec.error.norm();
    }
  }
  return row;
}

template <SensingOperator Op>
RunResult descend(Objective objective, const Op& op, const Vector& y, const Matrix& u0,
                  const StepPolicy& policy, int iterations, const RunOptions& opts) {
  detail::check_factor(op, y, u0);
  require(iterations >= 0, "iteration count T must be non-negative");
  policy.validate();
  if (opts.truth != nullptr)
    require_shape(opts.truth->d == op.dim(), "ground truth dimension must match the ensemble");

  const double inv_m = 1.0 / static_cast<double>(op.size());
  RunResult out;
  out.u = u0;
  out.record.rows.reserve(static_cast<std::size_t>(iterations) + 1);

  for (int t = 0;; ++t) {
    const Vector r = y - op.apply(out.u * out.u.transpose());
    Matrix direction;
    double q_frob = 0.0;
    if (objective == Objective::kL1) {
      SubgradientResult sg = subgrad_l1_from_residual(op, out.u, r, opts.sign_zero);
      direction = std::move(sg.direction);
      q_frob = sg.q_frob;
    } else {
      // Q = 1/m sum_i (<A_i, U U^T> - y_i) A_i; gradient = 2 Q U.
      const Matrix q = op.adjoint(-r) * inv_m;
      q_frob = q.norm();
      direction = 2.0 * (q * out.u);
    }
    const double mean_abs = r.cwiseAbs().sum() * inv_m;
    const double eta = policy.step(t, q_frob, mean_abs);
    out.record.rows.push_back(make_row(t, out.u, r, eta, q_frob, opts.truth));
    out.iterations = t;

    if (t == iterations) break;
    if (std::isnan(eta)) {
      out.status = RunStatus::kStepSingularity;
      break;
    }
    out.u -= eta * direction;
    const double norm = out.u.norm();
    if (!std::isfinite(norm) || norm > opts.divergence_bound) {
      out.status = RunStatus::kDiverged;
      out.iterations = t + 1;
      const Vector r_last = y - op.apply(out.u * out.u.transpose());
      out.record.rows.push_back(make_row(t + 1, out.u, r_last,
                                         std::numeric_limits<double>::quiet_NaN(),
                                         std::numeric_limits<double>::quiet_NaN(), opts.truth));
      break;
    }
  }
  return out;
}

}  // namespace detail

// U_{t+1} = U_t - eta_t D_t with D_t = Q_t U_t from subgrad_l1.
template <SensingOperator Op>
RunResult subgd(const Op& op, const Vector& y, const Matrix& u0, const StepPolicy& policy,
                int iterations, const RunOptions& opts = {}) {
  return detail::descend(detail::Objective::kL1, op, y, u0, policy, iterations, opts);
}

// U_{t+1} = U_t - eta_t grad f_l2(U_t).
template <SensingOperator Op>
RunResult gd_l2(const Op& op, const Vector& y, const Matrix& u0, const StepPolicy& policy,
                int iterations, const RunOptions& opts = {}) {
  return detail::descend(detail::Objective::kL2, op, y, u0, policy, iterations, opts);
}

// ---------------------------------------------------------------------------
// Stationary points

enum class StationaryClass { kNearTruth, kNearOrigin, kOther };

inline std::string_view to_string(StationaryClass c) {
  switch (c) {
    case StationaryClass::kNearTruth:
      return "near_truth";
    case StationaryClass::kNearOrigin:
      return "near_origin";
    case StationaryClass::kOther:
      return "other";
  }
  return "unknown";
}

inline constexpr double kStationaryConstant = 2.0 * std::numbers::sqrt2;

// NearTruth if ||U U^T - X*||_F <= c_truth * delta, else NearOrigin if
// ||U||^2 <= c_origin * delta, else Other.
inline StationaryClass classify_stationary(const Matrix& u, const GroundTruth& truth, double delta,
                                           double c_truth = kStationaryConstant,
                                           double c_origin = kStationaryConstant) {
  if (truth.r_star != 1)
    throw UnsupportedError("stationary-point classification requires a rank-one ground truth");
  require(delta > 0.0, "delta must be positive");
  if (error_frobenius(u, truth) <= c_truth * delta) return StationaryClass::kNearTruth;
  const double op = spectral_norm(u);
  if (op * op <= c_origin * delta) return StationaryClass::kNearOrigin;
  return StationaryClass::kOther;
}

// ---------------------------------------------------------------------------
// CSV

namespace detail {

inline void write_number(std::ostream& os, double v) { os << format_double(v); }

}  // namespace detail

inline void RunRecord::write_csv(std::ostream& os, bool header) const {
  if (header) os << kCsvHeader << '\n';
  for (const IterationRow& r : rows) {
    os << r.t;
    for (double v : {r.eta, r.loss_l1, r.loss_l2, r.err_frob, r.signal_norm, r.error_norm,
                     r.error_frob, r.q_frob}) {
      os << ',';
      detail::write_number(os, v);
    }
    os << '\n';
  }
}

}  // namespace rsense

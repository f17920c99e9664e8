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

#include <gtest/gtest.h>

#include "generators.hpp"
#include "rsense/loss.hpp"

namespace rsense {
namespace {

using testing::Gen;
using testing::inner_loop;

struct Instance {
  MeasurementEnsemble ens;
  GroundTruth truth;
  NoiseVector noise;
  Vector y;
};

Instance make_instance(int d, int m, double p, std::uint64_t seed) {
  MeasurementEnsemble ens = gen_ensemble(d, m, derive_seed(seed, 1));
  GroundTruth truth = gen_ground_truth(d, 1, true, derive_seed(seed, 2));
  NoiseVector noise = gen_noise(m, NoiseSpec{p, NoiseDist::kGaussian, 3.0, derive_seed(seed, 3)});
  Vector y = measure(ens, truth, noise);
  return {std::move(ens), std::move(truth), std::move(noise), std::move(y)};
}

// Losses by explicit loops over the sensing matrices.
double loss_by_loop(const Instance& in, const Matrix& u, int q) {
  const Matrix x = u * u.transpose();
  double s = 0.0;
  for (int i = 0; i < in.ens.size(); ++i) {
    const double r = in.y(i) - inner_loop(in.ens.matrix(i), x);
    s += q == 1 ? std::abs(r) : r * r;
  }
  return s / (2.0 * static_cast<double>(in.ens.size()));
}

TEST(Residual, ExactFitIsZero) {
  const Instance in = make_instance(5, 40, 0.0, 1);
  EXPECT_LT(residual(in.y, in.ens, in.truth.factor).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(Residual, ZeroFactorGivesMeasurements) {
  const Instance in = make_instance(5, 40, 0.2, 2);
  EXPECT_EQ(residual(in.y, in.ens, Matrix::Zero(5, 3)), in.y);
}

TEST(Residual, Recomposition) {
  const Instance in = make_instance(4, 30, 0.3, 3);
  Gen g(3);
  const Matrix u = g.matrix(4, 2);
  const Vector expected = in.ens.apply(in.truth.x_star) + in.noise.s - in.ens.apply(u * u.transpose());
  EXPECT_LT((residual(in.y, in.ens, u) - expected).norm(), 1e-12);
}

TEST(Residual, ShapeMismatch) {
  const Instance in = make_instance(4, 30, 0.0, 4);
  EXPECT_THROW(residual(in.y, in.ens, Matrix::Zero(3, 1)), ShapeError);
  EXPECT_THROW(residual(Vector::Zero(29), in.ens, Matrix::Zero(4, 1)), ShapeError);
  EXPECT_THROW(loss_l1(in.y, in.ens, Matrix::Zero(5, 1)), ShapeError);
  EXPECT_THROW(grad_l2(in.y, in.ens, Matrix::Zero(5, 1)), ShapeError);
}

TEST(Loss, HandArithmetic) {
  Vector r(2);
  r << 1.0, -3.0;
  EXPECT_DOUBLE_EQ(loss_l1_from_residual(r), 1.0);
  EXPECT_DOUBLE_EQ(loss_l2_from_residual(r), 2.5);
  EXPECT_EQ(loss_l1_from_residual(Vector::Zero(4)), 0.0);
  EXPECT_EQ(loss_l2_from_residual(Vector::Zero(4)), 0.0);
}

TEST(Loss, MatchesLoopRecomputation) {
  const Instance in = make_instance(5, 50, 0.2, 5);
  Gen g(5);
  const Matrix u = g.matrix(5, 3);
  EXPECT_NEAR(loss_l1(in.y, in.ens, u), loss_by_loop(in, u, 1), 1e-12);
  EXPECT_NEAR(loss_l2(in.y, in.ens, u), loss_by_loop(in, u, 2), 1e-10);
}

TEST(Subgradient, AllPositiveResidualsForceNegativeWeights) {
  const MeasurementEnsemble ens = gen_ensemble(4, 20, 6);
  Gen g(6);
  const Matrix u = 0.01 * g.matrix(4, 2);
  const Vector base = ens.apply(u * u.transpose());
  const Vector y = base + Vector::Constant(20, 5.0);
  const SubgradientResult sg = subgrad_l1(y, ens, u);
  Matrix sum = Matrix::Zero(4, 4);
  for (int i = 0; i < 20; ++i) sum += ens.matrix(i);
  EXPECT_LT((sg.direction - (-1.0 / 20.0) * sum * u).norm(), 1e-12);
}

TEST(Subgradient, ZeroPointIsZeroUnderEveryConvention) {
  const MeasurementEnsemble ens = gen_ensemble(4, 20, 7);
  for (SignZero c : {SignZero::kZero, SignZero::kPlus, SignZero::kMinus}) {
    const SubgradientResult sg = subgrad_l1(Vector::Zero(20), ens, Matrix::Zero(4, 2), c);
    EXPECT_EQ(sg.direction, Matrix::Zero(4, 2));
  }
}

TEST(Subgradient, ConventionsDifferOnlyThroughZeroResiduals) {
  const MeasurementEnsemble ens = gen_ensemble(3, 10, 8);
  const SubgradientResult plus = subgrad_l1(Vector::Zero(10), ens, Matrix::Zero(3, 1), SignZero::kPlus);
  const SubgradientResult minus = subgrad_l1(Vector::Zero(10), ens, Matrix::Zero(3, 1), SignZero::kMinus);
  const SubgradientResult zero = subgrad_l1(Vector::Zero(10), ens, Matrix::Zero(3, 1), SignZero::kZero);
  EXPECT_LT((plus.q_matrix + minus.q_matrix).norm(), 1e-14);
  EXPECT_EQ(zero.q_frob, 0.0);
  EXPECT_GT(plus.q_frob, 0.0);
}

TEST(Subgradient, DirectionIsQTimesUAndQSymmetric) {
  Gen g(9);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = g.integer(1, 7), rp = g.integer(1, 4), m = g.integer(1, 80);
    const Instance in = make_instance(d, m, g.uniform(0, 1), g.seed());
    const Matrix u = g.matrix(d, rp);
    const SubgradientResult sg = subgrad_l1(in.y, in.ens, u);
    EXPECT_LT((sg.direction - sg.q_matrix * u).norm(), 1e-12);
    EXPECT_LT((sg.q_matrix - sg.q_matrix.transpose()).norm(), 1e-12);
    EXPECT_NEAR(sg.q_frob, sg.q_matrix.norm(), 1e-15);
  }
}

// One-sided finite differences of f_l1 against <D, V>.
TEST(Subgradient, FiniteDifferenceAgreement) {
  const Instance in = make_instance(4, 60, 0.2, 10);
  Gen g(10);
  const Matrix u = g.matrix(4, 2);
  ASSERT_GT(residual(in.y, in.ens, u).cwiseAbs().minCoeff(), 1e-6);
  const SubgradientResult sg = subgrad_l1(in.y, in.ens, u);
  const double h = 1e-7;
  const double f0 = loss_l1(in.y, in.ens, u);
  for (int k = 0; k < 20; ++k) {
    const Matrix v = g.matrix(4, 2);
    const double fd = (loss_l1(in.y, in.ens, u + h * v) - f0) / h;
    EXPECT_NEAR(fd, (sg.direction.array() * v.array()).sum(), 1e-5);
  }
}

TEST(Subgradient, PropertyFiniteDifferenceAwayFromKinks) {
  Gen g(11);
  int checked = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int d = g.integer(2, 6), rp = g.integer(1, 3), m = g.integer(10, 80);
    const Instance in = make_instance(d, m, g.uniform(0, 0.5), g.seed());
    const Matrix u = g.matrix(d, rp);
    if (residual(in.y, in.ens, u).cwiseAbs().minCoeff() < 1e-4) continue;
    ++checked;
    const SubgradientResult sg = subgrad_l1(in.y, in.ens, u);
    const double h = 1e-7;
    const double f0 = loss_l1(in.y, in.ens, u);
    for (int k = 0; k < 20; ++k) {
      const Matrix v = g.matrix(d, rp);
      const double fd = (loss_l1(in.y, in.ens, u + h * v) - f0) / h;
      EXPECT_NEAR(fd, (sg.direction.array() * v.array()).sum(), 1e-5);
    }
  }
  EXPECT_GE(checked, 40);
}

TEST(Subgradient, WeightsInvariantUnderJointScaling) {
  Gen g(12);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = g.integer(2, 6), m = g.integer(5, 60);
    const Instance in = make_instance(d, m, 0.3, g.seed());
    const Matrix u = g.matrix(d, 2);
    const double c = g.uniform(0.01, 100.0);
    const Vector w1 = sign_weights(residual(in.y, in.ens, u), SignZero::kZero);
    const Vector w2 = sign_weights(residual(c * in.y, in.ens, std::sqrt(c) * u), SignZero::kZero);
    EXPECT_EQ(w1, w2);
  }
}

TEST(GradL2, ExactFitAndZeroFactor) {
  const Instance in = make_instance(5, 40, 0.0, 13);
  EXPECT_LT(grad_l2(in.y, in.ens, in.truth.factor).norm(), 1e-12);
  EXPECT_EQ(grad_l2(in.y, in.ens, Matrix::Zero(5, 2)), Matrix::Zero(5, 2));
}

TEST(GradL2, CentralDifferences) {
  Gen g(14);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = g.integer(2, 6), rp = g.integer(1, 3), m = g.integer(10, 80);
    const Instance in = make_instance(d, m, 0.2, g.seed());
    const Matrix u = g.matrix(d, rp);
    const Matrix grad = grad_l2(in.y, in.ens, u);
    const double h = 1e-5;
    for (int k = 0; k < 5; ++k) {
      const Matrix v = g.matrix(d, rp);
      const double fd = (loss_l2(in.y, in.ens, u + h * v) - loss_l2(in.y, in.ens, u - h * v)) / (2 * h);
      const double an = (grad.array() * v.array()).sum();
      EXPECT_NEAR(fd, an, 1e-6 * (1.0 + std::abs(an)));
    }
  }
}

TEST(FrNorm, FullRankIsFrobenius) {
  Gen g(15);
  for (int k = 0; k < 20; ++k) {
    const Matrix m = g.matrix(6, 6);
    EXPECT_NEAR(f_r_norm(m, 6), m.norm(), 1e-10);
  }
}

TEST(FrNorm, DiagonalExample) {
  Matrix m = Matrix::Zero(3, 3);
  m(0, 0) = 3.0;
  EXPECT_NEAR(f_r_norm(m, 1), 3.0, 1e-14);
}

TEST(FrNorm, RankOutOfRange) {
  EXPECT_THROW(f_r_norm(Matrix::Identity(3, 3), 0), ParameterError);
  EXPECT_THROW(f_r_norm(Matrix::Identity(3, 3), 4), ParameterError);
}

Matrix orthonormal_basis(const Matrix& a) {
  Eigen::HouseholderQR<Matrix> qr(a);
  return qr.householderQ() * Matrix::Identity(a.rows(), a.cols());
}

// Sampled variational lower bound, then subspace iteration from the best
// sample as an upper check.
TEST(FrNorm, VariationalOracle) {
  Gen g(16);
  const Matrix m = g.matrix(6, 6);
  const int r = 2;
  double best = -1.0;
  Matrix best_right;
  for (int k = 0; k < 10000; ++k) {
    const Matrix left = g.matrix(6, r), right = g.matrix(6, r);
    Matrix y = left * right.transpose();
    y /= y.norm();
    const double v = (m.array() * y.array()).sum();
    if (v > best) {
      best = v;
      best_right = right;
    }
  }
  const double exact = f_r_norm(m, r);
  EXPECT_GE(exact, best);
  Matrix v = orthonormal_basis(best_right);
  Matrix u;
  for (int it = 0; it < 500; ++it) {
    u = orthonormal_basis(m * v);
    v = orthonormal_basis(m.transpose() * u);
  }
  const double refined = (u * u.transpose() * m * v * v.transpose()).norm();
  EXPECT_LE(exact, refined + 1e-2);
  EXPECT_NEAR(exact, refined, 1e-8);
}

TEST(FrNorm, PropertyMonotoneAndOperatorNormAtOne) {
  Gen g(17);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = g.integer(1, 9);
    const Matrix a = g.matrix(d, d);
    const Matrix psd = a * a.transpose();
    double prev = 0.0;
    for (int r = 1; r <= d; ++r) {
      const double v = f_r_norm(a, r);
      EXPECT_GE(v, prev - 1e-12);
      prev = v;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(psd);
    EXPECT_NEAR(f_r_norm(psd, 1), es.eigenvalues().maxCoeff(), 1e-9 * (1.0 + es.eigenvalues().maxCoeff()));
  }
}

}  // namespace
}  // namespace rsense

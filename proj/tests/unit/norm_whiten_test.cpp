// Copyright 2026 The AMS Authors. All Rights Reserved.
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

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "ams/errors.hpp"
#include "ams/grad_check.hpp"
#include "ams/group_whiten.hpp"
#include "ams/instance_norm.hpp"
#include "test_util.hpp"

namespace ams {
namespace {

using test::random_tensor;

TEST(InstanceNorm, ConstantInputGivesZero) {
  const Tensor4 x(Shape4{2, 3, 4, 4}, 5.0);
  const auto r = instance_norm(x, InParams::identity(3));
  for (double v : r.output.values()) EXPECT_EQ(v, 0.0);
  for (double s : r.stats.std) EXPECT_EQ(s, 0.0);
}

TEST(InstanceNorm, InverseAffineReconstructsInput) {
  std::mt19937_64 rng(1);
  const Tensor4 x = random_tensor(Shape4{1, 4, 3, 5}, rng);
  InParams p = InParams::identity(4);
  const auto stats = instance_norm(x, p).stats;
  for (std::size_t c = 0; c < 4; ++c) {
    p.gamma[c] = stats.std[c] + p.epsilon;
    p.beta[c] = stats.mean[c];
  }
  const auto r = instance_norm(x, p);
  EXPECT_LT(test::max_abs_diff(r.output, x), 1e-14);
}

TEST(InstanceNorm, SmallExampleMatchesHighPrecisionValues) {
  const Tensor4 x(Shape4{1, 1, 1, 4}, {1, 2, 3, 4});
  const auto r = instance_norm(x, InParams::identity(1, 1e-5));
  EXPECT_DOUBLE_EQ(r.stats.mean[0], 2.5);
  EXPECT_NEAR(r.stats.std[0], std::sqrt(1.25), 1e-15);
  // Evaluated independently at 30 significant digits.
  const double expected[] = {-1.34162878660720412, -0.447209595535734707, 0.447209595535734707,
                             1.34162878660720412};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(r.output[i], expected[i], 1e-14);
}

TEST(InstanceNorm, OutputStatisticsAreStandardised) {
  std::mt19937_64 rng(2);
  const Tensor4 x = random_tensor(Shape4{4, 8, 6, 6}, rng, -3.0, 3.0);
  const auto r = instance_norm(x, InParams::identity(8));
  const auto out = instance_norm(r.output, InParams::identity(8)).stats;
  for (std::size_t i = 0; i < out.mean.size(); ++i) {
    const double sigma = r.stats.std[i];
    EXPECT_LT(std::abs(out.mean[i]), 1e-6);
    EXPECT_LT(std::abs(out.std[i] - sigma / (sigma + 1e-5)), 1e-6);
    ASSERT_GE(sigma, 0.1);
    EXPECT_LT(std::abs(out.std[i] - 1.0), 1e-3);
  }
}

TEST(InstanceNorm, RemovesPerChannelAffineStyle) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> gain(0.5, 2.0), shift(-1.0, 1.0);
  const Tensor4 x = random_tensor(Shape4{3, 4, 5, 5}, rng);
  Tensor4 styled = x.clone_values();
  std::vector<double> a(12), d(12);
  for (std::size_t bc = 0; bc < 12; ++bc) {
    a[bc] = gain(rng);
    d[bc] = shift(rng);
    for (std::size_t i = 0; i < 25; ++i) styled[bc * 25 + i] = a[bc] * x[bc * 25 + i] + d[bc];
  }
  // Vanishing epsilon: exact invariance up to rounding.
  const auto p_small = InParams::identity(4, 1e-8);
  EXPECT_LT(test::max_abs_diff(instance_norm(x, p_small).output, instance_norm(styled, p_small).output), 1e-6);

  // Default epsilon: the deviation is exactly the epsilon term of the denominator.
  const auto p = InParams::identity(4, 1e-5);
  const auto base = instance_norm(x, p);
  const auto moved = instance_norm(styled, p);
  for (std::size_t bc = 0; bc < 12; ++bc) {
    const double s = base.stats.std[bc];
    for (std::size_t i = 0; i < 25; ++i) {
      const double centred = x[bc * 25 + i] - base.stats.mean[bc];
      const double predicted = centred * (a[bc] / (a[bc] * s + p.epsilon) - 1.0 / (s + p.epsilon));
      EXPECT_NEAR(moved.output[bc * 25 + i] - base.output[bc * 25 + i], predicted, 1e-12);
    }
  }
}

TEST(InstanceNorm, GradientsPassFiniteDifferenceCheck) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 3; ++trial) {
    const Tensor4 x = random_tensor(Shape4{2, 3, 3, 4}, rng);
    const Tensor4 w = random_tensor(x.shape(), rng);
    InParams p = InParams::identity(3);
    p.gamma = random_tensor(p.gamma.shape(), rng, 0.5, 1.5);
    p.beta = random_tensor(p.beta.shape(), rng);
    auto fx = [&](const Tensor4& a, Tensor4* grad) {
      const auto r = instance_norm(a, p);
      if (grad) *grad = instance_norm_backward(a, p, r.stats, w);
      return weighted_sum(r.output, w);
    };
    EXPECT_LT(grad_check(fx, x), 1e-4);
    auto fg = [&](const Tensor4& g, Tensor4* grad) {
      InParams q{g.clone_values(), p.beta.clone_values(), p.epsilon};
      const auto r = instance_norm(x, q);
      if (grad) {
        instance_norm_backward(x, q, r.stats, w);
        *grad = q.gamma.take_grad();
      }
      return weighted_sum(r.output, w);
    };
    EXPECT_LT(grad_check(fg, p.gamma), 1e-4);
    auto fb = [&](const Tensor4& b, Tensor4* grad) {
      InParams q{p.gamma.clone_values(), b.clone_values(), p.epsilon};
      const auto r = instance_norm(x, q);
      if (grad) {
        instance_norm_backward(x, q, r.stats, w);
        *grad = q.beta.take_grad();
      }
      return weighted_sum(r.output, w);
    };
    EXPECT_LT(grad_check(fb, p.beta), 1e-4);
  }
}

TEST(InstanceNorm, RejectsBadParameters) {
  const Tensor4 x(Shape4{1, 2, 2, 2}, 1.0);
  EXPECT_THROW(instance_norm(x, InParams::identity(3)), ConfigError);
  InParams p = InParams::identity(2);
  p.epsilon = 0.0;
  EXPECT_THROW(instance_norm(x, p), ConfigError);
}

TEST(GroupPartition, ViewDimensionsAndIndexing) {
  std::mt19937_64 rng(5);
  const Tensor4 x = random_tensor(Shape4{2, 64, 4, 8}, rng);
  const GroupView v = group_partition(x, 16);
  EXPECT_EQ(v.batch, 2u);
  EXPECT_EQ(v.groups, 16u);
  EXPECT_EQ(v.columns, 128u);
  const std::size_t c = 4, hw = 32, W = 8;
  for (std::size_t b = 0; b < 2; ++b)
    for (std::size_t j = 0; j < 16; ++j)
      for (std::size_t i = 0; i < 128; ++i)
        ASSERT_EQ(v.sample(b)(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)),
                  x.at(b, j * c + i / hw, (i % hw) / W, i % W));

  const GroupView per_channel = group_partition(x, 64);
  EXPECT_EQ(per_channel.columns, 32u);
  const GroupView single = group_partition(x, 1);
  EXPECT_EQ(single.groups, 1u);
  EXPECT_EQ(single.columns, 64u * 32u);
}

TEST(GroupPartition, NonDivisorIsConfigError) {
  const Tensor4 x(Shape4{1, 6, 2, 2});
  try {
    group_partition(x, 4);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("g=4"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("C=6"), std::string::npos);
  }
}

TEST(GroupMerge, RoundTripIsBitExact) {
  std::mt19937_64 rng(6);
  const Tensor4 x = random_tensor(Shape4{3, 8, 2, 2}, rng);
  for (std::size_t g : {1u, 2u, 4u, 8u}) {
    const Tensor4 back = group_merge(group_partition(x, g), x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) ASSERT_EQ(back[i], x[i]);
  }
  const Tensor4 zero(Shape4{2, 4, 3, 3});
  const Tensor4 zero_back = group_merge(group_partition(zero, 2), zero.shape());
  for (double v : zero_back.values()) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(group_merge(group_partition(x, 4), Shape4{3, 8, 1, 2}), ShapeError);
  EXPECT_THROW(group_merge(group_partition(x, 4), Shape4{2, 8, 2, 2}), ShapeError);
}

MatrixBatch single(const RowMatrix& a) {
  MatrixBatch m(1, static_cast<std::size_t>(a.rows()));
  m.slice(0) = a;
  return m;
}

ConstRowMatrixMap first(const MatrixBatch& m) { return m.slice(0); }

TEST(InverseSqrt, DiagonalAndIdentity) {
  RowMatrix d = RowMatrix::Zero(2, 2);
  d(0, 0) = 2.0;
  d(1, 1) = 8.0;
  for (auto mode : {WhitenMode::eigen_exact, WhitenMode::newton_schulz}) {
    WhitenConfig cfg;
    cfg.mode = mode;
    cfg.ns_iterations = 15;
    const MatrixBatch r = inverse_sqrt(single(d), cfg);
    EXPECT_NEAR(r.slice(0)(0, 0), 1.0 / std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(r.slice(0)(1, 1), 1.0 / (2.0 * std::sqrt(2.0)), 1e-12);
    EXPECT_NEAR(r.slice(0)(0, 1), 0.0, 1e-12);
    const MatrixBatch eye = inverse_sqrt(single(RowMatrix::Identity(5, 5)), cfg);
    EXPECT_LT((eye.slice(0) - RowMatrix::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(InverseSqrt, EigenRouteOnRandomSpd) {
  std::mt19937_64 rng(7);
  WhitenConfig cfg;
  cfg.mode = WhitenMode::eigen_exact;
  for (int trial = 0; trial < 20; ++trial) {
    const RowMatrix a = test::random_spd(4, 50.0, rng);
    const MatrixBatch r = inverse_sqrt(single(a), cfg);
    EXPECT_LT(whitening_residual(first(r), first(single(a))), 1e-8);
    EXPECT_LT((r.slice(0) - r.slice(0).transpose()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(InverseSqrt, NewtonSchulzConvergence) {
  std::mt19937_64 rng(8);
  WhitenConfig seven;
  WhitenConfig fifteen;
  fifteen.ns_iterations = 15;
  fifteen.residual_tolerance = 1e-6;
  for (int trial = 0; trial < 20; ++trial) {
    // Seven iterations are enough for mild conditioning.
    const RowMatrix mild = test::random_spd(16, 10.0, rng);
    EXPECT_LT(whitening_residual(first(inverse_sqrt(single(mild), seven)), first(single(mild))), 5e-2);
    // Condition numbers up to 1e3 need more steps.
    const RowMatrix hard = test::random_spd(8, 1e3, rng);
    EXPECT_LT(whitening_residual(first(inverse_sqrt(single(hard), fifteen)), first(single(hard))), 1e-6);
  }
}

TEST(InverseSqrt, FailedConvergenceCarriesResidual) {
  std::mt19937_64 rng(9);
  const RowMatrix hard = test::random_spd(8, 1e3, rng);
  WhitenConfig cfg;  // 7 iterations, tolerance 5e-2
  try {
    inverse_sqrt(single(hard), cfg);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    ASSERT_TRUE(e.residual().has_value());
    EXPECT_GT(*e.residual(), cfg.residual_tolerance);
  }
  RowMatrix bad = RowMatrix::Identity(3, 3);
  bad(1, 2) = std::nan("");
  bad(2, 1) = std::nan("");
  EXPECT_THROW(inverse_sqrt(single(bad), cfg), NumericalError);
  RowMatrix asym = RowMatrix::Identity(3, 3);
  asym(0, 1) = 0.5;
  EXPECT_THROW(inverse_sqrt(single(asym), cfg), InputError);
}

TEST(InverseSqrt, NewtonSchulzBackwardMatchesFiniteDifferences) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 3; ++trial) {
    const RowMatrix a = test::random_spd(4, 5.0, rng);
    const RowMatrix w = test::random_matrix(4, 4, rng);
    Tensor4 x(Shape4{1, 1, 4, 4});
    for (int i = 0; i < 16; ++i) x[static_cast<std::size_t>(i)] = a(i / 4, i % 4);
    auto f = [&](const Tensor4& t, Tensor4* grad) {
      MatrixBatch m(1, 4);
      for (int i = 0; i < 16; ++i) m.slice(0)(i / 4, i % 4) = t[static_cast<std::size_t>(i)];
      WhitenConfig cfg;
      cfg.residual_tolerance = 1e9;
      // Asymmetric probes are evaluated through the raw iteration.
      const RowMatrix am = m.slice(0);
      RowMatrix y = am / am.trace(), z = RowMatrix::Identity(4, 4);
      for (int k = 0; k < cfg.ns_iterations; ++k) {
        const RowMatrix tt = 0.5 * (3.0 * RowMatrix::Identity(4, 4) - z * y);
        y = (y * tt).eval();
        z = (tt * z).eval();
      }
      const RowMatrix r = z / std::sqrt(am.trace());
      if (grad) {
        const RowMatrix g = newton_schulz_backward(first(m), w, cfg.ns_iterations);
        *grad = Tensor4(t.shape());
        for (int i = 0; i < 16; ++i) (*grad)[static_cast<std::size_t>(i)] = g(i / 4, i % 4);
      }
      return r.cwiseProduct(w).sum();
    };
    EXPECT_LT(grad_check(f, x), 1e-6);
  }
}

// Sample covariance (1/m, no ridge) of each sample's group rows.
std::vector<RowMatrix> group_covariances(const Tensor4& y, std::size_t g) {
  const GroupView v = group_partition(y, g);
  std::vector<RowMatrix> out;
  for (std::size_t b = 0; b < v.batch; ++b) {
    RowMatrix rows = v.sample(b);
    const Eigen::VectorXd mu = rows.rowwise().mean();
    rows.colwise() -= mu;
    out.push_back(rows * rows.transpose() / static_cast<double>(v.columns));
  }
  return out;
}

TEST(GroupWhiten, AlreadyWhiteInputIsNearlyUnchanged) {
  // Rows of a 16x16 Sylvester-Hadamard matrix (skipping the all-ones row)
  // are zero-mean, orthogonal and have unit variance.
  RowMatrix h(1, 1);
  h(0, 0) = 1.0;
  while (h.rows() < 16) {
    RowMatrix next(2 * h.rows(), 2 * h.cols());
    next << h, h, h, -h;
    h = next;
  }
  const std::size_t g = 4;
  Tensor4 x(Shape4{1, 4, 4, 4});
  for (std::size_t j = 0; j < g; ++j)
    for (std::size_t i = 0; i < 16; ++i) x[j * 16 + i] = h(static_cast<Eigen::Index>(j + 1), static_cast<Eigen::Index>(i));
  WhitenConfig cfg;
  cfg.group_count = g;
  cfg.mode = WhitenMode::eigen_exact;
  const auto r = group_whiten(x, cfg);
  EXPECT_LT(test::max_abs_diff(r.output, x), 2.0 * cfg.epsilon);
}

TEST(GroupWhiten, IdenticalGroupsStayFiniteAndMatchEigenOracle) {
  std::mt19937_64 rng(11);
  const Tensor4 half = random_tensor(Shape4{1, 1, 4, 4}, rng);
  Tensor4 x(Shape4{1, 2, 4, 4});
  for (std::size_t i = 0; i < 16; ++i) x[i] = x[16 + i] = half[i];
  WhitenConfig cfg;
  cfg.group_count = 2;
  cfg.mode = WhitenMode::eigen_exact;
  const auto r = group_whiten(x, cfg);
  ASSERT_TRUE(r.output.all_finite());
  // Sigma = v [[1,1],[1,1]] + eps I has eigenvectors (1,1)/sqrt2, (1,-1)/sqrt2
  // with eigenvalues 2v + eps and eps; identical rows lie on the first one.
  double mean = 0.0, var = 0.0;
  for (std::size_t i = 0; i < 16; ++i) mean += half[i] / 16.0;
  for (std::size_t i = 0; i < 16; ++i) var += (half[i] - mean) * (half[i] - mean) / 16.0;
  const double scale = 1.0 / std::sqrt(2.0 * var + cfg.epsilon);
  for (std::size_t i = 0; i < 16; ++i) {
    EXPECT_NEAR(r.output[i], scale * (half[i] - mean), 1e-10);
    EXPECT_NEAR(r.output[16 + i], scale * (half[i] - mean), 1e-10);
  }
}

TEST(GroupWhiten, OutputCovarianceIsIdentity) {
  std::mt19937_64 rng(12);
  // 1024 columns per group keep the sample covariance close to (1/3) I.
  const Tensor4 x = random_tensor(Shape4{2, 32, 16, 16}, rng);
  for (auto mode : {WhitenMode::eigen_exact, WhitenMode::newton_schulz}) {
    WhitenConfig cfg;
    cfg.mode = mode;
    const auto r = group_whiten(x, cfg);
    const double tol = mode == WhitenMode::eigen_exact ? 1e-2 : 5e-2;
    for (const RowMatrix& cov : group_covariances(r.output, cfg.group_count)) {
      EXPECT_LT((cov - RowMatrix::Identity(8, 8)).cwiseAbs().maxCoeff(), tol);
    }
  }
}

TEST(GroupWhiten, InvariantToGroupMixing) {
  std::mt19937_64 rng(13);
  const std::size_t g = 4;
  const Tensor4 x = random_tensor(Shape4{2, 8, 4, 4}, rng);
  GroupView v = group_partition(x, g);
  for (std::size_t b = 0; b < v.batch; ++b) {
    const RowMatrix mix = test::random_spd(4, 20.0, rng) + test::random_matrix(4, 4, rng) * 0.3;
    const RowMatrix mixed = mix * v.sample(b);
    v.sample(b) = mixed;
  }
  const Tensor4 mixed = group_merge(v, x.shape());
  WhitenConfig cfg;
  cfg.group_count = g;
  cfg.mode = WhitenMode::eigen_exact;
  cfg.epsilon = 1e-8;
  for (const RowMatrix& cov : group_covariances(group_whiten(mixed, cfg).output, g)) {
    EXPECT_LT((cov - RowMatrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(GroupWhiten, SamplesAreIndependent) {
  std::mt19937_64 rng(14);
  const Tensor4 x = random_tensor(Shape4{3, 8, 3, 3}, rng);
  Tensor4 permuted(x.shape());
  const std::size_t per = 8 * 9;
  const std::size_t order[] = {2, 0, 1};
  for (std::size_t b = 0; b < 3; ++b)
    for (std::size_t i = 0; i < per; ++i) permuted[b * per + i] = x[order[b] * per + i];
  WhitenConfig cfg;
  cfg.group_count = 4;
  const Tensor4 y = group_whiten(x, cfg).output;
  const Tensor4 yp = group_whiten(permuted, cfg).output;
  for (std::size_t b = 0; b < 3; ++b)
    for (std::size_t i = 0; i < per; ++i) ASSERT_EQ(yp[b * per + i], y[order[b] * per + i]);
}

TEST(GroupWhiten, NewtonSchulzGradientPassesCheck) {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 3; ++trial) {
    const Tensor4 x = random_tensor(Shape4{2, 8, 2, 3}, rng);
    const Tensor4 w = random_tensor(x.shape(), rng);
    WhitenConfig cfg;
    cfg.group_count = 4;
    auto f = [&](const Tensor4& a, Tensor4* grad) {
      const auto r = group_whiten(a, cfg);
      if (grad) *grad = group_whiten_backward(a, cfg, r.stats, w);
      return weighted_sum(r.output, w);
    };
    EXPECT_LT(grad_check(f, x), 1e-4);
  }
}

TEST(GroupWhiten, PreconditionErrors) {
  WhitenConfig cfg;
  cfg.group_count = 3;
  EXPECT_THROW(group_whiten(Tensor4(Shape4{1, 8, 2, 2}), cfg), ConfigError);
  cfg.group_count = 4;
  EXPECT_THROW(group_whiten(Tensor4(Shape4{1, 4, 1, 1}), cfg), ShapeError);
}

}  // namespace
}  // namespace ams

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

#include "ams/errors.hpp"
#include "ams/grad_check.hpp"
#include "ams/instance_norm.hpp"
#include "ams/ops.hpp"
#include "test_util.hpp"

namespace ams {
namespace {

using test::random_tensor;

TEST(Tensor4, ShapeAndGradBuffer) {
  Tensor4 t(Shape4{2, 3, 4, 5}, 1.5);
  EXPECT_EQ(t.size(), 120u);
  EXPECT_FALSE(t.has_grad());
  t.grad()[7] = 2.0;
  EXPECT_TRUE(t.has_grad());
  EXPECT_EQ(t.grad().size(), t.size());
  Tensor4 g = t.take_grad();
  EXPECT_EQ(g.shape(), t.shape());
  EXPECT_EQ(g[7], 2.0);
  EXPECT_FALSE(t.has_grad());
  EXPECT_THROW(Tensor4(Shape4{1, 1, 2, 2}, std::vector<double>{1, 2, 3}), ShapeError);
}

TEST(Elementwise, AddSigmoidAndBroadcast) {
  const Tensor4 a(Shape4{1, 1, 1, 2}, {1, 2});
  const Tensor4 b(Shape4{1, 1, 1, 2}, {3, 4});
  const Tensor4 sum = elementwise(ElementwiseOp::add, a, b);
  EXPECT_EQ(sum[0], 4.0);
  EXPECT_EQ(sum[1], 6.0);
  EXPECT_EQ(elementwise(ElementwiseOp::sigmoid, Tensor4(Shape4{1, 1, 1, 1}, 0.0))[0], 0.5);

  std::mt19937_64 rng(3);
  Tensor4 x = random_tensor(Shape4{2, 3, 2, 2}, rng);
  Tensor4 ones(Shape4{1, 3, 1, 1}, 1.0);
  const Tensor4 y = elementwise(ElementwiseOp::mul, x, ones);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(y[i], x[i]);

  // The all-ones mask passes the gradient through unchanged.
  Tensor4 dout = random_tensor(x.shape(), rng);
  elementwise_backward(ElementwiseOp::mul, x, ones, dout);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(x.grad()[i], dout[i]);

  Tensor4 per_position(Shape4{2, 1, 2, 2}, 2.0);
  EXPECT_NO_THROW(elementwise(ElementwiseOp::sub, x, per_position));
  EXPECT_THROW(elementwise(ElementwiseOp::add, x, Tensor4(Shape4{2, 3, 1, 1})), ShapeError);
}

TEST(Elementwise, BackwardMatchesFiniteDifferences) {
  std::mt19937_64 rng(5);
  const Tensor4 b_full = random_tensor(Shape4{2, 3, 2, 3}, rng);
  const Tensor4 b_chan = random_tensor(Shape4{1, 3, 1, 1}, rng);
  const Tensor4 b_pos = random_tensor(Shape4{2, 1, 2, 3}, rng);
  const Tensor4 w = random_tensor(b_full.shape(), rng);
  for (auto op : {ElementwiseOp::add, ElementwiseOp::sub, ElementwiseOp::mul}) {
    for (const Tensor4* b : {&b_full, &b_chan, &b_pos}) {
      for (int trial = 0; trial < 3; ++trial) {
        const Tensor4 x = random_tensor(b_full.shape(), rng);
        // With respect to the left operand.
        auto fa = [&](const Tensor4& a, Tensor4* grad) {
          Tensor4 lhs = a.clone_values();
          Tensor4 rhs = b->clone_values();
          const double v = weighted_sum(elementwise(op, lhs, rhs), w);
          if (grad) {
            elementwise_backward(op, lhs, rhs, w);
            *grad = lhs.take_grad();
          }
          return v;
        };
        EXPECT_LT(grad_check(fa, x), 1e-8);
        // With respect to the (possibly broadcast) right operand.
        auto fb = [&](const Tensor4& bb, Tensor4* grad) {
          Tensor4 lhs = x.clone_values();
          Tensor4 rhs = bb.clone_values();
          const double v = weighted_sum(elementwise(op, lhs, rhs), w);
          if (grad) {
            elementwise_backward(op, lhs, rhs, w);
            *grad = rhs.take_grad();
          }
          return v;
        };
        EXPECT_LT(grad_check(fb, *b), 1e-8);
      }
    }
  }
  for (auto op : {ElementwiseOp::sigmoid, ElementwiseOp::relu, ElementwiseOp::scale}) {
    const Tensor4 x = random_tensor(b_full.shape(), rng);
    auto f = [&](const Tensor4& a, Tensor4* grad) {
      Tensor4 in = a.clone_values();
      const double v = weighted_sum(elementwise(op, in, 1.7), w);
      if (grad) {
        elementwise_backward(op, in, 1.7, w);
        *grad = in.take_grad();
      }
      return v;
    };
    EXPECT_LT(grad_check(f, x), 1e-8);
  }
}

TEST(Reduce, MeanAndMaxValues) {
  const Tensor4 x(Shape4{1, 1, 2, 2}, {1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(reduce(ReduceOp::mean, x, kAxisH | kAxisW)[0], 2.5);
  const Tensor4 c(Shape4{1, 3, 1, 1}, {-1, 7, 3});
  const Tensor4 m = reduce(ReduceOp::max, c, kAxisC);
  EXPECT_EQ(m.shape(), (Shape4{1, 1, 1, 1}));
  EXPECT_EQ(m[0], 7.0);
  const Tensor4 k(Shape4{2, 3, 2, 2}, 4.25);
  EXPECT_DOUBLE_EQ(reduce(ReduceOp::mean, k, kAxisB | kAxisC | kAxisH | kAxisW)[0], 4.25);
  EXPECT_THROW(reduce(ReduceOp::mean, x, 0u), ShapeError);
  EXPECT_THROW(reduce(ReduceOp::mean, Tensor4(Shape4{1, 0, 2, 2}), kAxisC), ShapeError);
}

TEST(Reduce, MaxBackwardRoutesToFirstArgmax) {
  Tensor4 x(Shape4{1, 4, 1, 1}, {2, 5, 5, 1});
  reduce_backward(ReduceOp::max, x, kAxisC, Tensor4(Shape4{1, 1, 1, 1}, 1.0));
  EXPECT_EQ(x.grad()[0], 0.0);
  EXPECT_EQ(x.grad()[1], 1.0);
  EXPECT_EQ(x.grad()[2], 0.0);
  EXPECT_EQ(x.grad()[3], 0.0);
}

TEST(Reduce, BackwardMatchesFiniteDifferences) {
  std::mt19937_64 rng(11);
  for (unsigned axes : {unsigned{kAxisH | kAxisW}, unsigned{kAxisC}, unsigned{kAxisB | kAxisW}}) {
    for (auto op : {ReduceOp::mean, ReduceOp::max}) {
      for (int trial = 0; trial < 3; ++trial) {
        const Tensor4 x = random_tensor(Shape4{2, 3, 3, 2}, rng);
        const Tensor4 w = random_tensor(reduce(op, x, axes).shape(), rng);
        auto f = [&](const Tensor4& a, Tensor4* grad) {
          Tensor4 in = a.clone_values();
          const double v = weighted_sum(reduce(op, in, axes), w);
          if (grad) {
            reduce_backward(op, in, axes, w);
            *grad = in.take_grad();
          }
          return v;
        };
        EXPECT_LT(grad_check(f, x), 1e-6);
      }
    }
  }
}

// Direct nested-loop convolution used as the oracle.
Tensor4 conv_oracle(const Tensor4& x, const Tensor4& k) {
  const Shape4 s = x.shape();
  const Shape4 ks = k.shape();
  const long pad = static_cast<long>(ks.h / 2);
  Tensor4 out(Shape4{s.b, ks.b, s.h, s.w});
  for (std::size_t n = 0; n < s.b; ++n)
    for (std::size_t o = 0; o < ks.b; ++o)
      for (long h = 0; h < static_cast<long>(s.h); ++h)
        for (long w = 0; w < static_cast<long>(s.w); ++w) {
          double acc = 0.0;
          for (std::size_t c = 0; c < s.c; ++c)
            for (long ky = 0; ky < static_cast<long>(ks.h); ++ky)
              for (long kx = 0; kx < static_cast<long>(ks.w); ++kx) {
                const long ih = h + ky - pad, iw = w + kx - pad;
                if (ih < 0 || iw < 0 || ih >= static_cast<long>(s.h) || iw >= static_cast<long>(s.w)) continue;
                acc += x.at(n, c, ih, iw) * k.at(o, c, ky, kx);
              }
          out.at(n, o, h, w) = acc;
        }
  return out;
}

TEST(Conv2d, IdentityKernel) {
  std::mt19937_64 rng(2);
  const Tensor4 x = random_tensor(Shape4{2, 1, 4, 3}, rng);
  const Tensor4 y = conv2d(x, Tensor4(Shape4{1, 1, 1, 1}, 1.0));
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(y[i], x[i]);
}

TEST(Conv2d, AveragingKernelOnConstantInput) {
  const double c = 3.0;
  const Tensor4 x(Shape4{1, 1, 5, 4}, c);
  const Tensor4 k(Shape4{1, 1, 3, 3}, 1.0 / 9.0);
  const Tensor4 y = conv2d(x, k);
  const Tensor4 ref = conv_oracle(x, k);
  EXPECT_LT(test::max_abs_diff(y, ref), 1e-12);
  EXPECT_NEAR(y.at(0, 0, 2, 2), c, 1e-12);
  EXPECT_NEAR(y.at(0, 0, 0, 0), c * 4.0 / 9.0, 1e-12);
  EXPECT_NEAR(y.at(0, 0, 0, 1), c * 6.0 / 9.0, 1e-12);
  EXPECT_LT(y.at(0, 0, 4, 3), c);
}

TEST(Conv2d, MatchesLoopOracle) {
  std::mt19937_64 rng(9);
  for (std::size_t k : {1u, 3u, 5u}) {
    const Tensor4 x = random_tensor(Shape4{2, 3, 5, 4}, rng);
    const Tensor4 kernel = random_tensor(Shape4{4, 3, k, k}, rng);
    EXPECT_LT(test::max_abs_diff(conv2d(x, kernel), conv_oracle(x, kernel)), 1e-12);
  }
  EXPECT_THROW(conv2d(random_tensor(Shape4{1, 2, 3, 3}, rng), Tensor4(Shape4{1, 3, 3, 3})), ShapeError);
}

TEST(Conv2d, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 3; ++trial) {
    const Tensor4 x = random_tensor(Shape4{2, 2, 4, 3}, rng);
    const Tensor4 kernel = random_tensor(Shape4{3, 2, 3, 3}, rng);
    // Scalar sum of the output with respect to the kernel.
    auto fk = [&](const Tensor4& k, Tensor4* grad) {
      Tensor4 in = x.clone_values();
      Tensor4 kk = k.clone_values();
      const Tensor4 y = conv2d(in, kk);
      double s = 0.0;
      for (double v : y.values()) s += v;
      if (grad) {
        conv2d_backward(in, kk, Tensor4(y.shape(), 1.0));
        *grad = kk.take_grad();
      }
      return s;
    };
    EXPECT_LT(grad_check(fk, kernel), 1e-4);
    const Tensor4 w = random_tensor(Shape4{2, 3, 4, 3}, rng);
    auto fx = [&](const Tensor4& a, Tensor4* grad) {
      Tensor4 in = a.clone_values();
      Tensor4 kk = kernel.clone_values();
      const double v = weighted_sum(conv2d(in, kk), w);
      if (grad) {
        conv2d_backward(in, kk, w);
        *grad = in.take_grad();
      }
      return v;
    };
    EXPECT_LT(grad_check(fx, x), 1e-4);
  }
}

TEST(AvgPool, ForwardAndBackward) {
  std::mt19937_64 rng(4);
  const Tensor4 x = random_tensor(Shape4{2, 2, 4, 6}, rng);
  const Tensor4 y = avg_pool2x2(x);
  EXPECT_EQ(y.shape(), (Shape4{2, 2, 2, 3}));
  EXPECT_NEAR(y.at(1, 1, 1, 2), 0.25 * (x.at(1, 1, 2, 4) + x.at(1, 1, 2, 5) + x.at(1, 1, 3, 4) + x.at(1, 1, 3, 5)),
              1e-15);
  const Tensor4 w = random_tensor(y.shape(), rng);
  auto f = [&](const Tensor4& a, Tensor4* grad) {
    const double v = weighted_sum(avg_pool2x2(a), w);
    if (grad) *grad = avg_pool2x2_backward(a.shape(), w);
    return v;
  };
  EXPECT_LT(grad_check(f, x), 1e-8);
}

TEST(GradCheck, LinearAndQuadratic) {
  std::mt19937_64 rng(1);
  const Tensor4 x = random_tensor(Shape4{1, 2, 3, 1}, rng);
  auto sum = [](const Tensor4& a, Tensor4* grad) {
    double s = 0.0;
    for (double v : a.values()) s += v;
    if (grad) *grad = Tensor4(a.shape(), 1.0);
    return s;
  };
  EXPECT_LT(grad_check(sum, x), 1e-10);
  auto squares = [](const Tensor4& a, Tensor4* grad) {
    double s = 0.0;
    for (double v : a.values()) s += v * v;
    if (grad) {
      *grad = Tensor4(a.shape());
      for (std::size_t i = 0; i < a.size(); ++i) (*grad)[i] = 2.0 * a[i];
    }
    return s;
  };
  const Tensor4 p(Shape4{1, 1, 1, 2}, {1.0, 2.0});
  Tensor4 g;
  squares(p, &g);
  EXPECT_EQ(g[0], 2.0);
  EXPECT_EQ(g[1], 4.0);
  EXPECT_LT(grad_check(squares, p), 1e-8);
}

TEST(GradCheck, InstanceNormSumOfSquares) {
  std::mt19937_64 rng(17);
  const Tensor4 x = random_tensor(Shape4{2, 3, 3, 3}, rng);
  InParams p = InParams::identity(3);
  auto f = [&](const Tensor4& a, Tensor4* grad) {
    const auto r = instance_norm(a, p);
    double s = 0.0;
    Tensor4 dy(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) {
      s += r.output[i] * r.output[i];
      dy[i] = 2.0 * r.output[i];
    }
    if (grad) *grad = instance_norm_backward(a, p, r.stats, dy);
    return s;
  };
  EXPECT_LT(grad_check(f, x), 1e-4);
}

TEST(GradCheck, ReportsNonFiniteEvaluation) {
  auto f = [](const Tensor4& a, Tensor4* grad) {
    if (grad) *grad = Tensor4(a.shape(), 0.0);
    return std::log(a[0] - 1.0);
  };
  EXPECT_THROW(grad_check(f, Tensor4(Shape4{1, 1, 1, 1}, 1.0)), NumericalError);
}

TEST(Determinism, RepeatedForwardIsBitIdentical) {
  std::mt19937_64 rng(8);
  const Tensor4 x = random_tensor(Shape4{2, 3, 5, 5}, rng);
  const Tensor4 k = random_tensor(Shape4{4, 3, 3, 3}, rng);
  const Tensor4 a = conv2d(x, k);
  const Tensor4 b = conv2d(x, k);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);
}

}  // namespace
}  // namespace ams

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

#include "ams/instance_norm.hpp"

#include <cmath>

#include "ams/errors.hpp"

namespace ams {

InParams InParams::identity(std::size_t channels, double epsilon) {
  return InParams{Tensor4(Shape4{1, channels, 1, 1}, 1.0), Tensor4(Shape4{1, channels, 1, 1}, 0.0), epsilon};
}

void InParams::validate(std::size_t channels) const {
  if (!(epsilon > 0.0)) throw ConfigError("instance norm epsilon must be positive");
  const Shape4 expected{1, channels, 1, 1};
  if (gamma.shape() != expected || beta.shape() != expected) {
    throw ConfigError("instance norm affine parameters must have " + std::to_string(channels) + " channels");
  }
}

InstanceNormResult instance_norm(const Tensor4& x, const InParams& p) {
  const Shape4& s = x.shape();
  p.validate(s.c);
  const std::size_t hw = s.spatial();
  if (hw == 0) throw ShapeError("instance_norm: empty spatial extent");
  InstanceNormResult r{Tensor4(s), NormStats{s.b, s.c, std::vector<double>(s.b * s.c), std::vector<double>(s.b * s.c)}};
  const double inv_n = 1.0 / static_cast<double>(hw);
  for (std::size_t n = 0; n < s.b; ++n) {
    for (std::size_t c = 0; c < s.c; ++c) {
      const std::size_t base = (n * s.c + c) * hw;
      double mean = 0.0;
      for (std::size_t i = 0; i < hw; ++i) mean += x[base + i];
      mean *= inv_n;
      double var = 0.0;
      for (std::size_t i = 0; i < hw; ++i) {
        const double d = x[base + i] - mean;
        var += d * d;
      }
      const double sd = std::sqrt(var * inv_n);
      r.stats.mean[n * s.c + c] = mean;
      r.stats.std[n * s.c + c] = sd;
      const double scale = p.gamma[c] / (sd + p.epsilon);
      for (std::size_t i = 0; i < hw; ++i) r.output[base + i] = scale * (x[base + i] - mean) + p.beta[c];
    }
  }
  return r;
}

Tensor4 instance_norm_backward(const Tensor4& x, InParams& p, const NormStats& stats, const Tensor4& dy) {
  const Shape4& s = x.shape();
  if (dy.shape() != s) throw ShapeError("instance_norm_backward: gradient shape mismatch");
  const std::size_t hw = s.spatial();
  const double inv_n = 1.0 / static_cast<double>(hw);
  auto dgamma = p.gamma.grad();
  auto dbeta = p.beta.grad();
  Tensor4 dx(s);
  for (std::size_t n = 0; n < s.b; ++n) {
    for (std::size_t c = 0; c < s.c; ++c) {
      const std::size_t base = (n * s.c + c) * hw;
      const double mean = stats.mean[n * s.c + c];
      const double sd = stats.std[n * s.c + c];
      const double denom = sd + p.epsilon;
      // dxhat = gamma * dy; accumulate the two reductions the chain rule needs.
      double sum_dxhat = 0.0, sum_dxhat_centered = 0.0;
      for (std::size_t i = 0; i < hw; ++i) {
        const double centered = x[base + i] - mean;
        dgamma[c] += dy[base + i] * centered / denom;
        dbeta[c] += dy[base + i];
        const double dxhat = p.gamma[c] * dy[base + i];
        sum_dxhat += dxhat;
        sum_dxhat_centered += dxhat * centered;
      }
      const double mean_dxhat = sum_dxhat * inv_n;
      // d sigma / dx_i = (x_i - mu) / (N sigma); zero when sigma vanishes.
      const double sigma_term = sd > 0.0 ? sum_dxhat_centered / (denom * denom * sd) * inv_n : 0.0;
      for (std::size_t i = 0; i < hw; ++i) {
        const double centered = x[base + i] - mean;
        dx[base + i] = (p.gamma[c] * dy[base + i] - mean_dxhat) / denom - sigma_term * centered;
      }
    }
  }
  return dx;
}

}  // namespace ams

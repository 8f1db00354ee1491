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

#include "ams/attention.hpp"

#include <cmath>

#include "ams/errors.hpp"
#include "ams/ops.hpp"

namespace ams {
namespace {

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

void fill_normal(Tensor4& t, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  for (auto& v : t.values()) v = dist(rng);
}

}  // namespace

ChannelAttentionParams ChannelAttentionParams::zeros(std::size_t channels, std::size_t reduction) {
  if (reduction == 0 || channels % reduction != 0) {
    throw ConfigError("channel attention reduction r=" + std::to_string(reduction) + " does not divide C=" +
                      std::to_string(channels));
  }
  const std::size_t hidden = channels / reduction;
  return ChannelAttentionParams{Tensor4(Shape4{hidden, channels, 1, 1}), Tensor4(Shape4{channels, hidden, 1, 1}),
                                reduction};
}

ChannelAttentionParams ChannelAttentionParams::random(std::size_t channels, std::size_t reduction,
                                                      std::mt19937_64& rng) {
  auto p = zeros(channels, reduction);
  fill_normal(p.w1, std::sqrt(2.0 / static_cast<double>(channels)), rng);
  fill_normal(p.w2, std::sqrt(1.0 / static_cast<double>(p.hidden())), rng);
  return p;
}

void ChannelAttentionParams::validate(std::size_t c) const {
  if (reduction == 0 || c % reduction != 0) {
    throw ConfigError("channel attention reduction r=" + std::to_string(reduction) + " does not divide C=" +
                      std::to_string(c));
  }
  const std::size_t hid = c / reduction;
  if (w1.shape() != Shape4{hid, c, 1, 1} || w2.shape() != Shape4{c, hid, 1, 1}) {
    throw ShapeError("channel attention weights do not match C=" + std::to_string(c) + ", r=" +
                     std::to_string(reduction));
  }
}

SpatialAttentionParams SpatialAttentionParams::zeros(std::size_t k) {
  if (k % 2 == 0) throw ConfigError("spatial attention kernel size must be odd, got " + std::to_string(k));
  return SpatialAttentionParams{Tensor4(Shape4{1, 2, k, k})};
}

SpatialAttentionParams SpatialAttentionParams::random(std::size_t k, std::mt19937_64& rng) {
  auto p = zeros(k);
  fill_normal(p.kernel, std::sqrt(1.0 / static_cast<double>(2 * k * k)), rng);
  return p;
}

void SpatialAttentionParams::validate() const {
  const Shape4& s = kernel.shape();
  if (s.b != 1 || s.c != 2 || s.h != s.w || s.h % 2 == 0) {
    throw ConfigError("spatial attention kernel must be (1, 2, k, k) with odd k, got " + s.str());
  }
}

ChannelAttentionResult channel_attention(const Tensor4& x, const ChannelAttentionParams& p) {
  const Shape4& s = x.shape();
  p.validate(s.c);
  const std::size_t C = s.c, hid = p.hidden(), hw = s.spatial();
  if (hw == 0) throw ShapeError("channel_attention: empty spatial extent");
  ChannelAttentionResult r;
  auto& cache = r.cache;
  cache.avg.assign(s.b * C, 0.0);
  cache.max.assign(s.b * C, 0.0);
  cache.argmax.assign(s.b * C, 0);
  cache.hidden_avg.assign(s.b * hid, 0.0);
  cache.hidden_max.assign(s.b * hid, 0.0);
  cache.mask = Tensor4(Shape4{s.b, C, 1, 1});

  for (std::size_t n = 0; n < s.b; ++n) {
    for (std::size_t c = 0; c < C; ++c) {
      const double* plane = x.data() + (n * C + c) * hw;
      double sum = 0.0, best = plane[0];
      std::size_t arg = 0;
      for (std::size_t i = 0; i < hw; ++i) {
        sum += plane[i];
        if (plane[i] > best) {
          best = plane[i];
          arg = i;
        }
      }
      cache.avg[n * C + c] = sum / static_cast<double>(hw);
      cache.max[n * C + c] = best;
      cache.argmax[n * C + c] = arg;
    }
    for (std::size_t j = 0; j < hid; ++j) {
      double ha = 0.0, hm = 0.0;
      for (std::size_t c = 0; c < C; ++c) {
        ha += p.w1[j * C + c] * cache.avg[n * C + c];
        hm += p.w1[j * C + c] * cache.max[n * C + c];
      }
      cache.hidden_avg[n * hid + j] = ha;
      cache.hidden_max[n * hid + j] = hm;
    }
    for (std::size_t c = 0; c < C; ++c) {
      double z = 0.0;
      for (std::size_t j = 0; j < hid; ++j) {
        const double ra = std::max(cache.hidden_avg[n * hid + j], 0.0);
        const double rm = std::max(cache.hidden_max[n * hid + j], 0.0);
        z += p.w2[c * hid + j] * (ra + rm);
      }
      cache.mask[n * C + c] = sigmoid(z);
    }
  }
  // (B, C, 1, 1) masks vary per sample, outside the generic broadcast forms.
  r.output = Tensor4(s);
  for (std::size_t n = 0; n < s.b; ++n)
    for (std::size_t c = 0; c < C; ++c) {
      const double m = cache.mask[n * C + c];
      const std::size_t base = (n * C + c) * hw;
      for (std::size_t i = 0; i < hw; ++i) r.output[base + i] = m * x[base + i];
    }
  return r;
}

Tensor4 channel_attention_backward(const Tensor4& x, ChannelAttentionParams& p, const ChannelAttentionCache& cache,
                                   const Tensor4& dy) {
  const Shape4& s = x.shape();
  if (dy.shape() != s) throw ShapeError("channel_attention_backward: gradient shape mismatch");
  const std::size_t C = s.c, hid = p.hidden(), hw = s.spatial();
  auto dw1 = p.w1.grad();
  auto dw2 = p.w2.grad();
  Tensor4 dx(s);
  std::vector<double> dz(C), dha(hid), dhm(hid);
  for (std::size_t n = 0; n < s.b; ++n) {
    for (std::size_t c = 0; c < C; ++c) {
      const std::size_t base = (n * C + c) * hw;
      const double m = cache.mask[n * C + c];
      double dm = 0.0;
      for (std::size_t i = 0; i < hw; ++i) {
        dm += dy[base + i] * x[base + i];
        dx[base + i] = dy[base + i] * m;
      }
      dz[c] = dm * m * (1.0 - m);
    }
    for (std::size_t j = 0; j < hid; ++j) {
      const double ha = cache.hidden_avg[n * hid + j];
      const double hm = cache.hidden_max[n * hid + j];
      const double ra = std::max(ha, 0.0), rm = std::max(hm, 0.0);
      double dr = 0.0;
      for (std::size_t c = 0; c < C; ++c) {
        dw2[c * hid + j] += dz[c] * (ra + rm);
        dr += p.w2[c * hid + j] * dz[c];
      }
      dha[j] = ha > 0.0 ? dr : 0.0;
      dhm[j] = hm > 0.0 ? dr : 0.0;
    }
    for (std::size_t c = 0; c < C; ++c) {
      double davg = 0.0, dmax = 0.0;
      for (std::size_t j = 0; j < hid; ++j) {
        dw1[j * C + c] += dha[j] * cache.avg[n * C + c] + dhm[j] * cache.max[n * C + c];
        davg += p.w1[j * C + c] * dha[j];
        dmax += p.w1[j * C + c] * dhm[j];
      }
      const std::size_t base = (n * C + c) * hw;
      const double spread = davg / static_cast<double>(hw);
      for (std::size_t i = 0; i < hw; ++i) dx[base + i] += spread;
      dx[base + cache.argmax[n * C + c]] += dmax;
    }
  }
  return dx;
}

SpatialAttentionResult spatial_attention(const Tensor4& x, const SpatialAttentionParams& p) {
  p.validate();
  const Shape4& s = x.shape();
  if (s.c == 0 || s.spatial() == 0) throw ShapeError("spatial_attention: empty input " + s.str());
  const std::size_t hw = s.spatial();
  SpatialAttentionResult r;
  auto& cache = r.cache;
  cache.pooled = Tensor4(Shape4{s.b, 2, s.h, s.w});
  cache.argmax.assign(s.b * hw, 0);
  for (std::size_t n = 0; n < s.b; ++n) {
    for (std::size_t i = 0; i < hw; ++i) {
      double sum = 0.0, best = x[n * s.c * hw + i];
      std::size_t arg = 0;
      for (std::size_t c = 0; c < s.c; ++c) {
        const double v = x[(n * s.c + c) * hw + i];
        sum += v;
        if (v > best) {
          best = v;
          arg = c;
        }
      }
      cache.pooled[(n * 2) * hw + i] = sum / static_cast<double>(s.c);
      cache.pooled[(n * 2 + 1) * hw + i] = best;
      cache.argmax[n * hw + i] = arg;
    }
  }
  cache.mask = elementwise(ElementwiseOp::sigmoid, conv2d(cache.pooled, p.kernel));
  r.output = elementwise(ElementwiseOp::mul, x, cache.mask);
  return r;
}

Tensor4 spatial_attention_backward(const Tensor4& x, SpatialAttentionParams& p, const SpatialAttentionCache& cache,
                                   const Tensor4& dy) {
  const Shape4& s = x.shape();
  if (dy.shape() != s) throw ShapeError("spatial_attention_backward: gradient shape mismatch");
  const std::size_t hw = s.spatial();
  Tensor4 dx(s);
  Tensor4 dz(cache.mask.shape());
  for (std::size_t n = 0; n < s.b; ++n) {
    for (std::size_t i = 0; i < hw; ++i) {
      const double m = cache.mask[n * hw + i];
      double dm = 0.0;
      for (std::size_t c = 0; c < s.c; ++c) {
        const std::size_t k = (n * s.c + c) * hw + i;
        dm += dy[k] * x[k];
        dx[k] = dy[k] * m;
      }
      dz[n * hw + i] = dm * m * (1.0 - m);
    }
  }
  const Tensor4 dk = conv2d_kernel_grad(cache.pooled, dz, p.kernel.shape());
  auto gk = p.kernel.grad();
  for (std::size_t i = 0; i < dk.size(); ++i) gk[i] += dk[i];
  const Tensor4 dpooled = conv2d_input_grad(dz, p.kernel, cache.pooled.shape());
  for (std::size_t n = 0; n < s.b; ++n) {
    for (std::size_t i = 0; i < hw; ++i) {
      const double dmean = dpooled[(n * 2) * hw + i] / static_cast<double>(s.c);
      for (std::size_t c = 0; c < s.c; ++c) dx[(n * s.c + c) * hw + i] += dmean;
      dx[(n * s.c + cache.argmax[n * hw + i]) * hw + i] += dpooled[(n * 2 + 1) * hw + i];
    }
  }
  return dx;
}

}  // namespace ams

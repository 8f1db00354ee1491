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

#include "ams/ops.hpp"

#include <cmath>
#include <limits>

#include "ams/errors.hpp"

namespace ams {
namespace {

enum class Broadcast { none, channel, position };

Broadcast classify(const Shape4& a, const Shape4& b) {
  if (a == b) return Broadcast::none;
  if (b.b == 1 && b.c == a.c && b.h == 1 && b.w == 1) return Broadcast::channel;
  if (b.b == a.b && b.c == 1 && b.h == a.h && b.w == a.w) return Broadcast::position;
  throw ShapeError("cannot combine " + a.str() + " with " + b.str() +
                   ": only equal shapes, (1,C,1,1) or (B,1,H,W) broadcasts are supported");
}

// Calls fn(i, j) for every flat index i of `a` with the matching index j of `b`.
template <typename Fn>
void for_each_pair(const Shape4& a, Broadcast mode, Fn&& fn) {
  const std::size_t hw = a.spatial();
  std::size_t i = 0;
  for (std::size_t n = 0; n < a.b; ++n) {
    for (std::size_t c = 0; c < a.c; ++c) {
      for (std::size_t p = 0; p < hw; ++p, ++i) {
        std::size_t j = i;
        if (mode == Broadcast::channel) j = c;
        else if (mode == Broadcast::position) j = n * hw + p;
        fn(i, j);
      }
    }
  }
}

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

}  // namespace

Tensor4 elementwise(ElementwiseOp op, const Tensor4& a, const Tensor4& b) {
  const Broadcast mode = classify(a.shape(), b.shape());
  Tensor4 out(a.shape());
  switch (op) {
    case ElementwiseOp::add:
      for_each_pair(a.shape(), mode, [&](std::size_t i, std::size_t j) { out[i] = a[i] + b[j]; });
      break;
    case ElementwiseOp::sub:
      for_each_pair(a.shape(), mode, [&](std::size_t i, std::size_t j) { out[i] = a[i] - b[j]; });
      break;
    case ElementwiseOp::mul:
      for_each_pair(a.shape(), mode, [&](std::size_t i, std::size_t j) { out[i] = a[i] * b[j]; });
      break;
    default:
      throw InputError("elementwise: op is not binary");
  }
  return out;
}

Tensor4 elementwise(ElementwiseOp op, const Tensor4& a, double s) {
  Tensor4 out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double v = a[i];
    switch (op) {
      case ElementwiseOp::add: out[i] = v + s; break;
      case ElementwiseOp::sub: out[i] = v - s; break;
      case ElementwiseOp::mul:
      case ElementwiseOp::scale: out[i] = v * s; break;
      case ElementwiseOp::sigmoid: out[i] = sigmoid(v); break;
      case ElementwiseOp::relu: out[i] = v > 0.0 ? v : 0.0; break;
    }
  }
  return out;
}

void elementwise_backward(ElementwiseOp op, Tensor4& a, Tensor4& b, const Tensor4& dout) {
  const Broadcast mode = classify(a.shape(), b.shape());
  if (dout.shape() != a.shape()) throw ShapeError("elementwise_backward: gradient shape mismatch");
  auto ga = a.grad();
  auto gb = b.grad();
  switch (op) {
    case ElementwiseOp::add:
      for_each_pair(a.shape(), mode, [&](std::size_t i, std::size_t j) {
        ga[i] += dout[i];
        gb[j] += dout[i];
      });
      break;
    case ElementwiseOp::sub:
      for_each_pair(a.shape(), mode, [&](std::size_t i, std::size_t j) {
        ga[i] += dout[i];
        gb[j] -= dout[i];
      });
      break;
    case ElementwiseOp::mul:
      for_each_pair(a.shape(), mode, [&](std::size_t i, std::size_t j) {
        ga[i] += dout[i] * b[j];
        gb[j] += dout[i] * a[i];
      });
      break;
    default:
      throw InputError("elementwise_backward: op is not binary");
  }
}

void elementwise_backward(ElementwiseOp op, Tensor4& a, double s, const Tensor4& dout) {
  if (dout.shape() != a.shape()) throw ShapeError("elementwise_backward: gradient shape mismatch");
  auto ga = a.grad();
  for (std::size_t i = 0; i < a.size(); ++i) {
    switch (op) {
      case ElementwiseOp::add:
      case ElementwiseOp::sub: ga[i] += dout[i]; break;
      case ElementwiseOp::mul:
      case ElementwiseOp::scale: ga[i] += dout[i] * s; break;
      case ElementwiseOp::sigmoid: {
        const double y = sigmoid(a[i]);
        ga[i] += dout[i] * y * (1.0 - y);
        break;
      }
      case ElementwiseOp::relu: ga[i] += a[i] > 0.0 ? dout[i] : 0.0; break;
    }
  }
}

namespace {

Shape4 reduced_shape(const Shape4& s, unsigned axes) {
  if ((axes & 0xFu) == 0) throw ShapeError("reduce: no axes given");
  Shape4 out = s;
  auto check = [](std::size_t extent, const char* name) {
    if (extent == 0) throw ShapeError(std::string("reduce: axis ") + name + " has extent 0");
  };
  if (axes & kAxisB) { check(s.b, "B"); out.b = 1; }
  if (axes & kAxisC) { check(s.c, "C"); out.c = 1; }
  if (axes & kAxisH) { check(s.h, "H"); out.h = 1; }
  if (axes & kAxisW) { check(s.w, "W"); out.w = 1; }
  return out;
}

template <typename Fn>
void for_each_reduced(const Tensor4& x, const Tensor4& out, unsigned axes, Fn&& fn) {
  const Shape4& s = x.shape();
  std::size_t i = 0;
  for (std::size_t n = 0; n < s.b; ++n)
    for (std::size_t c = 0; c < s.c; ++c)
      for (std::size_t h = 0; h < s.h; ++h)
        for (std::size_t w = 0; w < s.w; ++w, ++i) {
          const std::size_t o = out.offset((axes & kAxisB) ? 0 : n, (axes & kAxisC) ? 0 : c,
                                           (axes & kAxisH) ? 0 : h, (axes & kAxisW) ? 0 : w);
          fn(i, o);
        }
}

}  // namespace

Tensor4 reduce(ReduceOp op, const Tensor4& x, unsigned axes) {
  const Shape4 rs = reduced_shape(x.shape(), axes);
  if (op == ReduceOp::mean) {
    Tensor4 out(rs, 0.0);
    for_each_reduced(x, out, axes, [&](std::size_t i, std::size_t o) { out[o] += x[i]; });
    const double count = static_cast<double>(x.size()) / static_cast<double>(rs.size());
    for (auto& v : out.values()) v /= count;
    return out;
  }
  Tensor4 out(rs, -std::numeric_limits<double>::infinity());
  for_each_reduced(x, out, axes, [&](std::size_t i, std::size_t o) {
    if (x[i] > out[o]) out[o] = x[i];
  });
  return out;
}

void reduce_backward(ReduceOp op, Tensor4& x, unsigned axes, const Tensor4& dout) {
  const Shape4 rs = reduced_shape(x.shape(), axes);
  if (dout.shape() != rs) throw ShapeError("reduce_backward: gradient shape mismatch");
  auto gx = x.grad();
  if (op == ReduceOp::mean) {
    const double count = static_cast<double>(x.size()) / static_cast<double>(rs.size());
    for_each_reduced(x, dout, axes, [&](std::size_t i, std::size_t o) { gx[i] += dout[o] / count; });
    return;
  }
  // First occurrence of the maximum receives the gradient.
  Tensor4 best(rs, -std::numeric_limits<double>::infinity());
  std::vector<std::size_t> arg(rs.size(), 0);
  for_each_reduced(x, best, axes, [&](std::size_t i, std::size_t o) {
    if (x[i] > best[o]) {
      best[o] = x[i];
      arg[o] = i;
    }
  });
  for (std::size_t o = 0; o < rs.size(); ++o) gx[arg[o]] += dout[o];
}

namespace {

void check_conv(const Shape4& x, const Shape4& k) {
  if (k.c != x.c) {
    throw ShapeError("conv2d: kernel expects " + std::to_string(k.c) + " input channels, input has " +
                     std::to_string(x.c));
  }
  if (k.h != k.w || k.h % 2 == 0) throw ShapeError("conv2d: kernel must be square with odd size");
}

// Columns (Cin*k*k, H*W) of one sample with zero padding k/2.
void im2col(const double* x, const Shape4& s, std::size_t k, RowMatrix& cols) {
  const long pad = static_cast<long>(k / 2);
  const long H = static_cast<long>(s.h), W = static_cast<long>(s.w);
  cols.resize(static_cast<Eigen::Index>(s.c * k * k), H * W);
  Eigen::Index row = 0;
  for (std::size_t c = 0; c < s.c; ++c) {
    const double* plane = x + c * s.spatial();
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx, ++row) {
        double* dst = cols.row(row).data();
        const long dy = static_cast<long>(ky) - pad, dx = static_cast<long>(kx) - pad;
        for (long h = 0; h < H; ++h) {
          const long sh = h + dy;
          for (long w = 0; w < W; ++w) {
            const long sw = w + dx;
            dst[h * W + w] = (sh >= 0 && sh < H && sw >= 0 && sw < W) ? plane[sh * W + sw] : 0.0;
          }
        }
      }
    }
  }
}

void col2im_add(const RowMatrix& cols, const Shape4& s, std::size_t k, double* dx) {
  const long pad = static_cast<long>(k / 2);
  const long H = static_cast<long>(s.h), W = static_cast<long>(s.w);
  Eigen::Index row = 0;
  for (std::size_t c = 0; c < s.c; ++c) {
    double* plane = dx + c * s.spatial();
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx, ++row) {
        const double* src = cols.row(row).data();
        const long dy = static_cast<long>(ky) - pad, dxo = static_cast<long>(kx) - pad;
        for (long h = 0; h < H; ++h) {
          const long sh = h + dy;
          if (sh < 0 || sh >= H) continue;
          for (long w = 0; w < W; ++w) {
            const long sw = w + dxo;
            if (sw >= 0 && sw < W) plane[sh * W + sw] += src[h * W + w];
          }
        }
      }
    }
  }
}

}  // namespace

Tensor4 conv2d(const Tensor4& x, const Tensor4& kernel) {
  const Shape4& s = x.shape();
  const Shape4& ks = kernel.shape();
  check_conv(s, ks);
  const std::size_t k = ks.h;
  Tensor4 out(Shape4{s.b, ks.b, s.h, s.w});
  const auto hw = static_cast<Eigen::Index>(s.spatial());
  ConstRowMatrixMap wmat(kernel.data(), static_cast<Eigen::Index>(ks.b),
                         static_cast<Eigen::Index>(ks.c * k * k));
  RowMatrix cols;
  for (std::size_t n = 0; n < s.b; ++n) {
    RowMatrixMap y(out.data() + n * ks.b * s.spatial(), static_cast<Eigen::Index>(ks.b), hw);
    if (k == 1) {
      y.noalias() = wmat * ConstRowMatrixMap(x.data() + n * s.c * s.spatial(),
                                             static_cast<Eigen::Index>(s.c), hw);
    } else {
      im2col(x.data() + n * s.c * s.spatial(), s, k, cols);
      y.noalias() = wmat * cols;
    }
  }
  return out;
}

Tensor4 conv2d_input_grad(const Tensor4& dout, const Tensor4& kernel, const Shape4& s) {
  const Shape4& ks = kernel.shape();
  check_conv(s, ks);
  const std::size_t k = ks.h;
  if (dout.shape() != Shape4{s.b, ks.b, s.h, s.w}) throw ShapeError("conv2d: gradient shape mismatch");
  Tensor4 dx(s);
  const auto hw = static_cast<Eigen::Index>(s.spatial());
  ConstRowMatrixMap wmat(kernel.data(), static_cast<Eigen::Index>(ks.b),
                         static_cast<Eigen::Index>(ks.c * k * k));
  RowMatrix dcols;
  for (std::size_t n = 0; n < s.b; ++n) {
    ConstRowMatrixMap dy(dout.data() + n * ks.b * s.spatial(), static_cast<Eigen::Index>(ks.b), hw);
    if (k == 1) {
      RowMatrixMap(dx.data() + n * s.c * s.spatial(), static_cast<Eigen::Index>(s.c), hw).noalias() =
          wmat.transpose() * dy;
    } else {
      dcols.noalias() = wmat.transpose() * dy;
      col2im_add(dcols, s, k, dx.data() + n * s.c * s.spatial());
    }
  }
  return dx;
}

Tensor4 conv2d_kernel_grad(const Tensor4& x, const Tensor4& dout, const Shape4& ks) {
  const Shape4& s = x.shape();
  check_conv(s, ks);
  const std::size_t k = ks.h;
  if (dout.shape() != Shape4{s.b, ks.b, s.h, s.w}) throw ShapeError("conv2d: gradient shape mismatch");
  Tensor4 dk(ks);
  const auto hw = static_cast<Eigen::Index>(s.spatial());
  RowMatrixMap dw(dk.data(), static_cast<Eigen::Index>(ks.b), static_cast<Eigen::Index>(ks.c * k * k));
  RowMatrix cols;
  for (std::size_t n = 0; n < s.b; ++n) {
    ConstRowMatrixMap dy(dout.data() + n * ks.b * s.spatial(), static_cast<Eigen::Index>(ks.b), hw);
    if (k == 1) {
      dw.noalias() += dy * ConstRowMatrixMap(x.data() + n * s.c * s.spatial(),
                                             static_cast<Eigen::Index>(s.c), hw).transpose();
    } else {
      im2col(x.data() + n * s.c * s.spatial(), s, k, cols);
      dw.noalias() += dy * cols.transpose();
    }
  }
  return dk;
}

void conv2d_backward(Tensor4& x, Tensor4& kernel, const Tensor4& dout) {
  const Tensor4 dx = conv2d_input_grad(dout, kernel, x.shape());
  const Tensor4 dk = conv2d_kernel_grad(x, dout, kernel.shape());
  auto gx = x.grad();
  for (std::size_t i = 0; i < dx.size(); ++i) gx[i] += dx[i];
  auto gk = kernel.grad();
  for (std::size_t i = 0; i < dk.size(); ++i) gk[i] += dk[i];
}

Tensor4 avg_pool2x2(const Tensor4& x) {
  const Shape4& s = x.shape();
  if (s.h < 2 || s.w < 2) throw ShapeError("avg_pool2x2: spatial extent below 2 in " + s.str());
  Tensor4 out(Shape4{s.b, s.c, s.h / 2, s.w / 2});
  for (std::size_t n = 0; n < s.b; ++n)
    for (std::size_t c = 0; c < s.c; ++c)
      for (std::size_t h = 0; h < s.h / 2; ++h)
        for (std::size_t w = 0; w < s.w / 2; ++w)
          out.at(n, c, h, w) = 0.25 * (x.at(n, c, 2 * h, 2 * w) + x.at(n, c, 2 * h, 2 * w + 1) +
                                       x.at(n, c, 2 * h + 1, 2 * w) + x.at(n, c, 2 * h + 1, 2 * w + 1));
  return out;
}

Tensor4 avg_pool2x2_backward(const Shape4& s, const Tensor4& dout) {
  if (dout.shape() != Shape4{s.b, s.c, s.h / 2, s.w / 2}) throw ShapeError("avg_pool2x2: gradient shape mismatch");
  Tensor4 dx(s);
  for (std::size_t n = 0; n < s.b; ++n)
    for (std::size_t c = 0; c < s.c; ++c)
      for (std::size_t h = 0; h < s.h / 2; ++h)
        for (std::size_t w = 0; w < s.w / 2; ++w) {
          const double g = 0.25 * dout.at(n, c, h, w);
          dx.at(n, c, 2 * h, 2 * w) = g;
          dx.at(n, c, 2 * h, 2 * w + 1) = g;
          dx.at(n, c, 2 * h + 1, 2 * w) = g;
          dx.at(n, c, 2 * h + 1, 2 * w + 1) = g;
        }
  return dx;
}

}  // namespace ams

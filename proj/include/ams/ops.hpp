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

#pragma once

#include "ams/tensor.hpp"

namespace ams {

enum class ElementwiseOp { add, sub, mul, sigmoid, relu, scale };

/// Binary form. `b` must match `a` exactly, or be a per-channel (1,C,1,1) or
/// per-position (B,1,H,W) operand broadcast over `a`. Only add/sub/mul.
Tensor4 elementwise(ElementwiseOp op, const Tensor4& a, const Tensor4& b);

/// Scalar/unary form: add/sub/mul/scale use `s`; sigmoid and relu ignore it.
Tensor4 elementwise(ElementwiseOp op, const Tensor4& a, double s = 0.0);

// Backward passes accumulate into the operands' gradient buffers. A broadcast
// operand receives the sum over the broadcast axes.
void elementwise_backward(ElementwiseOp op, Tensor4& a, Tensor4& b, const Tensor4& dout);
void elementwise_backward(ElementwiseOp op, Tensor4& a, double s, const Tensor4& dout);

enum class ReduceOp { mean, max };

enum Axis : unsigned { kAxisB = 1u, kAxisC = 2u, kAxisH = 4u, kAxisW = 8u };

/// Reduces over the axes in the bitmask; reduced axes keep extent 1.
/// Max ties resolve to the first index in row-major order.
Tensor4 reduce(ReduceOp op, const Tensor4& x, unsigned axes);
void reduce_backward(ReduceOp op, Tensor4& x, unsigned axes, const Tensor4& dout);

/// Stride-1 "same" convolution. kernel is (Cout, Cin, k, k) with k odd.
Tensor4 conv2d(const Tensor4& x, const Tensor4& kernel);
// Accumulates into x.grad() and kernel.grad().
void conv2d_backward(Tensor4& x, Tensor4& kernel, const Tensor4& dout);
Tensor4 conv2d_input_grad(const Tensor4& dout, const Tensor4& kernel, const Shape4& input_shape);
Tensor4 conv2d_kernel_grad(const Tensor4& x, const Tensor4& dout, const Shape4& kernel_shape);

/// Non-overlapping 2x2 average pooling; odd trailing rows/cols are dropped.
Tensor4 avg_pool2x2(const Tensor4& x);
Tensor4 avg_pool2x2_backward(const Shape4& input_shape, const Tensor4& dout);

}  // namespace ams

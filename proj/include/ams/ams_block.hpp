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

#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ams/attention.hpp"
#include "ams/group_whiten.hpp"
#include "ams/instance_norm.hpp"
#include "ams/tensor.hpp"

namespace ams {

/// How IN and GW are combined.
///   in_gw      GW(IN(x))
///   gw_in      IN(GW(x))
///   in_and_gw  IN(x) + GW(x)
///   in_xgw     IN(x) + GW(IN(x))
///   gw_xin     GW(x) + IN(GW(x))
enum class Combination { in_gw, gw_in, in_and_gw, in_xgw, gw_xin, in_only, gw_only, none };

/// Attention wrapped around a normalization stage as f + A(f). casa applies
/// channel attention first and spatial attention on its result, each with
/// its own residual.
enum class AttentionKind { none, sa, ca, casa };

struct VariantKind {
  Combination combination = Combination::in_gw;
  AttentionKind attn_in = AttentionKind::none;
  AttentionKind attn_gw = AttentionKind::none;

  /// IN with spatial attention followed by GW with channel attention.
  static VariantKind canonical() { return {Combination::in_gw, AttentionKind::sa, AttentionKind::ca}; }
  static VariantKind plain(Combination c) { return {c, AttentionKind::none, AttentionKind::none}; }

  bool has_in() const;
  bool has_gw() const;
  // Selectors for stages the combination lacks are reset to none.
  VariantKind normalized() const;
  /// e.g. "IN_GW", "IN_GW:SA,CA", "none". Inverse of parse_variant.
  std::string label() const;
  bool operator==(const VariantKind& o) const;
};

/// Accepts the labels produced by VariantKind::label() plus the alias "AMS".
VariantKind parse_variant(const std::string& text);
std::string to_string(Combination c);
std::string to_string(AttentionKind a);
Combination parse_combination(const std::string& name);
AttentionKind parse_attention(const std::string& name);

struct StageAttention {
  std::optional<ChannelAttentionParams> ca;
  std::optional<SpatialAttentionParams> sa;
};

/// Parameters of one block. Each normalization stage owns its attention
/// parameters; for the canonical variant that is SA on the IN stage and CA
/// on the GW stage.
struct AmsParams {
  InParams in_params;
  WhitenConfig whiten_cfg;
  StageAttention in_attention;
  StageAttention gw_attention;

  /// Throws ConfigError when the variant needs parameters that are missing
  /// or when channel counts disagree.
  void validate(std::size_t channels, const VariantKind& v) const;
};

struct AmsOptions {
  double in_epsilon = 1e-5;
  WhitenConfig whiten;
  std::size_t reduction = 16;
  std::size_t sa_kernel = 7;
};

/// Identity-initialised IN, randomly initialised attention for every
/// selector the variant uses.
AmsParams make_ams_params(std::size_t channels, const VariantKind& v, const AmsOptions& opts, std::mt19937_64& rng);

/// The canonical block: f_in = IN(x); f_in' = f_in + SA(f_in);
/// f_gw = GW(f_in'); out = f_gw + CA(f_gw).
Tensor4 ams_forward(const Tensor4& x, const AmsParams& p);

/// Any combination / attention placement.
Tensor4 variant_forward(const Tensor4& x, const AmsParams& p, const VariantKind& v);

/// Stateful block that caches one forward invocation for backward.
class AmsBlock {
 public:
  AmsBlock(AmsParams params, VariantKind variant);
  AmsBlock(AmsBlock&&) noexcept;
  AmsBlock& operator=(AmsBlock&&) noexcept;
  ~AmsBlock();

  Tensor4 forward(const Tensor4& x);
  /// Returns dL/dx and accumulates parameter gradients.
  Tensor4 backward(const Tensor4& dy);

  AmsParams& params() { return params_; }
  const AmsParams& params() const { return params_; }
  const VariantKind& variant() const { return variant_; }
  void collect_params(const std::string& prefix, std::vector<ParamRef>& out);

  struct Trace;

 private:
  AmsParams params_;
  VariantKind variant_;
  std::unique_ptr<Trace> trace_;
};

}  // namespace ams

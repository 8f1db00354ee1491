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

#include "ams/ams_block.hpp"

#include <array>
#include <utility>

#include "ams/errors.hpp"
#include "ams/ops.hpp"

namespace ams {

namespace {

constexpr std::array<std::pair<Combination, const char*>, 8> kCombinationNames{{
    {Combination::in_gw, "IN_GW"},
    {Combination::gw_in, "GW_IN"},
    {Combination::in_and_gw, "IN_and_GW"},
    {Combination::in_xgw, "IN_XGW"},
    {Combination::gw_xin, "GW_XIN"},
    {Combination::in_only, "IN_only"},
    {Combination::gw_only, "GW_only"},
    {Combination::none, "none"},
}};

constexpr std::array<std::pair<AttentionKind, const char*>, 4> kAttentionNames{{
    {AttentionKind::none, "none"},
    {AttentionKind::sa, "SA"},
    {AttentionKind::ca, "CA"},
    {AttentionKind::casa, "CASA"},
}};

bool needs_ca(AttentionKind k) { return k == AttentionKind::ca || k == AttentionKind::casa; }
bool needs_sa(AttentionKind k) { return k == AttentionKind::sa || k == AttentionKind::casa; }

}  // namespace

std::string to_string(Combination c) {
  for (const auto& [k, name] : kCombinationNames)
    if (k == c) return name;
  return "?";
}

std::string to_string(AttentionKind a) {
  for (const auto& [k, name] : kAttentionNames)
    if (k == a) return name;
  return "?";
}

Combination parse_combination(const std::string& name) {
  for (const auto& [k, n] : kCombinationNames)
    if (name == n) return k;
  throw ConfigError("unknown combination '" + name + "'");
}

AttentionKind parse_attention(const std::string& name) {
  for (const auto& [k, n] : kAttentionNames)
    if (name == n) return k;
  throw ConfigError("unknown attention kind '" + name + "'");
}

bool VariantKind::has_in() const { return combination != Combination::gw_only && combination != Combination::none; }
bool VariantKind::has_gw() const { return combination != Combination::in_only && combination != Combination::none; }

VariantKind VariantKind::normalized() const {
  VariantKind v = *this;
  if (!has_in()) v.attn_in = AttentionKind::none;
  if (!has_gw()) v.attn_gw = AttentionKind::none;
  return v;
}

std::string VariantKind::label() const {
  const VariantKind v = normalized();
  std::string out = to_string(v.combination);
  if (v.attn_in != AttentionKind::none || v.attn_gw != AttentionKind::none) {
    out += ":" + to_string(v.attn_in) + "," + to_string(v.attn_gw);
  }
  return out;
}

bool VariantKind::operator==(const VariantKind& o) const {
  const VariantKind a = normalized(), b = o.normalized();
  return a.combination == b.combination && a.attn_in == b.attn_in && a.attn_gw == b.attn_gw;
}

VariantKind parse_variant(const std::string& text) {
  if (text == "AMS") return VariantKind::canonical();
  const auto colon = text.find(':');
  VariantKind v = VariantKind::plain(parse_combination(text.substr(0, colon)));
  if (colon != std::string::npos) {
    const std::string rest = text.substr(colon + 1);
    const auto comma = rest.find(',');
    if (comma == std::string::npos) {
      throw ConfigError("variant '" + text + "': attention must be given as <in>,<gw>, e.g. IN_GW:SA,CA");
    }
    v.attn_in = parse_attention(rest.substr(0, comma));
    v.attn_gw = parse_attention(rest.substr(comma + 1));
  }
  return v.normalized();
}

void AmsParams::validate(std::size_t channels, const VariantKind& raw) const {
  const VariantKind v = raw.normalized();
  if (v.has_in()) in_params.validate(channels);
  if (v.has_gw()) whiten_cfg.validate(channels);
  auto check_stage = [&](const StageAttention& a, AttentionKind k, const char* stage) {
    if (needs_ca(k)) {
      if (!a.ca) throw ConfigError(std::string(stage) + " stage needs channel attention parameters");
      a.ca->validate(channels);
    }
    if (needs_sa(k)) {
      if (!a.sa) throw ConfigError(std::string(stage) + " stage needs spatial attention parameters");
      a.sa->validate();
    }
  };
  check_stage(in_attention, v.attn_in, "IN");
  check_stage(gw_attention, v.attn_gw, "GW");
}

AmsParams make_ams_params(std::size_t channels, const VariantKind& raw, const AmsOptions& opts,
                          std::mt19937_64& rng) {
  const VariantKind v = raw.normalized();
  AmsParams p{InParams::identity(channels, opts.in_epsilon), opts.whiten, {}, {}};
  auto build = [&](StageAttention& a, AttentionKind k) {
    if (needs_ca(k)) a.ca = ChannelAttentionParams::random(channels, opts.reduction, rng);
    if (needs_sa(k)) a.sa = SpatialAttentionParams::random(opts.sa_kernel, rng);
  };
  build(p.in_attention, v.attn_in);
  build(p.gw_attention, v.attn_gw);
  p.validate(channels, v);
  return p;
}

// ---------------------------------------------------------------------------

namespace {

struct AttentionTrace {
  Tensor4 input;
  ChannelAttentionCache ca;
  Tensor4 mid;
  SpatialAttentionCache sa;
};

struct StageTrace {
  Tensor4 input;
  NormStats in_stats;
  WhitenStats gw_stats;
  AttentionTrace attention;
};

enum class StageKind { in, gw };

Tensor4 attend_forward(const Tensor4& f, AttentionKind kind, const StageAttention& a, AttentionTrace* tr,
                       const std::string& stage) {
  switch (kind) {
    case AttentionKind::none:
      return f;
    case AttentionKind::sa: {
      auto r = spatial_attention(f, *a.sa);
      Tensor4 out = elementwise(ElementwiseOp::add, f, r.output);
      require_finite(out, stage + ".SA");
      if (tr) {
        tr->input = f;
        tr->sa = std::move(r.cache);
      }
      return out;
    }
    case AttentionKind::ca: {
      auto r = channel_attention(f, *a.ca);
      Tensor4 out = elementwise(ElementwiseOp::add, f, r.output);
      require_finite(out, stage + ".CA");
      if (tr) {
        tr->input = f;
        tr->ca = std::move(r.cache);
      }
      return out;
    }
    case AttentionKind::casa: {
      auto rc = channel_attention(f, *a.ca);
      Tensor4 mid = elementwise(ElementwiseOp::add, f, rc.output);
      require_finite(mid, stage + ".CA");
      auto rs = spatial_attention(mid, *a.sa);
      Tensor4 out = elementwise(ElementwiseOp::add, mid, rs.output);
      require_finite(out, stage + ".SA");
      if (tr) {
        tr->input = f;
        tr->ca = std::move(rc.cache);
        tr->mid = std::move(mid);
        tr->sa = std::move(rs.cache);
      }
      return out;
    }
  }
  return f;
}

Tensor4 attend_backward(const Tensor4& dy, AttentionKind kind, StageAttention& a, const AttentionTrace& tr) {
  Tensor4 d = dy;
  switch (kind) {
    case AttentionKind::none:
      break;
    case AttentionKind::sa:
      accumulate(d, spatial_attention_backward(tr.input, *a.sa, tr.sa, dy));
      break;
    case AttentionKind::ca:
      accumulate(d, channel_attention_backward(tr.input, *a.ca, tr.ca, dy));
      break;
    case AttentionKind::casa: {
      accumulate(d, spatial_attention_backward(tr.mid, *a.sa, tr.sa, dy));
      Tensor4 dmid = d;
      accumulate(d, channel_attention_backward(tr.input, *a.ca, tr.ca, dmid));
      break;
    }
  }
  return d;
}

Tensor4 stage_forward(StageKind kind, const Tensor4& x, const AmsParams& p, const VariantKind& v, StageTrace* tr) {
  Tensor4 normed;
  if (kind == StageKind::in) {
    auto r = instance_norm(x, p.in_params);
    require_finite(r.output, "IN");
    normed = std::move(r.output);
    if (tr) tr->in_stats = std::move(r.stats);
  } else {
    GroupWhitenResult r;
    try {
      r = group_whiten(x, p.whiten_cfg);
    } catch (const NumericalError& e) {
      throw NumericalError("GW." + e.stage(), e.detail(), e.residual());
    }
    require_finite(r.output, "GW");
    normed = std::move(r.output);
    if (tr) tr->gw_stats = std::move(r.stats);
  }
  if (tr) tr->input = x;
  const bool is_in = kind == StageKind::in;
  return attend_forward(normed, is_in ? v.attn_in : v.attn_gw, is_in ? p.in_attention : p.gw_attention,
                        tr ? &tr->attention : nullptr, is_in ? "IN" : "GW");
}

Tensor4 stage_backward(StageKind kind, const Tensor4& dy, AmsParams& p, const VariantKind& v, const StageTrace& tr) {
  const bool is_in = kind == StageKind::in;
  const Tensor4 dnormed =
      attend_backward(dy, is_in ? v.attn_in : v.attn_gw, is_in ? p.in_attention : p.gw_attention, tr.attention);
  if (is_in) return instance_norm_backward(tr.input, p.in_params, tr.in_stats, dnormed);
  return group_whiten_backward(tr.input, p.whiten_cfg, tr.gw_stats, dnormed);
}

}  // namespace

struct AmsBlock::Trace {
  StageTrace in;
  StageTrace gw;
};

namespace {

Tensor4 run_variant(const Tensor4& x, const AmsParams& p, const VariantKind& v, AmsBlock::Trace* tr) {
  StageTrace* in_tr = tr ? &tr->in : nullptr;
  StageTrace* gw_tr = tr ? &tr->gw : nullptr;
  switch (v.combination) {
    case Combination::in_gw:
      return stage_forward(StageKind::gw, stage_forward(StageKind::in, x, p, v, in_tr), p, v, gw_tr);
    case Combination::gw_in:
      return stage_forward(StageKind::in, stage_forward(StageKind::gw, x, p, v, gw_tr), p, v, in_tr);
    case Combination::in_and_gw:
      return elementwise(ElementwiseOp::add, stage_forward(StageKind::in, x, p, v, in_tr),
                         stage_forward(StageKind::gw, x, p, v, gw_tr));
    case Combination::in_xgw: {
      const Tensor4 a = stage_forward(StageKind::in, x, p, v, in_tr);
      return elementwise(ElementwiseOp::add, a, stage_forward(StageKind::gw, a, p, v, gw_tr));
    }
    case Combination::gw_xin: {
      const Tensor4 a = stage_forward(StageKind::gw, x, p, v, gw_tr);
      return elementwise(ElementwiseOp::add, a, stage_forward(StageKind::in, a, p, v, in_tr));
    }
    case Combination::in_only:
      return stage_forward(StageKind::in, x, p, v, in_tr);
    case Combination::gw_only:
      return stage_forward(StageKind::gw, x, p, v, gw_tr);
    case Combination::none:
      return x;
  }
  return x;
}

}  // namespace

Tensor4 variant_forward(const Tensor4& x, const AmsParams& p, const VariantKind& raw) {
  const VariantKind v = raw.normalized();
  p.validate(x.shape().c, v);
  return run_variant(x, p, v, nullptr);
}

Tensor4 ams_forward(const Tensor4& x, const AmsParams& p) { return variant_forward(x, p, VariantKind::canonical()); }

AmsBlock::AmsBlock(AmsParams params, VariantKind variant)
    : params_(std::move(params)), variant_(variant.normalized()), trace_(std::make_unique<Trace>()) {}
AmsBlock::AmsBlock(AmsBlock&&) noexcept = default;
AmsBlock& AmsBlock::operator=(AmsBlock&&) noexcept = default;
AmsBlock::~AmsBlock() = default;

Tensor4 AmsBlock::forward(const Tensor4& x) {
  params_.validate(x.shape().c, variant_);
  return run_variant(x, params_, variant_, trace_.get());
}

Tensor4 AmsBlock::backward(const Tensor4& dy) {
  const Trace& tr = *trace_;
  switch (variant_.combination) {
    case Combination::in_gw:
      return stage_backward(StageKind::in, stage_backward(StageKind::gw, dy, params_, variant_, tr.gw), params_,
                            variant_, tr.in);
    case Combination::gw_in:
      return stage_backward(StageKind::gw, stage_backward(StageKind::in, dy, params_, variant_, tr.in), params_,
                            variant_, tr.gw);
    case Combination::in_and_gw: {
      Tensor4 dx = stage_backward(StageKind::in, dy, params_, variant_, tr.in);
      accumulate(dx, stage_backward(StageKind::gw, dy, params_, variant_, tr.gw));
      return dx;
    }
    case Combination::in_xgw: {
      Tensor4 da = dy;
      accumulate(da, stage_backward(StageKind::gw, dy, params_, variant_, tr.gw));
      return stage_backward(StageKind::in, da, params_, variant_, tr.in);
    }
    case Combination::gw_xin: {
      Tensor4 da = dy;
      accumulate(da, stage_backward(StageKind::in, dy, params_, variant_, tr.in));
      return stage_backward(StageKind::gw, da, params_, variant_, tr.gw);
    }
    case Combination::in_only:
      return stage_backward(StageKind::in, dy, params_, variant_, tr.in);
    case Combination::gw_only:
      return stage_backward(StageKind::gw, dy, params_, variant_, tr.gw);
    case Combination::none:
      return dy;
  }
  return dy;
}

void AmsBlock::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
  if (variant_.has_in()) {
    out.push_back({prefix + "in.gamma", &params_.in_params.gamma});
    out.push_back({prefix + "in.beta", &params_.in_params.beta});
  }
  auto add_stage = [&](StageAttention& a, AttentionKind k, const std::string& stage) {
    if (needs_ca(k)) {
      out.push_back({prefix + stage + ".ca.w1", &a.ca->w1});
      out.push_back({prefix + stage + ".ca.w2", &a.ca->w2});
    }
    if (needs_sa(k)) out.push_back({prefix + stage + ".sa.kernel", &a.sa->kernel});
  };
  add_stage(params_.in_attention, variant_.attn_in, "in");
  add_stage(params_.gw_attention, variant_.attn_gw, "gw");
}

}  // namespace ams

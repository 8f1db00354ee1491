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


#include "ams/harness/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "ams/errors.hpp"
#include "ams/ops.hpp"

namespace ams::harness {

namespace {

void add_into(std::span<double> dst, const Tensor4& src) {
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] += src[i];
}

Tensor4 relu_backward(const Tensor4& out, Tensor4 dy) {
  for (std::size_t i = 0; i < dy.size(); ++i)
    if (out[i] <= 0.0) dy[i] = 0.0;
  return dy;
}

Tensor4 relu(Tensor4 x) {
  for (double& v : x.values()) v = std::max(v, 0.0);
  return x;
}

}  // namespace

Conv::Conv(std::size_t in, std::size_t out, std::size_t k, double init_scale, std::mt19937_64& rng)
    : weight_(Shape4{out, in, k, k}), bias_(Shape4{1, out, 1, 1}) {
  std::normal_distribution<double> dist(0.0, init_scale * std::sqrt(2.0 / static_cast<double>(in * k * k)));
  for (double& w : weight_.values()) w = dist(rng);
}

Tensor4 Conv::forward(const Tensor4& x) {
  input_ = x;
  return elementwise(ElementwiseOp::add, conv2d(x, weight_), bias_);
}

Tensor4 Conv::backward(const Tensor4& dy) {
  add_into(weight_.grad(), conv2d_kernel_grad(input_, dy, weight_.shape()));
  const Shape4& s = dy.shape();
  std::span<double> gb = bias_.grad();
  for (std::size_t b = 0; b < s.b; ++b)
    for (std::size_t c = 0; c < s.c; ++c) {
      const double* p = dy.data() + (b * s.c + c) * s.spatial();
      gb[c] += std::accumulate(p, p + s.spatial(), 0.0);
    }
  return conv2d_input_grad(dy, weight_, input_.shape());
}

void Conv::collect(const std::string& prefix, std::vector<ParamRef>& out) {
  out.push_back({prefix + ".w", &weight_});
  out.push_back({prefix + ".b", &bias_});
}

Bottleneck::Bottleneck(std::size_t in, std::size_t out, std::mt19937_64& rng)
    : reduce_(in, out / 4, 1, 1.0, rng), mid_(out / 4, out / 4, 3, 1.0, rng), expand_(out / 4, out, 1, 0.5, rng) {
  if (in != out) project_.emplace(in, out, 1, 0.5, rng);
}

Tensor4 Bottleneck::forward(const Tensor4& x) {
  a1_ = relu(reduce_.forward(x));
  a2_ = relu(mid_.forward(a1_));
  const Tensor4 shortcut = project_ ? project_->forward(x) : x;
  out_ = relu(elementwise(ElementwiseOp::add, expand_.forward(a2_), shortcut));
  return out_;
}

Tensor4 Bottleneck::backward(const Tensor4& dy) {
  const Tensor4 d = relu_backward(out_, dy);
  const Tensor4 da2 = relu_backward(a2_, expand_.backward(d));
  const Tensor4 da1 = relu_backward(a1_, mid_.backward(da2));
  Tensor4 dx = reduce_.backward(da1);
  accumulate(dx, project_ ? project_->backward(d) : d);
  return dx;
}

void Bottleneck::collect(const std::string& prefix, std::vector<ParamRef>& out) {
  reduce_.collect(prefix + ".reduce", out);
  mid_.collect(prefix + ".mid", out);
  expand_.collect(prefix + ".expand", out);
  if (project_) project_->collect(prefix + ".project", out);
}

struct Model::Stage {
  Bottleneck block;
  std::optional<AmsBlock> ams;
  bool pool_after = false;
  Shape4 pre_pool;
};

std::size_t suggest_group_count(const std::vector<std::size_t>& widths, std::size_t g) {
  for (std::size_t d = std::max<std::size_t>(g, 1); d > 1; --d) {
    if (std::all_of(widths.begin(), widths.end(), [d](std::size_t w) { return w % d == 0; })) return d;
  }
  return 1;
}

Model::Model(const TrainConfig& cfg, std::size_t num_classes, std::mt19937_64& rng)
    : widths_(cfg.widths), num_classes_(num_classes), stem_(3, cfg.stem_width, 3, 1.0, rng) {
  cfg.validate();
  if (num_classes < 2) throw ConfigError("the classifier needs at least two classes");
  const std::set<int> placements(cfg.placements.begin(), cfg.placements.end());
  const VariantKind variant = cfg.variant.normalized();
  const bool uses_ams = variant.combination != Combination::none;

  if (uses_ams && variant.has_gw()) {
    std::vector<std::size_t> placed;
    for (int pl : placements) placed.push_back(widths_[static_cast<std::size_t>(pl - 1)]);
    for (std::size_t i = 0; i < placed.size(); ++i) {
      if (placed[i] % cfg.whiten.group_count != 0) {
        throw ConfigError("AMS placement width C=" + std::to_string(placed[i]) + " is not divisible by g=" +
                          std::to_string(cfg.whiten.group_count) + "; g=" +
                          std::to_string(suggest_group_count(placed, cfg.whiten.group_count)) + " would fit");
      }
    }
  }
  if (uses_ams && placements.count(4)) {
    warnings_.push_back("AMS after stage 4 departs from the three-stage insertion pattern");
  }

  AmsOptions opts;
  opts.in_epsilon = cfg.in_epsilon;
  opts.whiten = cfg.whiten;
  opts.reduction = cfg.reduction;
  opts.sa_kernel = cfg.sa_kernel;

  std::size_t in = cfg.stem_width;
  for (std::size_t s = 0; s < 4; ++s) {
    auto stage = std::unique_ptr<Stage>(new Stage{Bottleneck(in, widths_[s], rng), std::nullopt, s < 3, {}});
    if (uses_ams && placements.count(static_cast<int>(s + 1))) {
      stage->ams.emplace(make_ams_params(widths_[s], variant, opts, rng), variant);
    }
    stages_.push_back(std::move(stage));
    in = widths_[s];
  }
  const std::size_t d = widths_.back();
  head_w_ = Tensor4(Shape4{num_classes, d, 1, 1});
  head_b_ = Tensor4(Shape4{1, num_classes, 1, 1});
  std::normal_distribution<double> dist(0.0, 1.0 / std::sqrt(static_cast<double>(d)));
  for (double& w : head_w_.values()) w = dist(rng);
}

Model::Model(Model&&) noexcept = default;
Model& Model::operator=(Model&&) noexcept = default;
Model::~Model() = default;

ModelOutput Model::forward(const Tensor4& images) {
  if (images.shape().c != 3) throw ShapeError("model expects 3-channel images, got " + images.shape().str());
  stem_out_ = relu(stem_.forward(images));
  Tensor4 h = stem_out_;
  for (std::size_t s = 0; s < stages_.size(); ++s) {
    Stage& st = *stages_[s];
    h = st.block.forward(h);
    if (st.ams) {
      try {
        h = st.ams->forward(h);
      } catch (const NumericalError& e) {
        throw NumericalError("stage" + std::to_string(s + 1) + ".AMS." + e.stage(), e.detail(), e.residual());
      }
    }
    if (st.pool_after) {
      st.pre_pool = h.shape();
      h = avg_pool2x2(h);
    }
  }
  final_shape_ = h.shape();
  const Shape4& f = final_shape_;
  const auto B = static_cast<Eigen::Index>(f.b), D = static_cast<Eigen::Index>(f.c);
  const Eigen::VectorXd means = ConstRowMatrixMap(h.data(), B * D, static_cast<Eigen::Index>(f.spatial())).rowwise().mean();
  pooled_ = ConstRowMatrixMap(means.data(), B, D);
  ModelOutput out;
  out.embedding = pooled_;
  const ConstRowMatrixMap w(head_w_.data(), static_cast<Eigen::Index>(num_classes_), D);
  const ConstRowMatrixMap b(head_b_.data(), 1, static_cast<Eigen::Index>(num_classes_));
  out.logits = pooled_ * w.transpose();
  out.logits.rowwise() += b.row(0);
  return out;
}

void Model::backward(const RowMatrix& d_embedding, const RowMatrix& d_logits) {
  const Shape4& f = final_shape_;
  const auto B = static_cast<Eigen::Index>(f.b), D = static_cast<Eigen::Index>(f.c);
  RowMatrix demb = RowMatrix::Zero(B, D);
  if (d_embedding.size() > 0) demb += d_embedding;
  if (d_logits.size() > 0) {
    const ConstRowMatrixMap w(head_w_.data(), static_cast<Eigen::Index>(num_classes_), D);
    demb += d_logits * w;
    RowMatrixMap gw(head_w_.grad().data(), static_cast<Eigen::Index>(num_classes_), D);
    gw += d_logits.transpose() * pooled_;
    RowMatrixMap gb(head_b_.grad().data(), 1, static_cast<Eigen::Index>(num_classes_));
    gb += d_logits.colwise().sum();
  }
  Tensor4 dh(f);
  const double inv = 1.0 / static_cast<double>(f.spatial());
  for (std::size_t bc = 0; bc < f.b * f.c; ++bc) {
    const double g = demb.data()[bc] * inv;
    std::fill(dh.data() + bc * f.spatial(), dh.data() + (bc + 1) * f.spatial(), g);
  }
  for (std::size_t s = stages_.size(); s-- > 0;) {
    Stage& st = *stages_[s];
    if (st.pool_after) dh = avg_pool2x2_backward(st.pre_pool, dh);
    if (st.ams) dh = st.ams->backward(dh);
    dh = st.block.backward(dh);
  }
  stem_.backward(relu_backward(stem_out_, dh));
}

RowMatrix Model::embed(const Tensor4& images, std::size_t chunk) {
  const Shape4& s = images.shape();
  RowMatrix out(static_cast<Eigen::Index>(s.b), static_cast<Eigen::Index>(embedding_dim()));
  const std::size_t per = s.c * s.spatial();
  for (std::size_t start = 0; start < s.b; start += chunk) {
    const std::size_t n = std::min(chunk, s.b - start);
    std::vector<double> v(images.data() + start * per, images.data() + (start + n) * per);
    const ModelOutput o = forward(Tensor4(Shape4{n, s.c, s.h, s.w}, std::move(v)));
    out.middleRows(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(n)) = o.embedding;
  }
  return out;
}

std::vector<ParamRef> Model::parameters() {
  std::vector<ParamRef> out;
  stem_.collect("stem", out);
  for (std::size_t s = 0; s < stages_.size(); ++s) {
    const std::string name = "stage" + std::to_string(s + 1);
    stages_[s]->block.collect(name, out);
    if (stages_[s]->ams) stages_[s]->ams->collect_params("ams" + std::to_string(s + 1) + ".", out);
  }
  out.push_back({"head.w", &head_w_});
  out.push_back({"head.b", &head_b_});
  return out;
}

void Model::zero_grad() {
  for (const ParamRef& p : parameters()) p.tensor->drop_grad();
}

}  // namespace ams::harness

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


#include "ams/harness/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "ams/errors.hpp"

namespace ams::harness {

namespace {

constexpr double kBackground = 0.5;

std::mt19937_64 seeded(std::initializer_list<std::uint64_t> parts) {
  std::vector<std::uint32_t> words;
  for (std::uint64_t p : parts) {
    words.push_back(static_cast<std::uint32_t>(p));
    words.push_back(static_cast<std::uint32_t>(p >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

// Smooth, zero-mean pattern in roughly [-1, 1] per channel.
double texture_value(std::uint64_t seed, std::size_t c, std::size_t h, std::size_t w, std::size_t height,
                     std::size_t width) {
  auto rng = seeded({seed, c});
  std::uniform_real_distribution<double> freq(0.5, 3.0), phase(0.0, 2.0 * std::numbers::pi);
  double v = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double fh = freq(rng), fw = freq(rng), ph = phase(rng);
    v += std::sin(2.0 * std::numbers::pi * (fh * static_cast<double>(h) / static_cast<double>(height) +
                                fw * static_cast<double>(w) / static_cast<double>(width)) +
                  ph);
  }
  return v / 3.0;
}

void write_raw(const std::string& path, const void* data, std::size_t bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
}

}  // namespace

SyntheticDomainSpec SyntheticDomainSpec::identity_style(std::size_t domain_id) {
  SyntheticDomainSpec s;
  s.domain_id = domain_id;
  return s;
}

bool SyntheticDomainSpec::same_style(const SyntheticDomainSpec& o) const {
  const bool same_texture = texture_amplitude == o.texture_amplitude &&
                            (texture_amplitude == 0.0 || texture_seed == o.texture_seed);
  return illumination == o.illumination && contrast == o.contrast && color_gain == o.color_gain &&
         color_offset == o.color_offset && same_texture;
}

void SyntheticDomainSpec::validate() const {
  if (!(illumination > 0.0) || !(contrast > 0.0)) throw ConfigError("illumination and contrast must be positive");
  for (double g : color_gain)
    if (!(g > 0.0)) throw ConfigError("colour gains must be positive");
  if (!(texture_amplitude >= 0.0) || !(noise_std >= 0.0)) {
    throw ConfigError("texture amplitude and noise must be non-negative");
  }
}

IdentityPrototype make_prototype(std::uint64_t key, std::size_t height, std::size_t width) {
  auto rng = seeded({key, 0x70726f746fULL});
  std::uniform_real_distribution<double> unit(0.0, 1.0), colour(0.05, 0.95);
  const double H = static_cast<double>(height), W = static_cast<double>(width);

  IdentityPrototype p;
  p.key = key;
  p.image = Tensor4(Shape4{1, 3, height, width}, kBackground);
  p.mask = Tensor4(Shape4{1, 1, height, width}, 0.0);

  const std::array<double, 3> skin{0.55 + 0.35 * unit(rng), 0.4 + 0.3 * unit(rng), 0.3 + 0.3 * unit(rng)};
  const std::array<double, 3> upper{colour(rng), colour(rng), colour(rng)};
  const std::array<double, 3> lower{colour(rng), colour(rng), colour(rng)};
  const std::array<double, 3> patch{colour(rng), colour(rng), colour(rng)};
  const double head_end = H * (0.17 + 0.06 * unit(rng));
  const double torso_end = H * (0.5 + 0.12 * unit(rng));
  const double torso_half = W * (0.3 + 0.12 * unit(rng));
  const double leg_gap = W * (0.03 + 0.1 * unit(rng));
  const bool has_patch = unit(rng) < 0.7;
  const bool striped = unit(rng) < 0.35;
  const double patch_top = head_end + (torso_end - head_end) * 0.5 * unit(rng);
  const double patch_h = (torso_end - head_end) * (0.25 + 0.3 * unit(rng));
  const double patch_left = W * 0.5 - torso_half + torso_half * unit(rng);
  const double patch_w = torso_half * (0.5 + 0.5 * unit(rng));

  auto paint = [&](std::size_t h, std::size_t w, const std::array<double, 3>& rgb) {
    for (std::size_t c = 0; c < 3; ++c) p.image.at(0, c, h, w) = rgb[c];
    p.mask.at(0, 0, h, w) = 1.0;
  };
  const double cx = W * 0.5 - 0.5;
  for (std::size_t h = 0; h < height; ++h) {
    const double y = static_cast<double>(h) + 0.5;
    for (std::size_t w = 0; w < width; ++w) {
      const double x = static_cast<double>(w);
      const double dx = x - cx;
      if (y < head_end) {
        const double ry = (y - head_end * 0.5) / (head_end * 0.5), rx = dx / (W * 0.22);
        if (rx * rx + ry * ry <= 1.0) paint(h, w, skin);
      } else if (y < torso_end) {
        if (std::abs(dx) <= torso_half) {
          const bool in_patch = has_patch && y >= patch_top && y < patch_top + patch_h && x >= patch_left &&
                                x < patch_left + patch_w;
          const bool in_stripe = striped && static_cast<int>(y - head_end) % 2 == 1;
          paint(h, w, in_patch || in_stripe ? patch : upper);
        }
      } else if (std::abs(dx) >= leg_gap * 0.5 && std::abs(dx) <= torso_half * 0.9) {
        paint(h, w, lower);
      }
    }
  }
  return p;
}

Tensor4 render(const IdentityPrototype& proto, const SyntheticDomainSpec& spec, const ImageJitter& jitter) {
  const Shape4& s = proto.image.shape();
  Tensor4 out(s);
  std::mt19937_64 noise_rng(jitter.noise_seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const auto H = static_cast<long>(s.h), W = static_cast<long>(s.w);
  for (std::size_t c = 0; c < 3; ++c) {
    const double gain = spec.color_gain[c] * spec.illumination * jitter.brightness;
    for (long h = 0; h < H; ++h) {
      for (long w = 0; w < W; ++w) {
        const long sh = h - jitter.dy, sw = w - jitter.dx;
        const bool inside = sh >= 0 && sh < H && sw >= 0 && sw < W;
        const auto uh = static_cast<std::size_t>(h), uw = static_cast<std::size_t>(w);
        double base;
        if (inside && proto.mask.at(0, 0, static_cast<std::size_t>(sh), static_cast<std::size_t>(sw)) > 0.0) {
          base = proto.image.at(0, c, static_cast<std::size_t>(sh), static_cast<std::size_t>(sw));
        } else {
          base = kBackground;
          if (spec.texture_amplitude > 0.0) {
            base += spec.texture_amplitude * texture_value(spec.texture_seed, c, uh, uw, s.h, s.w);
          }
        }
        double v = gain * (spec.contrast * (base - kBackground) + kBackground) + spec.color_offset[c];
        if (spec.noise_std > 0.0) v += spec.noise_std * noise(noise_rng);
        out.at(0, c, uh, uw) = v;
      }
    }
  }
  return out;
}

Tensor4 SyntheticDataset::image(std::size_t n) const {
  const Shape4& s = images.shape();
  const std::size_t per = s.c * s.spatial();
  std::vector<double> v(images.data() + n * per, images.data() + (n + 1) * per);
  return Tensor4(Shape4{1, s.c, s.h, s.w}, std::move(v));
}

std::vector<SyntheticDomainSpec> default_domain_specs(const DataConfig& cfg) {
  auto rng = seeded({cfg.seed, 0x646f6dULL});
  std::normal_distribution<double> n01(0.0, 1.0);
  std::vector<SyntheticDomainSpec> specs;
  for (std::size_t k = 0; k < cfg.num_domains; ++k) {
    const double s = cfg.style_strength * (k == cfg.test_domain ? cfg.unseen_style_scale : 1.0);
    SyntheticDomainSpec d;
    d.domain_id = k;
    d.illumination = std::exp(0.4 * s * n01(rng));
    d.contrast = std::exp(0.35 * s * n01(rng));
    if (k == cfg.test_domain && cfg.unseen_contrast > 0.0) d.contrast = cfg.unseen_contrast;
    for (double& g : d.color_gain) g = std::exp(0.35 * s * n01(rng));
    for (double& o : d.color_offset) o = 0.15 * s * n01(rng);
    d.texture_seed = rng();
    d.texture_amplitude = cfg.texture_amplitude;
    d.noise_std = cfg.noise_std;
    specs.push_back(d);
  }
  return specs;
}

std::vector<SyntheticDataset> generate_domains(const DataConfig& cfg) {
  return generate_domains(cfg, default_domain_specs(cfg));
}

std::vector<SyntheticDataset> generate_domains(const DataConfig& cfg, const std::vector<SyntheticDomainSpec>& specs) {
  cfg.validate();
  if (specs.size() != cfg.num_domains) throw ConfigError("expected one style spec per domain");
  for (std::size_t a = 0; a < specs.size(); ++a) {
    specs[a].validate();
    for (std::size_t b = 0; b < a; ++b) {
      if (specs[a].same_style(specs[b])) {
        throw ConfigError("domains " + std::to_string(b) + " and " + std::to_string(a) + " have identical styles");
      }
    }
  }

  const std::size_t M = cfg.ids_per_domain, per_id = cfg.images_per_id;
  std::vector<SyntheticDataset> out;
  for (std::size_t k = 0; k < specs.size(); ++k) {
    SyntheticDataset d;
    d.spec = specs[k];
    d.num_ids = M;
    d.images = Tensor4(Shape4{M * per_id, 3, cfg.height, cfg.width});
    const std::size_t per_image = 3 * cfg.height * cfg.width;
    for (std::size_t i = 0; i < M; ++i) {
      const std::uint64_t index = cfg.shared_identities ? i : k * M + i;
      const std::uint64_t key = seeded({cfg.seed, index, 0x6964ULL})();
      const IdentityPrototype proto = make_prototype(key, cfg.height, cfg.width);
      for (std::size_t n = 0; n < per_id; ++n) {
        auto rng = seeded({cfg.seed, k, i, n});
        std::uniform_int_distribution<int> shift(-1, 1);
        std::normal_distribution<double> bright(0.0, 0.05);
        ImageJitter j;
        j.dx = shift(rng);
        j.dy = shift(rng);
        j.brightness = std::exp(bright(rng));
        j.noise_seed = rng();
        const Tensor4 img = render(proto, d.spec, j);
        std::copy(img.values().begin(), img.values().end(), d.images.data() + (i * per_id + n) * per_image);
        d.ids.push_back(static_cast<int>(i));
        d.prototype.push_back(key);
      }
    }
    out.push_back(std::move(d));
  }
  return out;
}

DomainSplit leave_one_out(const std::vector<SyntheticDataset>& domains, std::size_t test_domain) {
  DomainSplit split;
  for (const auto& d : domains) {
    if (d.domain() == test_domain) {
      split.test = &d;
    } else {
      split.train.push_back(&d);
    }
  }
  if (!split.test) throw InputError("held-out domain " + std::to_string(test_domain) + " does not exist");
  for (const auto* d : split.train) {
    if (d->domain() == split.test->domain()) throw InputError("held-out domain leaks into training domains");
  }
  if (split.train.empty()) throw InputError("leave-one-out needs at least one training domain");
  return split;
}

TrainingPool pool_domains(const std::vector<const SyntheticDataset*>& domains) {
  if (domains.empty()) throw InputError("no training domains");
  TrainingPool pool;
  const Shape4 s0 = domains.front()->images.shape();
  std::size_t total = 0;
  for (const auto* d : domains) {
    const Shape4& s = d->images.shape();
    if (s.c != s0.c || s.h != s0.h || s.w != s0.w) throw ShapeError("training domains have different image shapes");
    total += s.b;
  }
  pool.images = Tensor4(Shape4{total, s0.c, s0.h, s0.w});
  std::size_t cursor = 0;
  for (const auto* d : domains) {
    std::copy(d->images.values().begin(), d->images.values().end(), pool.images.data() + cursor);
    cursor += d->images.size();
    for (int id : d->ids) {
      pool.labels.push_back(static_cast<int>(pool.num_classes) + id);
      pool.domain.push_back(d->domain());
    }
    pool.num_classes += d->num_ids;
    pool.domains.push_back(d->domain());
  }
  return pool;
}

nlohmann::json to_json(const SyntheticDomainSpec& spec) {
  return {{"domain", spec.domain_id},
          {"illumination", spec.illumination},
          {"contrast", spec.contrast},
          {"color_gain", spec.color_gain},
          {"color_offset", spec.color_offset},
          {"texture_seed", spec.texture_seed},
          {"texture_amplitude", spec.texture_amplitude},
          {"noise_std", spec.noise_std}};
}

void export_datasets(const std::vector<SyntheticDataset>& domains, const std::string& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["format"] = "ams-synthetic-v1";
  manifest["byte_order"] = "little";
  manifest["domains"] = nlohmann::json::array();
  for (const auto& d : domains) {
    const std::string tag = std::to_string(d.domain());
    const std::string images = "images_" + tag + ".bin", ids = "ids_" + tag + ".bin";
    write_raw(dir + "/" + images, d.images.data(), d.images.size() * sizeof(double));
    std::vector<std::int32_t> id32(d.ids.begin(), d.ids.end());
    write_raw(dir + "/" + ids, id32.data(), id32.size() * sizeof(std::int32_t));
    const Shape4& s = d.images.shape();
    manifest["domains"].push_back({{"style", to_json(d.spec)},
                                   {"num_ids", d.num_ids},
                                   {"images", {{"file", images}, {"dtype", "float64"}, {"shape", {s.b, s.c, s.h, s.w}}}},
                                   {"ids", {{"file", ids}, {"dtype", "int32"}, {"shape", {s.b}}}}});
  }
  std::ofstream out(dir + "/manifest.json");
  if (!out) throw InputError("cannot write manifest in '" + dir + "'");
  out << manifest.dump(2) << "\n";
}

}  // namespace ams::harness

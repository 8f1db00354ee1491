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


#include "ams/harness/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

#include "ams/errors.hpp"

namespace ams::harness {

namespace {

constexpr char kMagic[8] = {'A', 'M', 'S', 'C', 'K', 'P', 'T', '1'};

template <typename T>
void put_le(std::ostream& out, T v) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  in.read(reinterpret_cast<char*>(bytes), sizeof(T));
  if (!in) throw InputError("checkpoint truncated");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T v;
  std::memcpy(&v, bytes, sizeof(T));
  return v;
}

}  // namespace

const Tensor4* Checkpoint::find(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return &t.value;
  return nullptr;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  nlohmann::json header;
  header["format_version"] = 1;
  header["config"] = ckpt.config;
  header["epoch"] = ckpt.epoch;
  header["dtype"] = ckpt.precision == Precision::f32 ? "float32" : "float64";
  header["optimizer_steps"] = ckpt.optimizer_steps;
  header["tensors"] = nlohmann::json::array();
  std::size_t offset = 0;
  for (const auto& t : ckpt.tensors) {
    const Shape4& s = t.value.shape();
    header["tensors"].push_back({{"name", t.name}, {"shape", {s.b, s.c, s.h, s.w}}, {"offset", offset}});
    offset += t.value.size();
  }
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write checkpoint '" + path + "'");
  out.write(kMagic, sizeof(kMagic));
  put_le<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& t : ckpt.tensors) {
    for (double v : t.value.values()) {
      if (ckpt.precision == Precision::f32) {
        put_le<float>(out, static_cast<float>(v));
      } else {
        put_le<double>(out, v);
      }
    }
  }
  if (!out) throw InputError("failed writing checkpoint '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open checkpoint '" + path + "'");
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw InputError("'" + path + "' is not a checkpoint");
  const auto length = get_le<std::uint64_t>(in);
  std::string text(length, '\0');
  in.read(text.data(), static_cast<std::streamsize>(length));
  if (!in) throw InputError("checkpoint header truncated");

  Checkpoint ckpt;
  try {
    const auto header = nlohmann::json::parse(text);
    if (header.at("format_version").get<int>() != 1) throw InputError("unsupported checkpoint version");
    ckpt.config = header.at("config");
    ckpt.epoch = header.at("epoch").get<int>();
    ckpt.precision = parse_precision(header.at("dtype").get<std::string>());
    ckpt.optimizer_steps = header.at("optimizer_steps").get<long>();
    for (const auto& entry : header.at("tensors")) {
      const auto shape = entry.at("shape").get<std::vector<std::size_t>>();
      if (shape.size() != 4) throw InputError("checkpoint tensor shape must have four extents");
      ckpt.tensors.push_back({entry.at("name").get<std::string>(), Tensor4(Shape4{shape[0], shape[1], shape[2], shape[3]})});
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError("malformed checkpoint header: " + std::string(e.what()));
  }
  for (auto& t : ckpt.tensors) {
    for (double& v : t.value.values()) {
      v = ckpt.precision == Precision::f32 ? static_cast<double>(get_le<float>(in)) : get_le<double>(in);
    }
  }
  return ckpt;
}

}  // namespace ams::harness

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

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "ams/harness/config.hpp"
#include "ams/tensor.hpp"

namespace ams::harness {

struct NamedTensor {
  std::string name;
  Tensor4 value;
};

/// Container layout: 8-byte magic "AMSCKPT1", uint64 header length, JSON
/// header, then the tensors back to back as little-endian float64 or float32.
struct Checkpoint {
  nlohmann::json config;
  int epoch = 0;
  Precision precision = Precision::f64;
  long optimizer_steps = 0;
  std::vector<NamedTensor> tensors;  // model parameters, then adam.m/ and adam.v/ moments

  const Tensor4* find(const std::string& name) const;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace ams::harness

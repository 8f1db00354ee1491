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

#include "ams/harness/config.hpp"

namespace ams::harness {

/// Linear warmup from base_lr/100 to base_lr over warmup_epochs, then cosine
/// annealing that reaches final_lr at epoch epochs-1 and stays there.
double lr_at(int epoch, const TrainConfig& cfg);

}  // namespace ams::harness

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

#include <functional>
#include <string>
#include <vector>

namespace ams::harness {

struct CheckResult {
  bool passed = false;
  std::string detail;
};

struct NamedCheck {
  std::string id;
  std::string description;
  std::function<CheckResult()> run;
};

/// Invariant, oracle and gradient suites over the numerical library. Each
/// check carries its own pinned tolerance and independent reference.
std::vector<NamedCheck> invariant_checks();

/// Runs one check; exceptions count as failures and are reported in detail.
CheckResult run_check(const NamedCheck& check);

}  // namespace ams::harness

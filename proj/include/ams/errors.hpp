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

#include <optional>
#include <stdexcept>
#include <string>

namespace ams {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand dimensions are incompatible.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A configuration value is invalid (e.g. group count does not divide channels).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Caller-supplied data violates an operation's precondition.
class InputError : public Error {
 public:
  using Error::Error;
};

// Non-finite values or a failed iterative solve. `stage` names where it
// happened; `residual` is set when a convergence check failed.
class NumericalError : public Error {
 public:
  NumericalError(std::string stage, const std::string& what,
                 std::optional<double> residual = std::nullopt)
      : Error(stage + ": " + what), stage_(std::move(stage)), detail_(what), residual_(residual) {}

  const std::string& stage() const noexcept { return stage_; }
  // The message without the stage prefix.
  const std::string& detail() const noexcept { return detail_; }
  std::optional<double> residual() const noexcept { return residual_; }

 private:
  std::string stage_;
  std::string detail_;
  std::optional<double> residual_;
};

}  // namespace ams

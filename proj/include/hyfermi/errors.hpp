// Copyright 2026 The hyfermi Authors
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

#include <stdexcept>
#include <string>

namespace hyfermi {

// Usage-side failures: bad input, violated preconditions.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct DomainError : ConfigError {
  using ConfigError::ConfigError;
};
struct CapacityError : ConfigError {
  using ConfigError::ConfigError;
};

// Numerical failures: the inputs were fine but the computation was not.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct AccuracyError : NumericalError {
  using NumericalError::NumericalError;
};

}  // namespace hyfermi

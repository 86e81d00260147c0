// Copyright 2026 The pathtrace Authors
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

namespace pathtrace {

// Malformed network, protocol or experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Out-of-domain argument (negative duration, negative occupation, ...).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Non-finite values entered a numerical routine.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Moment matrix violates the uncertainty bound.
class PhysicalityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Error functional applied to a state with the wrong number of modes.
class TaskMismatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Frontier assembly over paths that share no durations.
class GridMismatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pathtrace

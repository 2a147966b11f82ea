// Copyright 2026 The TempoWiC-MoE Authors
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

namespace tempowic {

// Base of every error raised by the library. The CLI maps the concrete
// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad configuration or usage (unknown key, invalid value, dimension mismatch
// between configured components).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input data.
class DataError : public Error {
 public:
  using Error::Error;
};

// A target span would be cut by sequence truncation.
class TargetTruncated : public DataError {
 public:
  using DataError::DataError;
};

// Tensor shapes disagree at a component boundary.
class DimensionError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// Non-finite loss, failed parameter restore, and similar numeric faults.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace tempowic

// Copyright 2026 The StealthPath Authors
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

#ifndef STEALTHPATH_ERROR_H_
#define STEALTHPATH_ERROR_H_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace stealthpath {

enum class ErrorKind {
  kInvalidArgument,
  kIntegrationDiverged,
  kAssumptionViolated,
  kNumericalFailure,
  kConfig,
};

const char* to_string(ErrorKind kind);

// Base exception for all toolkit failures. The kind drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& message)
      : Error(ErrorKind::kInvalidArgument, message) {}
};

// A state became non-finite. Carries the (trajectory, step) location when
// the failure happened inside a batch.
class IntegrationDiverged : public Error {
 public:
  IntegrationDiverged(const std::string& message,
                      std::optional<std::int64_t> trajectory,
                      std::optional<std::int64_t> step);

  std::optional<std::int64_t> trajectory() const { return trajectory_; }
  std::optional<std::int64_t> step() const { return step_; }

 private:
  std::optional<std::int64_t> trajectory_;
  std::optional<std::int64_t> step_;
};

class AssumptionViolated : public Error {
 public:
  explicit AssumptionViolated(const std::string& message)
      : Error(ErrorKind::kAssumptionViolated, message) {}
};

class NumericalFailure : public Error {
 public:
  explicit NumericalFailure(const std::string& message)
      : Error(ErrorKind::kNumericalFailure, message) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message)
      : Error(ErrorKind::kConfig, message) {}
};

}  // namespace stealthpath

#endif  // STEALTHPATH_ERROR_H_

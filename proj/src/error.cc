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

#include "stealthpath/error.h"

namespace stealthpath {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument:
      return "invalid-argument";
    case ErrorKind::kIntegrationDiverged:
      return "integration-diverged";
    case ErrorKind::kAssumptionViolated:
      return "assumption-violated";
    case ErrorKind::kNumericalFailure:
      return "numerical-failure";
    case ErrorKind::kConfig:
      return "config-error";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(message), kind_(kind) {}

namespace {

std::string located(const std::string& message,
                    std::optional<std::int64_t> trajectory,
                    std::optional<std::int64_t> step) {
  std::string out = message;
  if (trajectory || step) {
    out += " (";
    if (trajectory) out += "trajectory " + std::to_string(*trajectory);
    if (trajectory && step) out += ", ";
    if (step) out += "step " + std::to_string(*step);
    out += ")";
  }
  return out;
}

}  // namespace

IntegrationDiverged::IntegrationDiverged(const std::string& message,
                                         std::optional<std::int64_t> trajectory,
                                         std::optional<std::int64_t> step)
    : Error(ErrorKind::kIntegrationDiverged,
            located(message, trajectory, step)),
      trajectory_(trajectory),
      step_(step) {}

}  // namespace stealthpath

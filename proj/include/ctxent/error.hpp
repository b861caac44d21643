// Copyright 2026 The ctxent Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ctxent {

enum class ErrorKind {
  InvalidContext,
  EmptyAlternativeSet,
  DuplicateOutcome,
  UnknownOutcome,
  NegativeProbability,
  NotNormalized,
  ShapeMismatch,
  EmptyKeepSet,
  IndexOutOfRange,
  ConditionOnZeroProbability,
  ContextMismatch,
  MissingConditional,
  InvalidDistribution,
  SameContext,
  InvalidSpec,
  InvalidConfig,
  EmptyBoxReached,
  UnknownAttribute,
};

inline constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidContext: return "InvalidContext";
    case ErrorKind::EmptyAlternativeSet: return "EmptyAlternativeSet";
    case ErrorKind::DuplicateOutcome: return "DuplicateOutcome";
    case ErrorKind::UnknownOutcome: return "UnknownOutcome";
    case ErrorKind::NegativeProbability: return "NegativeProbability";
    case ErrorKind::NotNormalized: return "NotNormalized";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::EmptyKeepSet: return "EmptyKeepSet";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::ConditionOnZeroProbability: return "ConditionOnZeroProbability";
    case ErrorKind::ContextMismatch: return "ContextMismatch";
    case ErrorKind::MissingConditional: return "MissingConditional";
    case ErrorKind::InvalidDistribution: return "InvalidDistribution";
    case ErrorKind::SameContext: return "SameContext";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::EmptyBoxReached: return "EmptyBoxReached";
    case ErrorKind::UnknownAttribute: return "UnknownAttribute";
  }
  return "Unknown";
}

/// Every failure in the library is reported as an Error carrying its kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail,
        std::optional<std::size_t> stage = std::nullopt)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail),
        kind_(kind),
        stage_(stage) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// Stage of an experiment the failure is attached to, when there is one.
  std::optional<std::size_t> stage() const noexcept { return stage_; }

 private:
  ErrorKind kind_;
  std::optional<std::size_t> stage_;
};

}  // namespace ctxent

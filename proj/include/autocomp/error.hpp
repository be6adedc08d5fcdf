// Copyright 2026 The autocomp Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace autocomp {

enum class ErrorCode {
  kInvalidArgument,
  kDuplicateEntry,
  kEmptyVocabulary,
  kMalformedRelationInverse,
  kMalformedVocabulary,
  kInsufficientVocabulary,
  kDuplicateExhaustion,
  kSpanMismatch,
  kArityTooSmall,
  kNotApplicable,
  kBackendUnavailable,
  kProtocolViolation,
  kMockMiss,
  kMalformedScript,
  kIoFailure,
  kInvariantViolation,
  kEmptyCell,
  kConfigError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kDuplicateEntry: return "DuplicateEntry";
    case ErrorCode::kEmptyVocabulary: return "EmptyVocabulary";
    case ErrorCode::kMalformedRelationInverse: return "MalformedRelationInverse";
    case ErrorCode::kMalformedVocabulary: return "MalformedVocabulary";
    case ErrorCode::kInsufficientVocabulary: return "InsufficientVocabulary";
    case ErrorCode::kDuplicateExhaustion: return "DuplicateExhaustion";
    case ErrorCode::kSpanMismatch: return "SpanMismatch";
    case ErrorCode::kArityTooSmall: return "ArityTooSmall";
    case ErrorCode::kNotApplicable: return "NotApplicable";
    case ErrorCode::kBackendUnavailable: return "BackendUnavailable";
    case ErrorCode::kProtocolViolation: return "ProtocolViolation";
    case ErrorCode::kMockMiss: return "MockMiss";
    case ErrorCode::kMalformedScript: return "MalformedScript";
    case ErrorCode::kIoFailure: return "IoFailure";
    case ErrorCode::kInvariantViolation: return "InvariantViolation";
    case ErrorCode::kEmptyCell: return "EmptyCell";
    case ErrorCode::kConfigError: return "ConfigError";
  }
  return "Unknown";
}

inline ErrorCode error_code_from_string(std::string_view name) {
  for (int i = 0; i <= static_cast<int>(ErrorCode::kConfigError); ++i) {
    auto code = static_cast<ErrorCode>(i);
    if (to_string(code) == name) return code;
  }
  return ErrorCode::kProtocolViolation;
}

// All library failures are reported through this exception; `code()` is
// stable and is what the CLI and the wire protocol expose.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace autocomp

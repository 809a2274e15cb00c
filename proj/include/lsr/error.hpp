// Copyright 2026 The lsreward Authors
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

namespace lsr {

// Numeric values are mirrored by lsr_status in lsr.h; keep them in sync.
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kSchema = 2,
  kUnknownKind = 3,
  kMissingParam = 4,
  kDuplicateId = 5,
  kScoringUnavailable = 6,
  kIo = 7,
  kDimensionMismatch = 8,
  kInternal = 9,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised when the soft scorer cannot produce a score. Never a verdict.
class ScoringUnavailable : public Error {
 public:
  explicit ScoringUnavailable(const std::string& message)
      : Error(ErrorCode::kScoringUnavailable, message) {}
};

}  // namespace lsr

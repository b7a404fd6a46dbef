// Copyright 2026 The coeforge Authors
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
#include <string_view>

namespace coeforge {

// Stable error taxonomy. Values are mirrored one-to-one by the C API codes.
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kDegenerateBox = 2,
  kNegativeCoordinate = 3,
  kUnserializableTrajectory = 4,
  kEmptyAfterClamp = 5,
  kEmptyGroundTruth = 6,
  kDimensionMismatch = 7,
  kZeroVector = 8,
  kProviderUnavailable = 9,
  kPageOutOfRange = 10,
  kGroupTooSmall = 11,
  kUnresolvedQueryId = 12,
  kInsufficientCandidates = 13,
  kDecodeError = 14,
  kImageDimensionMismatch = 15,
  kSchemaError = 16,
  kIoError = 17,
};

std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace coeforge

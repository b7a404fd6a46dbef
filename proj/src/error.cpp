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

#include "coeforge/error.hpp"

namespace coeforge {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kDegenerateBox: return "DegenerateBox";
    case ErrorCode::kNegativeCoordinate: return "NegativeCoordinate";
    case ErrorCode::kUnserializableTrajectory: return "UnserializableTrajectory";
    case ErrorCode::kEmptyAfterClamp: return "EmptyAfterClamp";
    case ErrorCode::kEmptyGroundTruth: return "EmptyGroundTruth";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kProviderUnavailable: return "ProviderUnavailable";
    case ErrorCode::kPageOutOfRange: return "PageOutOfRange";
    case ErrorCode::kGroupTooSmall: return "GroupTooSmall";
    case ErrorCode::kUnresolvedQueryId: return "UnresolvedQueryId";
    case ErrorCode::kInsufficientCandidates: return "InsufficientCandidates";
    case ErrorCode::kDecodeError: return "DecodeError";
    case ErrorCode::kImageDimensionMismatch: return "ImageDimensionMismatch";
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace coeforge

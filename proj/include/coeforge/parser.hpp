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

// Response grammar (see docs/response_format.md):
//
//   response     := ws think_block ws answer_block ws
//   think_block  := "<think>" body "</think>"
//   answer_block := "<answer>" body "</answer>"
//
// Evidence objects {"bbox_2d": [x1, y1, x2, y2], "image_index": i} are found
// by a balanced-brace scan keyed on "bbox_2d". Think-body lines are steps.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "coeforge/core.hpp"

namespace coeforge {

enum class Severity { kInfo, kWarning, kFatal };

struct Diagnostic {
  std::string code;
  Severity severity = Severity::kFatal;
  std::string message;
  std::size_t begin = 0;  // byte span in the raw response
  std::size_t end = 0;
};

struct ParseOutcome {
  CoETrajectory trajectory;
  std::vector<Diagnostic> diagnostics;

  bool has(std::string_view code) const noexcept;
};

struct ParseOptions {
  // Treat an answer box absent from the step chain as FATAL.
  bool strict_answer_in_chain = false;
};

inline constexpr std::size_t kMaxResponseBytes = 1u << 20;

ParseOutcome parse_response(std::string_view raw, const ParseOptions& options = {});

// Inverse of parse_response for format_ok trajectories.
// Throws UnserializableTrajectory otherwise.
std::string serialize_trajectory(const CoETrajectory& trajectory);

// Canonical evidence object text, e.g. {"bbox_2d": [1, 2, 3, 4], "image_index": 1}.
std::string format_evidence(const EvidenceRef& ref);

struct ContextEvidencePair {
  std::size_t step = 0;  // owning step ordinal
  std::string text;
  EvidenceRef evidence;
};

// One pair per step evidence ref, in step order (length K).
std::vector<ContextEvidencePair> extract_pairs(const CoETrajectory& trajectory);

}  // namespace coeforge

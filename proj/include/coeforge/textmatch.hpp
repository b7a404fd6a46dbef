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

#include <string>
#include <string_view>
#include <vector>

namespace coeforge {

// Lowercased, punctuation-free, article-free answer tokens.
struct NormalizedAnswer {
  std::vector<std::string> tokens;
  std::string joined;

  bool empty() const noexcept { return tokens.empty(); }
};

// Open-domain QA normalization: lowercase, strip punctuation (ASCII and the
// common Unicode punctuation blocks), drop the articles a/an/the, collapse
// whitespace.
NormalizedAnswer normalize(std::string_view raw);

// Multiset token overlap divided by the gold token count.
// Throws EmptyGroundTruth when the gold answer normalizes to nothing.
double recall(std::string_view answer, std::string_view gold);

// 1 when either normalized string is a substring of the other (both non-empty).
int soft_em(std::string_view answer, std::string_view gold);

bool is_no_answer(std::string_view answer);

}  // namespace coeforge

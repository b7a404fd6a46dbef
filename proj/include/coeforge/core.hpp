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

// Domain types shared by every module. All types are plain values and are
// immutable once constructed through their validating factories.

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace coeforge {

// Axis-aligned pixel rectangle with x1 < x2 and y1 < y2, coordinates >= 0.
// Build through make_box(); the raw aggregate is only for trusted callers.
struct BoundingBox {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  double width() const noexcept { return x2 - x1; }
  double height() const noexcept { return y2 - y1; }
  double area() const noexcept { return width() * height(); }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

// Throws DegenerateBox or NegativeCoordinate.
BoundingBox make_box(double x1, double y1, double x2, double y2);

// Page index is 1-based.
struct EvidenceRef {
  int page_index = 1;
  BoundingBox box;

  friend bool operator==(const EvidenceRef&, const EvidenceRef&) = default;
};

struct ReasoningStep {
  std::string text;
  std::vector<EvidenceRef> evidence;

  friend bool operator==(const ReasoningStep&, const ReasoningStep&) = default;
};

struct CoETrajectory {
  std::vector<ReasoningStep> steps;
  std::string answer_text;
  std::optional<EvidenceRef> answer_evidence;
  std::string raw;
  bool format_ok = false;

  // K: number of evidence refs across all steps.
  std::size_t evidence_count() const noexcept;
  // Whether the answer evidence also appears among the step evidence.
  bool answer_evidence_in_chain() const noexcept;
};

// Structural equality ignoring `raw`.
bool same_structure(const CoETrajectory& a, const CoETrajectory& b);

struct PageRef {
  std::string page_id;
  std::string image_locator;
  int width = 0;
  int height = 0;

  friend bool operator==(const PageRef&, const PageRef&) = default;
};

inline constexpr std::string_view kNoAnswer = "No answer";
inline constexpr int kNoAnswerPos = -1;

// The one place where the 0-based dataset position and the 1-based page index
// meet: gold_page_index = pos_idx + 1.
constexpr int page_index_from_pos(int pos_idx) noexcept { return pos_idx + 1; }
constexpr int pos_from_page_index(int page_index) noexcept { return page_index - 1; }

struct GroundTruthRecord {
  std::string query_id;
  std::string question;
  std::string gold_answer;
  std::optional<int> gold_page_index;
  std::optional<BoundingBox> gold_box;
  std::vector<PageRef> pages;
  int pos_idx = kNoAnswerPos;

  bool answerable() const noexcept { return pos_idx != kNoAnswerPos; }

  // Checks the record invariants; throws SchemaError naming the violation.
  void validate() const;

  friend bool operator==(const GroundTruthRecord&, const GroundTruthRecord&) = default;
};

// Builds an unanswerable record (pos_idx = -1, sentinel answer, no box).
GroundTruthRecord make_unanswerable(std::string query_id, std::string question,
                                    std::vector<PageRef> pages);

// Builds an answerable record with the source at pages[pos_idx].
GroundTruthRecord make_answerable(std::string query_id, std::string question,
                                  std::string gold_answer, BoundingBox gold_box,
                                  std::vector<PageRef> pages, int pos_idx);

struct RewardWeights {
  double acc = 1.0;
  double step = 1.0;
  double ground = 1.0;
  double format = 1.0;

  friend bool operator==(const RewardWeights&, const RewardWeights&) = default;
};

struct RewardConfig {
  double tau = 0.3;      // step similarity threshold
  double delta = 0.5;    // max pairwise overlap threshold
  double epsilon = 0.4;  // accuracy gate
  double gamma = 0.8;    // cold-start recall threshold
  double iou_at = 0.5;   // grounding IoU threshold (strict >)
  RewardWeights weights;
  bool strict_answer_in_chain = false;

  // Throws InvalidArgument when a field is outside its range.
  void validate() const;

  friend bool operator==(const RewardConfig&, const RewardConfig&) = default;
};

struct StepScore {
  std::size_t step = 0;  // 0-based step ordinal
  double cosine = 0.0;

  friend bool operator==(const StepScore&, const StepScore&) = default;
};

struct RewardBreakdown {
  double r_acc = 0.0;
  double r_step = 0.0;
  double r_ground = 0.0;
  double r_format = -1.0;
  double total = -1.0;
  std::optional<double> s_min;
  std::optional<double> i_max;
  std::vector<StepScore> per_step_scores;

  friend bool operator==(const RewardBreakdown&, const RewardBreakdown&) = default;
};

// Sets total from the components and weights, in fixed summation order.
void finalize_total(RewardBreakdown& breakdown, const RewardWeights& weights);

}  // namespace coeforge

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

#include "coeforge/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "coeforge/error.hpp"

namespace coeforge {

BoundingBox make_box(double x1, double y1, double x2, double y2) {
  for (double v : {x1, y1, x2, y2}) {
    if (!std::isfinite(v)) {
      fail(ErrorCode::kDegenerateBox, "box coordinate is not finite");
    }
  }
  if (x1 < 0 || y1 < 0 || x2 < 0 || y2 < 0) {
    std::ostringstream msg;
    msg << "negative coordinate in box [" << x1 << ", " << y1 << ", " << x2 << ", " << y2
        << "]";
    fail(ErrorCode::kNegativeCoordinate, msg.str());
  }
  if (x1 >= x2 || y1 >= y2) {
    std::ostringstream msg;
    msg << "degenerate box [" << x1 << ", " << y1 << ", " << x2 << ", " << y2 << "]";
    fail(ErrorCode::kDegenerateBox, msg.str());
  }
  return BoundingBox{x1, y1, x2, y2};
}

std::size_t CoETrajectory::evidence_count() const noexcept {
  std::size_t k = 0;
  for (const auto& step : steps) k += step.evidence.size();
  return k;
}

bool CoETrajectory::answer_evidence_in_chain() const noexcept {
  if (!answer_evidence) return false;
  for (const auto& step : steps) {
    if (std::find(step.evidence.begin(), step.evidence.end(), *answer_evidence) !=
        step.evidence.end()) {
      return true;
    }
  }
  return false;
}

bool same_structure(const CoETrajectory& a, const CoETrajectory& b) {
  return a.steps == b.steps && a.answer_text == b.answer_text &&
         a.answer_evidence == b.answer_evidence && a.format_ok == b.format_ok;
}

void GroundTruthRecord::validate() const {
  auto bad = [this](const std::string& what) {
    fail(ErrorCode::kSchemaError, "record '" + query_id + "': " + what);
  };
  if (query_id.empty()) bad("empty query_id");
  for (const auto& page : pages) {
    if (page.width <= 0 || page.height <= 0) {
      bad("page '" + page.page_id + "' has non-positive dimensions");
    }
  }
  const bool sentinel = gold_answer == kNoAnswer;
  if (pos_idx == kNoAnswerPos) {
    if (!sentinel) bad("pos_idx = -1 requires gold_answer \"No answer\"");
    if (gold_box) bad("pos_idx = -1 forbids gold_box");
    if (gold_page_index) bad("pos_idx = -1 forbids gold_page_index");
    return;
  }
  if (pos_idx < 0) bad("pos_idx must be >= -1");
  if (sentinel) bad("\"No answer\" requires pos_idx = -1");
  if (!gold_box) bad("answerable record requires gold_box");
  if (static_cast<std::size_t>(pos_idx) >= pages.size()) bad("pos_idx outside pages");
  if (gold_page_index != page_index_from_pos(pos_idx)) {
    bad("gold_page_index must equal pos_idx + 1");
  }
}

GroundTruthRecord make_unanswerable(std::string query_id, std::string question,
                                    std::vector<PageRef> pages) {
  GroundTruthRecord rec;
  rec.query_id = std::move(query_id);
  rec.question = std::move(question);
  rec.gold_answer = std::string(kNoAnswer);
  rec.pages = std::move(pages);
  rec.pos_idx = kNoAnswerPos;
  rec.validate();
  return rec;
}

GroundTruthRecord make_answerable(std::string query_id, std::string question,
                                  std::string gold_answer, BoundingBox gold_box,
                                  std::vector<PageRef> pages, int pos_idx) {
  GroundTruthRecord rec;
  rec.query_id = std::move(query_id);
  rec.question = std::move(question);
  rec.gold_answer = std::move(gold_answer);
  rec.gold_box = gold_box;
  rec.pages = std::move(pages);
  rec.pos_idx = pos_idx;
  rec.gold_page_index = page_index_from_pos(pos_idx);
  rec.validate();
  return rec;
}

void RewardConfig::validate() const {
  auto check = [](bool ok, const char* what) {
    if (!ok) fail(ErrorCode::kInvalidArgument, what);
  };
  check(tau > 0.0 && tau < 1.0, "tau must lie in (0, 1)");
  check(delta > 0.0 && delta <= 1.0, "delta must lie in (0, 1]");
  check(epsilon >= 0.0 && epsilon <= 1.0, "epsilon must lie in [0, 1]");
  check(gamma >= 0.0 && gamma <= 1.0, "gamma must lie in [0, 1]");
  check(iou_at >= 0.0 && iou_at < 1.0, "iou_at must lie in [0, 1)");
  for (double w : {weights.acc, weights.step, weights.ground, weights.format}) {
    check(std::isfinite(w) && w >= 0.0, "reward weights must be finite and >= 0");
  }
}

void finalize_total(RewardBreakdown& b, const RewardWeights& w) {
  b.total = w.acc * b.r_acc + w.step * b.r_step + w.ground * b.r_ground + w.format * b.r_format;
}

}  // namespace coeforge

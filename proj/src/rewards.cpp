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

#include "coeforge/rewards.hpp"

#include <algorithm>

#include "coeforge/error.hpp"
#include "coeforge/geometry.hpp"
#include "coeforge/textmatch.hpp"

namespace coeforge {

Ablation parse_ablation(std::string_view list) {
  Ablation out;
  while (!list.empty()) {
    const auto comma = list.find(',');
    const auto item = list.substr(0, comma);
    if (item == "acc") {
      out.acc = true;
    } else if (item == "step") {
      out.step = true;
    } else if (item == "ground") {
      out.ground = true;
    } else if (item == "format") {
      out.format = true;
    } else if (!item.empty()) {
      fail(ErrorCode::kInvalidArgument, "unknown reward component '" + std::string(item) +
                                            "' (expected acc|step|ground|format)");
    }
    if (comma == std::string_view::npos) break;
    list.remove_prefix(comma + 1);
  }
  return out;
}

double accuracy_reward(std::string_view answer, std::string_view gold) {
  const double r = recall(answer, gold);
  return (static_cast<double>(soft_em(answer, gold)) + r) / 2.0;
}

double max_pairwise_iou_same_page(std::span<const EvidenceRef> refs) noexcept {
  double best = 0.0;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    for (std::size_t j = i + 1; j < refs.size(); ++j) {
      if (refs[i].page_index != refs[j].page_index) continue;
      best = std::max(best, iou(refs[i].box, refs[j].box));
    }
  }
  return best;
}

StepAlignment step_alignment(const CoETrajectory& t, std::span<const PageRef> pages,
                             const EncoderProvider& encoder) {
  StepAlignment out;
  const auto pairs = extract_pairs(t);
  std::vector<EvidenceRef> refs;
  refs.reserve(pairs.size());
  for (const auto& p : pairs) {
    if (p.evidence.page_index < 1 ||
        static_cast<std::size_t>(p.evidence.page_index) > pages.size()) {
      fail(ErrorCode::kPageOutOfRange, "evidence page index " +
                                           std::to_string(p.evidence.page_index) +
                                           " outside 1.." + std::to_string(pages.size()));
    }
    refs.push_back(p.evidence);
  }
  out.box_count = refs.size();
  out.i_max = max_pairwise_iou_same_page(refs);

  for (const auto& p : pairs) {
    const PageRef& page = pages[static_cast<std::size_t>(p.evidence.page_index) - 1];
    double cos = 0.0;
    try {
      const CropRegion region = clamp_to_page(p.evidence.box, page);
      const EmbeddingVector img = encoder.embed_crop(region);
      const EmbeddingVector txt = encoder.embed_text(p.text);
      cos = cosine(img, txt);
    } catch (const Error& err) {
      if (err.code() != ErrorCode::kEmptyAfterClamp && err.code() != ErrorCode::kZeroVector) {
        throw;
      }
    }
    out.per_pair.push_back({p.step, cos});
    out.s_min = out.s_min ? std::min(*out.s_min, cos) : cos;
  }
  return out;
}

double stepwise_reward(std::optional<double> s_min, double i_max, double r_acc,
                       const RewardConfig& cfg) noexcept {
  if (!(r_acc >= cfg.epsilon)) return 0.0;
  const int similar = (s_min && *s_min >= cfg.tau) ? 1 : 0;
  const int diverse = (i_max <= cfg.delta) ? 1 : 0;
  return static_cast<double>(similar + diverse) / 2.0;
}

double grounding_reward(const CoETrajectory& t, const GroundTruthRecord& gt,
                        const RewardConfig& cfg) noexcept {
  if (!gt.answerable()) return is_no_answer(t.answer_text) ? 1.0 : 0.0;
  if (!t.answer_evidence || !gt.gold_box || !gt.gold_page_index) return 0.0;
  if (t.answer_evidence->page_index != *gt.gold_page_index) return 0.0;
  return iou(t.answer_evidence->box, *gt.gold_box) > cfg.iou_at ? 1.0 : 0.0;
}

double format_reward(const CoETrajectory& t) noexcept { return t.format_ok ? 1.0 : -1.0; }

RewardBreakdown score_trajectory(const CoETrajectory& t, const GroundTruthRecord& gt,
                                 const EncoderProvider& encoder, const RewardConfig& cfg,
                                 const Ablation& ablation) {
  RewardBreakdown b;
  b.r_format = ablation.format ? 0.0 : format_reward(t);
  if (t.format_ok) {
    // Alignment is computed even under step ablation so diagnostics stay populated.
    const StepAlignment align = step_alignment(t, gt.pages, encoder);
    const double acc = accuracy_reward(t.answer_text, gt.gold_answer);
    b.r_acc = ablation.acc ? 0.0 : acc;
    // The gate reads the accuracy reward before ablation.
    b.r_step = ablation.step ? 0.0 : stepwise_reward(align.s_min, align.i_max, acc, cfg);
    b.r_ground = ablation.ground ? 0.0 : grounding_reward(t, gt, cfg);
    b.s_min = align.s_min;
    if (align.box_count >= 2) b.i_max = align.i_max;
    b.per_step_scores = align.per_pair;
  }
  finalize_total(b, cfg.weights);
  return b;
}

RewardBreakdown total_reward(std::string_view raw_response, const GroundTruthRecord& gt,
                             const EncoderProvider& encoder, const RewardConfig& cfg,
                             const Ablation& ablation) {
  ParseOptions options;
  options.strict_answer_in_chain = cfg.strict_answer_in_chain;
  const auto parsed = parse_response(raw_response, options);
  return score_trajectory(parsed.trajectory, gt, encoder, cfg, ablation);
}

}  // namespace coeforge

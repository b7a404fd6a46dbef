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

// Rule-based reward suite for Chain-of-Evidence responses:
//
//   r_acc    = (1[soft_em] + recall) / 2
//   r_step   = ((1[S >= tau] + 1[I <= delta]) / 2) * 1[r_acc >= epsilon]
//   r_ground = 1[page matches and IoU(answer box, gold box) > iou_at]
//   r_format = +1 well formed, -1 otherwise
//   total    = r_acc + r_step + r_ground + r_format
//
// S is the minimum crop/step-text cosine over the K context-evidence pairs and
// I the maximum pairwise IoU among step boxes on the same page.

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "coeforge/core.hpp"
#include "coeforge/embedding.hpp"
#include "coeforge/parser.hpp"

namespace coeforge {

// Components forced to zero (used by the simulator's ablation runs).
struct Ablation {
  bool acc = false;
  bool step = false;
  bool ground = false;
  bool format = false;

  bool any() const noexcept { return acc || step || ground || format; }
  friend bool operator==(const Ablation&, const Ablation&) = default;
};

// Parses "acc,step,ground,format" (any subset, comma separated).
Ablation parse_ablation(std::string_view list);

double accuracy_reward(std::string_view answer, std::string_view gold);

struct StepAlignment {
  std::optional<double> s_min;  // absent when K = 0
  double i_max = 0.0;           // 0 when fewer than two boxes
  std::size_t box_count = 0;
  std::vector<StepScore> per_pair;
};

// Throws PageOutOfRange, ProviderUnavailable. A crop entirely off the page, or
// one the encoder cannot embed (zero vector), scores cosine 0.
StepAlignment step_alignment(const CoETrajectory& t, std::span<const PageRef> pages,
                             const EncoderProvider& encoder);

// Max pairwise IoU over evidence refs; pairs on different pages count 0.
double max_pairwise_iou_same_page(std::span<const EvidenceRef> refs) noexcept;

double stepwise_reward(std::optional<double> s_min, double i_max, double r_acc,
                       const RewardConfig& cfg) noexcept;

double grounding_reward(const CoETrajectory& t, const GroundTruthRecord& gt,
                        const RewardConfig& cfg) noexcept;

double format_reward(const CoETrajectory& t) noexcept;

// Scores a parsed trajectory. Malformed trajectories get r_format = -1 and all
// other components 0.
RewardBreakdown score_trajectory(const CoETrajectory& t, const GroundTruthRecord& gt,
                                 const EncoderProvider& encoder, const RewardConfig& cfg,
                                 const Ablation& ablation = {});

RewardBreakdown total_reward(std::string_view raw_response, const GroundTruthRecord& gt,
                             const EncoderProvider& encoder, const RewardConfig& cfg,
                             const Ablation& ablation = {});

}  // namespace coeforge

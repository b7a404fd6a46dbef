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

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "coeforge/core.hpp"
#include "coeforge/embedding.hpp"
#include "coeforge/random.hpp"
#include "coeforge/rewards.hpp"

namespace coeforge {

inline constexpr double kDegenerateStd = 1e-12;

struct GroupAdvantage {
  std::vector<double> advantages;
};

// Group z-score: (r_i - mean) / population std; all zeros when std < 1e-12.
// Throws GroupTooSmall for fewer than two rewards.
GroupAdvantage group_advantage(std::span<const double> rewards);

struct Rollout {
  std::string response;
  RewardBreakdown reward;
};

struct GroupSample {
  std::string query_id;
  std::vector<Rollout> rollouts;

  std::size_t group_size() const noexcept { return rollouts.size(); }
};

enum class TemplateKind {
  kGroundedCorrect,
  kUngroundedCorrect,
  kDuplicatedBox,
  kWrongAnswer,
  kMalformed,
};

std::string_view template_kind_name(TemplateKind kind) noexcept;
TemplateKind parse_template_kind(std::string_view name);

struct TrajectoryTemplate {
  std::string name;
  TemplateKind kind;
  std::string response;  // serialized response text
};

struct SyntheticPage {
  PageRef ref;
  std::vector<TextRegion> regions;
};

// Desk-scale stand-in for a VLM plus its documents: text-region pages, one
// query, and a finite set of response templates.
struct SyntheticWorld {
  std::vector<SyntheticPage> pages;
  GroundTruthRecord query;
  std::vector<TrajectoryTemplate> templates;

  // Mock encoder with every page layout registered.
  std::shared_ptr<MockEncoder> make_encoder(std::size_t dimension) const;

  // Index of the single grounded-correct template. Throws InvalidArgument when
  // the world does not have exactly one, or it does not score total = 4.
  std::size_t validate(const RewardConfig& cfg, std::size_t dimension) const;
};

SyntheticWorld default_world();

nlohmann::json world_to_json(const SyntheticWorld& world);
SyntheticWorld world_from_json(const nlohmann::json& j);

// Softmax policy over template indices.
class TemplatePolicy {
 public:
  TemplatePolicy(std::size_t n_templates, double temperature);

  std::vector<double> probabilities() const;
  std::size_t sample(Rng& rng) const;
  std::size_t modal() const;

  // Ascent step on (1/G) * sum_i a_i * d log p(t_i) / d logits.
  void update(std::span<const std::size_t> sampled, std::span<const double> advantages,
              double learning_rate);

  std::span<const double> logits() const noexcept { return logits_; }
  double temperature() const noexcept { return temperature_; }

 private:
  std::vector<double> logits_;
  double temperature_;
};

struct SimulationOptions {
  int steps = 500;
  std::uint64_t seed = 3407;
  std::size_t group_size = 8;
  double learning_rate = 0.5;
  double temperature = 1.0;
  std::size_t encoder_dim = 256;
  Ablation ablation;
};

struct IterationRecord {
  int iteration = 0;  // 1-based
  double mean_reward = 0.0;
  std::size_t modal_template = 0;
  std::vector<double> probabilities;  // after the update
  std::vector<std::size_t> sampled;
  double sa_pass_rate = 0.0;  // fraction of rollouts with K >= 1 and S >= tau
};

struct SimulationTrace {
  std::vector<std::string> template_names;
  std::vector<IterationRecord> iterations;
  std::vector<double> final_probabilities;
  std::size_t modal_template = 0;

  // Mean SA pass rate over the last `window` iterations.
  double sa_pass_rate_tail(std::size_t window) const;
};

// Throws InvalidArgument for steps < 1 or group_size < 2.
SimulationTrace run_simulation(const SyntheticWorld& world, const RewardConfig& cfg,
                               const SimulationOptions& options);

// Header line plus one JSON object per iteration.
std::string trace_to_jsonl(const SimulationTrace& trace, const SimulationOptions& options,
                           const RewardConfig& cfg);

}  // namespace coeforge

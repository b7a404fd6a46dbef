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

// File-level operations behind the command-line tool and the C API. Each
// returns a process exit status: 0 success, 2 when some rows could not reach
// the encoder. Schema and usage problems throw coeforge::Error.

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "coeforge/core.hpp"
#include "coeforge/error.hpp"
#include "coeforge/grpo.hpp"
#include "coeforge/rewards.hpp"

namespace coeforge {

inline constexpr std::string_view kDefaultEncoder = "mock:256";
inline constexpr std::string_view kVersion = "0.1.0";

struct RunConfig {
  RewardConfig reward;
  std::string encoder{kDefaultEncoder};
  std::size_t concurrency = 8;
  std::uint64_t seed = 3407;
  Ablation ablation;
};

// Overlays a config document ({"reward": {...}, "encoder", "concurrency",
// "seed", "ablate"}) onto base. Throws SchemaError on unknown keys.
RunConfig run_config_from_json(const nlohmann::json& j, RunConfig base = {});
nlohmann::json run_config_to_json(const RunConfig& cfg);

// Echo of every effective setting, written into report headers.
nlohmann::json run_metadata(const RunConfig& cfg, std::string_view command);

// One reward row per prediction, in input order.
int run_score(const std::string& dataset_path, const std::string& predictions_path,
              const std::string& out_path, const RunConfig& cfg);

int run_evaluate(const std::string& dataset_path, const std::string& predictions_path,
                 const std::string& out_path, const RunConfig& cfg);

// Writes the retained candidates to retained_path and the rejection log to
// rejections_path.
int run_filter(const std::string& candidates_path, const std::string& retained_path,
               const std::string& rejections_path, double gamma);

// Sources: {query_id, question, gold_answer, gold_box, source: page};
// retrievals: {query_id, topk: [page, ...]}. Writes a dataset file.
int run_build_candidates(const std::string& sources_path, const std::string& retrievals_path,
                         const std::string& out_path, int m, double no_answer_prob,
                         std::uint64_t seed);

// world_path may be empty for the built-in world.
int run_train_sim(const std::string& world_path, const std::string& out_path,
                  const RunConfig& cfg, const SimulationOptions& options);

// Renders the synthetic corpus into out_dir: pages/*.png with region layouts,
// dataset.jsonl, predictions.jsonl and world.json.
void write_synthetic_corpus(const std::string& out_dir);

// Process exit status for an error escaping a command.
int exit_code_for(ErrorCode code) noexcept;

}  // namespace coeforge

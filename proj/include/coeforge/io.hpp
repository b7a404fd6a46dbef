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

// JSON forms of the domain types and the line-delimited file formats. Every
// file starts with a schema tag line: {"schema": "coeforge.<kind>/v1"}.

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "coeforge/core.hpp"

namespace coeforge {

namespace schema {
inline constexpr std::string_view kDataset = "coeforge.dataset/v1";
inline constexpr std::string_view kPredictions = "coeforge.predictions/v1";
inline constexpr std::string_view kRewards = "coeforge.rewards/v1";
inline constexpr std::string_view kReport = "coeforge.report/v1";
inline constexpr std::string_view kColdStartCandidates = "coeforge.coldstart-candidates/v1";
inline constexpr std::string_view kColdStartRetained = "coeforge.coldstart-retained/v1";
inline constexpr std::string_view kColdStartRejections = "coeforge.coldstart-rejections/v1";
inline constexpr std::string_view kSources = "coeforge.sources/v1";
inline constexpr std::string_view kRetrievals = "coeforge.retrievals/v1";
inline constexpr std::string_view kWorld = "coeforge.world/v1";
inline constexpr std::string_view kTrace = "coeforge.sim-trace/v1";
}  // namespace schema

nlohmann::json box_to_json(const BoundingBox& box);
BoundingBox box_from_json(const nlohmann::json& j);

nlohmann::json page_to_json(const PageRef& page);
PageRef page_from_json(const nlohmann::json& j);

nlohmann::json record_to_json(const GroundTruthRecord& rec);
// Validates the record invariants; throws SchemaError.
GroundTruthRecord record_from_json(const nlohmann::json& j);

nlohmann::json breakdown_to_json(const RewardBreakdown& b);
RewardBreakdown breakdown_from_json(const nlohmann::json& j);

nlohmann::json evidence_to_json(const EvidenceRef& ref);
// {"steps": [{"text", "evidence": [...]}], "answer", "answer_evidence", "format_ok"}
nlohmann::json trajectory_to_json(const CoETrajectory& t);

nlohmann::json config_to_json(const RewardConfig& cfg);
// Overlays the keys present in j onto base.
RewardConfig config_from_json(const nlohmann::json& j, RewardConfig base = {});

// Schema header line followed by one compact JSON object per line.
std::string to_jsonl(std::string_view schema_tag, const std::vector<nlohmann::json>& rows);

// Parses JSONL text. Empty input yields no rows; otherwise the first line must
// carry the expected schema tag. Throws SchemaError naming the line.
std::vector<nlohmann::json> parse_jsonl(std::string_view text, std::string_view schema_tag,
                                        std::string_view source_name = "<input>");

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

std::vector<nlohmann::json> read_jsonl(const std::string& path, std::string_view schema_tag);

// Dataset records; relative image locators are resolved against the dataset
// file's directory when resolve_images is set.
std::vector<GroundTruthRecord> read_dataset(const std::string& path, bool resolve_images = true);
std::string dataset_to_jsonl(const std::vector<GroundTruthRecord>& records);

struct PredictionRecord {
  std::string query_id;
  std::string response;
};

std::vector<PredictionRecord> read_predictions(const std::string& path);
std::string predictions_to_jsonl(const std::vector<PredictionRecord>& predictions);

}  // namespace coeforge

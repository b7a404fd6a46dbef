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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "coeforge/core.hpp"
#include "coeforge/embedding.hpp"
#include "coeforge/io.hpp"

namespace coeforge {

// Maps query ids to records; throws UnresolvedQueryId naming the first
// prediction whose id is unknown.
class RecordIndex {
 public:
  explicit RecordIndex(std::span<const GroundTruthRecord> records);

  const GroundTruthRecord& at(const std::string& query_id) const;
  void check_all(std::span<const PredictionRecord> predictions) const;

 private:
  std::vector<std::pair<std::string, const GroundTruthRecord*>> sorted_;
};

// Per-prediction metric bits. Absent bits are outside that metric's denominator.
struct SampleOutcome {
  std::string query_id;
  bool answerable = true;
  int em_bit = 0;
  std::optional<int> iou_bit;        // answerable records only
  std::optional<int> sa_bit;         // absent when scoring failed
  std::optional<int> no_answer_bit;  // unanswerable records only
  std::optional<RewardBreakdown> reward;
  std::string status = "ok";
  std::optional<std::string> error_code;
  std::string error_message;
};

struct EvalReport {
  std::size_t n_total = 0;
  std::size_t n_answerable = 0;
  std::size_t n_unanswerable = 0;
  std::size_t n_sa = 0;
  std::size_t n_errors = 0;
  double em = 0.0;
  std::optional<double> iou_at_05;
  std::optional<double> sa;
  std::optional<double> no_answer_accuracy;
  std::vector<SampleOutcome> per_sample;
};

// Single-record bits.
int em_bit(std::string_view response, const GroundTruthRecord& gt);
int iou_bit(std::string_view response, const GroundTruthRecord& gt, double threshold = 0.5);
// Throws ProviderUnavailable.
int sa_bit(std::string_view response, const GroundTruthRecord& gt, const EncoderProvider& enc,
           double tau = 0.3);
int no_answer_bit(std::string_view response);

double metric_em(std::span<const PredictionRecord> predictions,
                 std::span<const GroundTruthRecord> gts);
// Absent when no answerable record is present.
std::optional<double> metric_iou_at(std::span<const PredictionRecord> predictions,
                                    std::span<const GroundTruthRecord> gts,
                                    double threshold = 0.5);
std::optional<double> metric_sa(std::span<const PredictionRecord> predictions,
                                std::span<const GroundTruthRecord> gts,
                                const EncoderProvider& enc, double tau = 0.3);
std::optional<double> no_answer_accuracy(std::span<const PredictionRecord> predictions,
                                         std::span<const GroundTruthRecord> gts);

// Recomputes the aggregates from per-sample bits.
EvalReport aggregate(std::vector<SampleOutcome> per_sample);

struct EvalOptions {
  RewardConfig cfg;
  std::size_t concurrency = 8;
};

EvalReport evaluate(std::span<const PredictionRecord> predictions,
                    std::span<const GroundTruthRecord> gts, const EncoderProvider& enc,
                    const EvalOptions& options);

nlohmann::json sample_to_json(const SampleOutcome& s);
SampleOutcome sample_from_json(const nlohmann::json& j);
nlohmann::json report_to_json(const EvalReport& report, const nlohmann::json& metadata);
// Reads per_sample back and re-aggregates.
EvalReport report_from_json(const nlohmann::json& j);

struct ColdStartCandidate {
  std::string id;
  std::string response;
  std::string gold_answer;
};

struct ColdStartRejection {
  std::string id;
  std::string reason;
  std::optional<double> recall;
};

struct ColdStartResult {
  std::vector<ColdStartCandidate> retained;
  std::vector<double> retained_recall;
  std::vector<ColdStartRejection> rejected;
};

// Keeps candidates whose parsed answer has recall >= gamma against the gold.
ColdStartResult cold_start_filter(std::span<const ColdStartCandidate> candidates, double gamma);

struct CandidateSet {
  std::vector<PageRef> pages;
  int pos_idx = kNoAnswerPos;
};

// Multi-image candidate list: with probability no_answer_prob, m negatives and
// pos_idx = -1; otherwise m - 1 negatives with the source at a uniform slot.
// Throws InsufficientCandidates when fewer than m non-source pages exist.
CandidateSet build_candidate_set(const PageRef& source, std::span<const PageRef> retrieved_topk,
                                 int m, double no_answer_prob, std::uint64_t rng_seed);

}  // namespace coeforge

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

#include "coeforge/evalset.hpp"

#include <algorithm>
#include <set>

#include "coeforge/error.hpp"
#include "coeforge/geometry.hpp"
#include "coeforge/parallel.hpp"
#include "coeforge/parser.hpp"
#include "coeforge/random.hpp"
#include "coeforge/rewards.hpp"
#include "coeforge/textmatch.hpp"

namespace coeforge {

using json = nlohmann::json;

RecordIndex::RecordIndex(std::span<const GroundTruthRecord> records) {
  sorted_.reserve(records.size());
  for (const auto& r : records) sorted_.emplace_back(r.query_id, &r);
  std::stable_sort(sorted_.begin(), sorted_.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < sorted_.size(); ++i) {
    if (sorted_[i].first == sorted_[i - 1].first) {
      fail(ErrorCode::kSchemaError, "duplicate query_id '" + sorted_[i].first + "' in dataset");
    }
  }
}

const GroundTruthRecord& RecordIndex::at(const std::string& query_id) const {
  const auto it = std::lower_bound(sorted_.begin(), sorted_.end(), query_id,
                                   [](const auto& e, const std::string& id) { return e.first < id; });
  if (it == sorted_.end() || it->first != query_id) {
    fail(ErrorCode::kUnresolvedQueryId, "unknown query_id '" + query_id + "'");
  }
  return *it->second;
}

void RecordIndex::check_all(std::span<const PredictionRecord> predictions) const {
  for (const auto& p : predictions) at(p.query_id);
}

namespace {

int em_of(const CoETrajectory& t, const GroundTruthRecord& gt) {
  if (!t.format_ok) return 0;
  if (!gt.answerable()) return is_no_answer(t.answer_text) ? 1 : 0;
  return soft_em(t.answer_text, gt.gold_answer);
}

int iou_of(const CoETrajectory& t, const GroundTruthRecord& gt, double threshold) {
  if (!t.format_ok || !t.answer_evidence || !gt.gold_box || !gt.gold_page_index) return 0;
  if (t.answer_evidence->page_index != *gt.gold_page_index) return 0;
  return iou(t.answer_evidence->box, *gt.gold_box) > threshold ? 1 : 0;
}

int no_answer_of(const CoETrajectory& t) {
  return t.format_ok && is_no_answer(t.answer_text) ? 1 : 0;
}

int sa_of(const CoETrajectory& t, const GroundTruthRecord& gt, const EncoderProvider& enc,
          double tau) {
  if (!t.format_ok || t.evidence_count() == 0) return 0;
  try {
    const auto align = step_alignment(t, gt.pages, enc);
    return align.s_min && *align.s_min >= tau ? 1 : 0;
  } catch (const Error& err) {
    if (err.code() == ErrorCode::kPageOutOfRange) return 0;
    throw;
  }
}

bool per_row_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::kProviderUnavailable:
    case ErrorCode::kPageOutOfRange:
    case ErrorCode::kEmptyGroundTruth:
    case ErrorCode::kDecodeError:
    case ErrorCode::kImageDimensionMismatch:
    case ErrorCode::kIoError:
      return true;
    default:
      return false;
  }
}

template <typename Fn>
std::vector<int> bits(std::span<const PredictionRecord> predictions,
                      std::span<const GroundTruthRecord> gts, Fn&& fn) {
  const RecordIndex index(gts);
  index.check_all(predictions);
  std::vector<int> out;
  for (const auto& p : predictions) {
    const auto& gt = index.at(p.query_id);
    const int b = fn(parse_response(p.response).trajectory, gt);
    if (b >= 0) out.push_back(b);
  }
  return out;
}

std::optional<double> mean_of(const std::vector<int>& v) {
  if (v.empty()) return std::nullopt;
  std::size_t sum = 0;
  for (int b : v) sum += static_cast<std::size_t>(b);
  return static_cast<double>(sum) / static_cast<double>(v.size());
}

json optional_int(const std::optional<int>& v) { return v ? json(*v) : json(nullptr); }
json optional_double(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<int> read_optional_int(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  if (!j.at(key).is_number_integer()) {
    fail(ErrorCode::kSchemaError, std::string("per-sample field '") + key + "' must be 0/1");
  }
  return j.at(key).get<int>();
}

}  // namespace

int em_bit(std::string_view response, const GroundTruthRecord& gt) {
  return em_of(parse_response(response).trajectory, gt);
}

int iou_bit(std::string_view response, const GroundTruthRecord& gt, double threshold) {
  return iou_of(parse_response(response).trajectory, gt, threshold);
}

int sa_bit(std::string_view response, const GroundTruthRecord& gt, const EncoderProvider& enc,
           double tau) {
  return sa_of(parse_response(response).trajectory, gt, enc, tau);
}

int no_answer_bit(std::string_view response) {
  return no_answer_of(parse_response(response).trajectory);
}

double metric_em(std::span<const PredictionRecord> predictions,
                 std::span<const GroundTruthRecord> gts) {
  return mean_of(bits(predictions, gts, em_of)).value_or(0.0);
}

std::optional<double> metric_iou_at(std::span<const PredictionRecord> predictions,
                                    std::span<const GroundTruthRecord> gts, double threshold) {
  return mean_of(bits(predictions, gts, [&](const CoETrajectory& t, const GroundTruthRecord& gt) {
    return gt.answerable() ? iou_of(t, gt, threshold) : -1;
  }));
}

std::optional<double> metric_sa(std::span<const PredictionRecord> predictions,
                                std::span<const GroundTruthRecord> gts,
                                const EncoderProvider& enc, double tau) {
  return mean_of(bits(predictions, gts, [&](const CoETrajectory& t, const GroundTruthRecord& gt) {
    return sa_of(t, gt, enc, tau);
  }));
}

std::optional<double> no_answer_accuracy(std::span<const PredictionRecord> predictions,
                                         std::span<const GroundTruthRecord> gts) {
  return mean_of(bits(predictions, gts, [](const CoETrajectory& t, const GroundTruthRecord& gt) {
    return gt.answerable() ? -1 : no_answer_of(t);
  }));
}

EvalReport aggregate(std::vector<SampleOutcome> per_sample) {
  EvalReport r;
  std::vector<int> em, iou_bits, sa_bits, na;
  for (const auto& s : per_sample) {
    em.push_back(s.em_bit);
    if (s.answerable) {
      ++r.n_answerable;
    } else {
      ++r.n_unanswerable;
    }
    if (s.iou_bit) iou_bits.push_back(*s.iou_bit);
    if (s.sa_bit) sa_bits.push_back(*s.sa_bit);
    if (s.no_answer_bit) na.push_back(*s.no_answer_bit);
    if (s.status != "ok") ++r.n_errors;
  }
  r.n_total = per_sample.size();
  r.n_sa = sa_bits.size();
  r.em = mean_of(em).value_or(0.0);
  r.iou_at_05 = mean_of(iou_bits);
  r.sa = mean_of(sa_bits);
  r.no_answer_accuracy = mean_of(na);
  r.per_sample = std::move(per_sample);
  return r;
}

EvalReport evaluate(std::span<const PredictionRecord> predictions,
                    std::span<const GroundTruthRecord> gts, const EncoderProvider& enc,
                    const EvalOptions& options) {
  options.cfg.validate();
  const RecordIndex index(gts);
  index.check_all(predictions);
  ParseOptions parse_options;
  parse_options.strict_answer_in_chain = options.cfg.strict_answer_in_chain;

  auto per_sample = parallel_map<SampleOutcome>(
      predictions.size(), options.concurrency, [&](std::size_t i) {
        const auto& p = predictions[i];
        const auto& gt = index.at(p.query_id);
        const auto t = parse_response(p.response, parse_options).trajectory;
        SampleOutcome s;
        s.query_id = p.query_id;
        s.answerable = gt.answerable();
        s.em_bit = em_of(t, gt);
        if (gt.answerable()) {
          s.iou_bit = iou_of(t, gt, options.cfg.iou_at);
        } else {
          s.no_answer_bit = no_answer_of(t);
        }
        try {
          s.reward = score_trajectory(t, gt, enc, options.cfg);
          s.sa_bit = (t.format_ok && s.reward->s_min && *s.reward->s_min >= options.cfg.tau) ? 1 : 0;
        } catch (const Error& err) {
          if (!per_row_error(err.code())) throw;
          s.status = "error";
          s.error_code = std::string(error_code_name(err.code()));
          s.error_message = err.what();
          if (err.code() == ErrorCode::kPageOutOfRange) s.sa_bit = 0;
        }
        return s;
      });
  return aggregate(std::move(per_sample));
}

json sample_to_json(const SampleOutcome& s) {
  json j{{"query_id", s.query_id},
         {"answerable", s.answerable},
         {"em_bit", s.em_bit},
         {"iou_bit", optional_int(s.iou_bit)},
         {"sa_bit", optional_int(s.sa_bit)},
         {"no_answer_bit", optional_int(s.no_answer_bit)},
         {"status", s.status},
         {"reward", s.reward ? breakdown_to_json(*s.reward) : json(nullptr)}};
  if (s.error_code) j["error"] = {{"code", *s.error_code}, {"message", s.error_message}};
  return j;
}

SampleOutcome sample_from_json(const json& j) {
  if (!j.is_object() || !j.contains("query_id") || !j.at("query_id").is_string() ||
      !j.contains("em_bit") || !j.at("em_bit").is_number_integer()) {
    fail(ErrorCode::kSchemaError, "per-sample entry needs query_id and em_bit");
  }
  SampleOutcome s;
  s.query_id = j.at("query_id").get<std::string>();
  s.em_bit = j.at("em_bit").get<int>();
  s.iou_bit = read_optional_int(j, "iou_bit");
  s.sa_bit = read_optional_int(j, "sa_bit");
  s.no_answer_bit = read_optional_int(j, "no_answer_bit");
  s.answerable = j.contains("answerable") ? j.at("answerable").get<bool>() : !s.no_answer_bit;
  if (j.contains("status") && j.at("status").is_string()) s.status = j.at("status").get<std::string>();
  if (j.contains("reward") && !j.at("reward").is_null()) s.reward = breakdown_from_json(j.at("reward"));
  if (j.contains("error") && j.at("error").is_object()) {
    s.error_code = j.at("error").value("code", "");
    s.error_message = j.at("error").value("message", "");
  }
  for (const auto& bit : {std::optional<int>(s.em_bit), s.iou_bit, s.sa_bit, s.no_answer_bit}) {
    if (bit && *bit != 0 && *bit != 1) fail(ErrorCode::kSchemaError, "metric bits must be 0 or 1");
  }
  return s;
}

json report_to_json(const EvalReport& r, const json& metadata) {
  json samples = json::array();
  for (const auto& s : r.per_sample) samples.push_back(sample_to_json(s));
  return json{{"schema", schema::kReport},
              {"metadata", metadata},
              {"n_total", r.n_total},
              {"em", r.em},
              {"iou_at_05", optional_double(r.iou_at_05)},
              {"sa", optional_double(r.sa)},
              {"no_answer_accuracy", optional_double(r.no_answer_accuracy)},
              {"denominators",
               {{"em", r.n_total},
                {"iou_at_05", r.n_answerable},
                {"sa", r.n_sa},
                {"no_answer", r.n_unanswerable}}},
              {"n_errors", r.n_errors},
              {"per_sample", std::move(samples)}};
}

EvalReport report_from_json(const json& j) {
  if (!j.is_object() || !j.contains("schema") || j.at("schema") != schema::kReport) {
    fail(ErrorCode::kSchemaError, "report must carry schema " + std::string(schema::kReport));
  }
  if (!j.contains("per_sample") || !j.at("per_sample").is_array()) {
    fail(ErrorCode::kSchemaError, "report lacks a per_sample array");
  }
  std::vector<SampleOutcome> samples;
  for (const auto& s : j.at("per_sample")) samples.push_back(sample_from_json(s));
  return aggregate(std::move(samples));
}

ColdStartResult cold_start_filter(std::span<const ColdStartCandidate> candidates, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) fail(ErrorCode::kInvalidArgument, "gamma must lie in [0, 1]");
  ColdStartResult out;
  for (const auto& c : candidates) {
    const auto parsed = parse_response(c.response);
    if (!parsed.trajectory.format_ok) {
      std::string codes;
      for (const auto& d : parsed.diagnostics) {
        if (d.severity != Severity::kFatal) continue;
        if (!codes.empty()) codes += ",";
        codes += d.code;
      }
      out.rejected.push_back({c.id, "unparseable: " + codes, std::nullopt});
      continue;
    }
    double r = 0.0;
    try {
      r = recall(parsed.trajectory.answer_text, c.gold_answer);
    } catch (const Error& err) {
      out.rejected.push_back({c.id, std::string(error_code_name(err.code())), std::nullopt});
      continue;
    }
    if (r >= gamma) {
      out.retained.push_back(c);
      out.retained_recall.push_back(r);
    } else {
      out.rejected.push_back({c.id, "recall below gamma", r});
    }
  }
  return out;
}

CandidateSet build_candidate_set(const PageRef& source, std::span<const PageRef> retrieved_topk,
                                 int m, double no_answer_prob, std::uint64_t rng_seed) {
  if (m < 1) fail(ErrorCode::kInvalidArgument, "m must be >= 1");
  if (!(no_answer_prob >= 0.0 && no_answer_prob <= 1.0)) {
    fail(ErrorCode::kInvalidArgument, "no_answer_prob must lie in [0, 1]");
  }
  std::vector<PageRef> pool;
  std::set<std::string> seen{source.page_id};
  for (const auto& p : retrieved_topk) {
    if (seen.insert(p.page_id).second) pool.push_back(p);
  }
  if (pool.size() < static_cast<std::size_t>(m)) {
    fail(ErrorCode::kInsufficientCandidates,
         "need " + std::to_string(m) + " non-source candidates for '" + source.page_id +
             "', have " + std::to_string(pool.size()));
  }

  Rng rng(rng_seed);
  const bool no_answer = bernoulli(rng, no_answer_prob);
  const std::size_t draws = no_answer ? static_cast<std::size_t>(m) : static_cast<std::size_t>(m - 1);
  // Partial Fisher-Yates: the first `draws` slots become the sample.
  for (std::size_t i = 0; i < draws; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(uniform_index(rng, pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  CandidateSet out;
  out.pages.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(draws));
  if (no_answer) {
    out.pos_idx = kNoAnswerPos;
    return out;
  }
  const auto p = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(m)));
  out.pages.insert(out.pages.begin() + p, source);
  out.pos_idx = p;
  return out;
}

}  // namespace coeforge

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

#include "coeforge/commands.hpp"

#include <atomic>
#include <map>

#include "coeforge/embedding.hpp"
#include "coeforge/error.hpp"
#include "coeforge/evalset.hpp"
#include "coeforge/io.hpp"
#include "coeforge/parallel.hpp"
#include "coeforge/parser.hpp"

namespace coeforge {

using json = nlohmann::json;

namespace {

// JSON integers parsed from text are unsigned when positive, but documents
// built in code may carry signed ones.
bool non_negative_integer(const json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

std::string ablation_list(const Ablation& a) {
  std::string out;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out.push_back(',');
    out += name;
  };
  add(a.acc, "acc");
  add(a.step, "step");
  add(a.ground, "ground");
  add(a.format, "format");
  return out;
}

std::string header_line(std::string_view schema_tag, const json& metadata) {
  std::string out = json{{"schema", schema_tag}, {"metadata", metadata}}.dump();
  out.push_back('\n');
  return out;
}

bool row_level(ErrorCode code) {
  switch (code) {
    case ErrorCode::kProviderUnavailable:
    case ErrorCode::kPageOutOfRange:
    case ErrorCode::kDecodeError:
    case ErrorCode::kImageDimensionMismatch:
    case ErrorCode::kEmptyGroundTruth:
    case ErrorCode::kIoError:
      return true;
    default:
      return false;
  }
}

}  // namespace

RunConfig run_config_from_json(const json& j, RunConfig base) {
  if (!j.is_object()) fail(ErrorCode::kSchemaError, "config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "reward") {
      base.reward = config_from_json(value, base.reward);
    } else if (key == "encoder") {
      if (!value.is_string()) fail(ErrorCode::kSchemaError, "encoder must be a string");
      base.encoder = value.get<std::string>();
    } else if (key == "concurrency") {
      if (!non_negative_integer(value) || value.get<std::size_t>() == 0) {
        fail(ErrorCode::kSchemaError, "concurrency must be a positive integer");
      }
      base.concurrency = value.get<std::size_t>();
    } else if (key == "seed") {
      if (!non_negative_integer(value)) fail(ErrorCode::kSchemaError, "seed must be a non-negative integer");
      base.seed = value.get<std::uint64_t>();
    } else if (key == "ablate") {
      if (!value.is_string()) fail(ErrorCode::kSchemaError, "ablate must be a comma list string");
      base.ablation = parse_ablation(value.get<std::string>());
    } else if (key == "schema") {
      continue;
    } else {
      fail(ErrorCode::kSchemaError, "unknown config key '" + key + "'");
    }
  }
  return base;
}

json run_config_to_json(const RunConfig& cfg) {
  return json{{"reward", config_to_json(cfg.reward)},
              {"encoder", cfg.encoder},
              {"concurrency", cfg.concurrency},
              {"seed", cfg.seed},
              {"ablate", ablation_list(cfg.ablation)}};
}

json run_metadata(const RunConfig& cfg, std::string_view command) {
  // Concurrency is left out: it never changes the output bytes.
  return json{{"tool", "coeforge"},
              {"version", kVersion},
              {"command", command},
              {"encoder", cfg.encoder},
              {"seed", cfg.seed},
              {"ablate", ablation_list(cfg.ablation)},
              {"config", config_to_json(cfg.reward)}};
}

int exit_code_for(ErrorCode code) noexcept {
  return code == ErrorCode::kProviderUnavailable ? 2 : 1;
}

int run_score(const std::string& dataset_path, const std::string& predictions_path,
              const std::string& out_path, const RunConfig& cfg) {
  cfg.reward.validate();
  const auto records = read_dataset(dataset_path);
  const auto predictions = read_predictions(predictions_path);
  const RecordIndex index(records);
  index.check_all(predictions);
  const auto encoder = make_encoder(cfg.encoder);

  std::atomic<bool> unreachable{false};
  const auto rows = parallel_map<json>(predictions.size(), cfg.concurrency, [&](std::size_t i) {
    const auto& p = predictions[i];
    json row{{"query_id", p.query_id}};
    try {
      const auto b = total_reward(p.response, index.at(p.query_id), *encoder, cfg.reward,
                                  cfg.ablation);
      row["status"] = "ok";
      row["reward"] = breakdown_to_json(b);
    } catch (const Error& err) {
      if (!row_level(err.code())) throw;
      if (err.code() == ErrorCode::kProviderUnavailable) unreachable = true;
      row["status"] = "error";
      row["reward"] = nullptr;
      row["error"] = {{"code", error_code_name(err.code())}, {"message", err.what()}};
    }
    return row;
  });

  std::string out = header_line(schema::kRewards, run_metadata(cfg, "score"));
  for (const auto& row : rows) {
    out += row.dump();
    out.push_back('\n');
  }
  write_text_file(out_path, out);
  return unreachable ? 2 : 0;
}

int run_evaluate(const std::string& dataset_path, const std::string& predictions_path,
                 const std::string& out_path, const RunConfig& cfg) {
  const auto records = read_dataset(dataset_path);
  const auto predictions = read_predictions(predictions_path);
  const auto encoder = make_encoder(cfg.encoder);
  EvalOptions options;
  options.cfg = cfg.reward;
  options.concurrency = cfg.concurrency;
  const auto report = evaluate(predictions, records, *encoder, options);
  write_text_file(out_path, report_to_json(report, run_metadata(cfg, "evaluate")).dump(2) + "\n");
  for (const auto& s : report.per_sample) {
    if (s.error_code && *s.error_code == error_code_name(ErrorCode::kProviderUnavailable)) return 2;
  }
  return 0;
}

int run_filter(const std::string& candidates_path, const std::string& retained_path,
               const std::string& rejections_path, double gamma) {
  std::vector<ColdStartCandidate> candidates;
  for (const auto& row : read_jsonl(candidates_path, schema::kColdStartCandidates)) {
    if (!row.contains("id") || !row.at("id").is_string() || !row.contains("response") ||
        !row.at("response").is_string() || !row.contains("gold_answer") ||
        !row.at("gold_answer").is_string()) {
      fail(ErrorCode::kSchemaError,
           candidates_path + ": candidate rows need string id, response and gold_answer");
    }
    candidates.push_back({row.at("id").get<std::string>(), row.at("response").get<std::string>(),
                          row.at("gold_answer").get<std::string>()});
  }
  const auto result = cold_start_filter(candidates, gamma);

  std::vector<json> kept;
  for (std::size_t i = 0; i < result.retained.size(); ++i) {
    const auto& c = result.retained[i];
    kept.push_back({{"id", c.id},
                    {"response", c.response},
                    {"gold_answer", c.gold_answer},
                    {"recall", result.retained_recall[i]}});
  }
  std::vector<json> dropped;
  for (const auto& r : result.rejected) {
    dropped.push_back(
        {{"id", r.id}, {"reason", r.reason}, {"recall", r.recall ? json(*r.recall) : json(nullptr)}});
  }
  write_text_file(retained_path, to_jsonl(schema::kColdStartRetained, kept));
  write_text_file(rejections_path, to_jsonl(schema::kColdStartRejections, dropped));
  return 0;
}

int run_build_candidates(const std::string& sources_path, const std::string& retrievals_path,
                         const std::string& out_path, int m, double no_answer_prob,
                         std::uint64_t seed) {
  std::map<std::string, std::vector<PageRef>> topk;
  for (const auto& row : read_jsonl(retrievals_path, schema::kRetrievals)) {
    if (!row.contains("query_id") || !row.at("query_id").is_string() || !row.contains("topk") ||
        !row.at("topk").is_array()) {
      fail(ErrorCode::kSchemaError, retrievals_path + ": rows need query_id and a topk array");
    }
    auto& pages = topk[row.at("query_id").get<std::string>()];
    for (const auto& p : row.at("topk")) pages.push_back(page_from_json(p));
  }

  std::vector<GroundTruthRecord> records;
  const auto sources = read_jsonl(sources_path, schema::kSources);
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const auto& row = sources[i];
    for (const char* key : {"query_id", "question", "gold_answer"}) {
      if (!row.contains(key) || !row.at(key).is_string()) {
        fail(ErrorCode::kSchemaError,
             sources_path + ": source " + std::to_string(i + 1) + " lacks string '" + key + "'");
      }
    }
    if (!row.contains("gold_box") || !row.contains("source")) {
      fail(ErrorCode::kSchemaError,
           sources_path + ": source " + std::to_string(i + 1) + " needs gold_box and source");
    }
    const auto id = row.at("query_id").get<std::string>();
    const auto it = topk.find(id);
    if (it == topk.end()) {
      fail(ErrorCode::kUnresolvedQueryId, "no retrievals for query_id '" + id + "'");
    }
    const PageRef source = page_from_json(row.at("source"));
    const auto set = build_candidate_set(source, it->second, m, no_answer_prob, mix_seed(seed, i));
    if (set.pos_idx == kNoAnswerPos) {
      records.push_back(make_unanswerable(id, row.at("question").get<std::string>(), set.pages));
    } else {
      records.push_back(make_answerable(id, row.at("question").get<std::string>(),
                                        row.at("gold_answer").get<std::string>(),
                                        box_from_json(row.at("gold_box")), set.pages, set.pos_idx));
    }
  }
  write_text_file(out_path, dataset_to_jsonl(records));
  return 0;
}

int run_train_sim(const std::string& world_path, const std::string& out_path,
                  const RunConfig& cfg, const SimulationOptions& options) {
  const SyntheticWorld world = world_path.empty()
                                   ? default_world()
                                   : world_from_json([&] {
                                       auto j = json::parse(read_text_file(world_path), nullptr, false);
                                       if (j.is_discarded()) {
                                         fail(ErrorCode::kSchemaError, world_path + ": not JSON");
                                       }
                                       return j;
                                     }());
  const auto trace = run_simulation(world, cfg.reward, options);
  write_text_file(out_path, trace_to_jsonl(trace, options, cfg.reward));
  return 0;
}

}  // namespace coeforge

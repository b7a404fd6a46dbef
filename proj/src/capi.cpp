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

#include "coeforge/coeforge.h"

#include <cstring>
#include <memory>
#include <new>
#include <string>

#include "coeforge/commands.hpp"
#include "coeforge/embedding.hpp"
#include "coeforge/error.hpp"
#include "coeforge/evalset.hpp"
#include "coeforge/grpo.hpp"
#include "coeforge/io.hpp"
#include "coeforge/parser.hpp"
#include "coeforge/rewards.hpp"

using coeforge::ErrorCode;
using json = nlohmann::json;

struct coe_engine {
  coeforge::RunConfig config;
  std::shared_ptr<coeforge::EncoderProvider> encoder;
};

namespace {

thread_local std::string g_last_error;

coe_status to_status(ErrorCode code) { return static_cast<coe_status>(static_cast<int>(code)); }

template <typename Fn>
coe_status guarded(Fn&& fn) {
  g_last_error.clear();
  try {
    fn();
    return COE_OK;
  } catch (const coeforge::Error& err) {
    g_last_error = err.what();
    return to_status(err.code());
  } catch (const json::exception& err) {
    g_last_error = err.what();
    return COE_SCHEMA_ERROR;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return COE_INTERNAL;
  } catch (const std::exception& err) {
    g_last_error = err.what();
    return COE_INTERNAL;
  }
}

void require(const void* p, const char* name) {
  if (p == nullptr) coeforge::fail(ErrorCode::kInvalidArgument, std::string(name) + " is NULL");
}

char* dup_string(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

json parse_json(const char* text, const char* what) {
  auto j = json::parse(text, nullptr, false);
  if (j.is_discarded()) coeforge::fail(ErrorCode::kSchemaError, std::string(what) + " is not valid JSON");
  return j;
}

std::vector<coeforge::GroundTruthRecord> records_from_text(const char* text) {
  std::vector<coeforge::GroundTruthRecord> out;
  for (const auto& row : coeforge::parse_jsonl(text, coeforge::schema::kDataset, "<dataset>")) {
    out.push_back(coeforge::record_from_json(row));
  }
  return out;
}

std::vector<coeforge::PredictionRecord> predictions_from_text(const char* text) {
  std::vector<coeforge::PredictionRecord> out;
  for (const auto& row :
       coeforge::parse_jsonl(text, coeforge::schema::kPredictions, "<predictions>")) {
    if (!row.contains("query_id") || !row.at("query_id").is_string() ||
        !row.contains("response") || !row.at("response").is_string()) {
      coeforge::fail(ErrorCode::kSchemaError, "prediction rows need string query_id and response");
    }
    out.push_back({row.at("query_id").get<std::string>(), row.at("response").get<std::string>()});
  }
  return out;
}

const char* severity_name(coeforge::Severity s) {
  switch (s) {
    case coeforge::Severity::kInfo:
      return "info";
    case coeforge::Severity::kWarning:
      return "warning";
    case coeforge::Severity::kFatal:
      return "fatal";
  }
  return "fatal";
}

}  // namespace

extern "C" {

const char* coe_version(void) { return coeforge::kVersion.data(); }

const char* coe_status_name(coe_status status) {
  switch (status) {
    case COE_OK:
      return "Ok";
    case COE_INTERNAL:
      return "Internal";
    default:
      break;
  }
  const int v = static_cast<int>(status);
  if (v >= 1 && v <= static_cast<int>(ErrorCode::kIoError)) {
    return coeforge::error_code_name(static_cast<ErrorCode>(v)).data();
  }
  return "Unknown";
}

const char* coe_last_error_message(void) { return g_last_error.c_str(); }

void coe_string_free(char* s) { std::free(s); }

coe_status coe_engine_create(const char* config_json, coe_engine** out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    auto engine = std::make_unique<coe_engine>();
    if (config_json != nullptr && *config_json != '\0') {
      engine->config = coeforge::run_config_from_json(parse_json(config_json, "config"));
    }
    engine->config.reward.validate();
    engine->encoder = coeforge::make_encoder(engine->config.encoder);
    *out = engine.release();
  });
}

void coe_engine_destroy(coe_engine* engine) { delete engine; }

coe_status coe_engine_config(const coe_engine* engine, char** out_json) {
  return guarded([&] {
    require(engine, "engine");
    require(out_json, "out_json");
    *out_json = dup_string(coeforge::run_config_to_json(engine->config).dump());
  });
}

coe_status coe_score(const coe_engine* engine, const char* response, const char* record_json,
                     char** out_json) {
  return guarded([&] {
    require(engine, "engine");
    require(response, "response");
    require(record_json, "record_json");
    require(out_json, "out_json");
    const auto record = coeforge::record_from_json(parse_json(record_json, "record"));
    const auto b = coeforge::total_reward(response, record, *engine->encoder,
                                          engine->config.reward, engine->config.ablation);
    *out_json = dup_string(coeforge::breakdown_to_json(b).dump());
  });
}

coe_status coe_group_advantage(const double* rewards, size_t n, double* out) {
  return guarded([&] {
    require(rewards, "rewards");
    require(out, "out");
    const auto adv = coeforge::group_advantage(std::span<const double>(rewards, n));
    std::copy(adv.advantages.begin(), adv.advantages.end(), out);
  });
}

coe_status coe_parse_response(const char* response, int strict_answer_in_chain, char** out_json) {
  return guarded([&] {
    require(response, "response");
    require(out_json, "out_json");
    coeforge::ParseOptions options;
    options.strict_answer_in_chain = strict_answer_in_chain != 0;
    const auto parsed = coeforge::parse_response(response, options);
    json diags = json::array();
    for (const auto& d : parsed.diagnostics) {
      diags.push_back({{"code", d.code},
                       {"severity", severity_name(d.severity)},
                       {"message", d.message},
                       {"span", {d.begin, d.end}}});
    }
    *out_json = dup_string(
        json{{"trajectory", coeforge::trajectory_to_json(parsed.trajectory)}, {"diagnostics", diags}}
            .dump());
  });
}

coe_status coe_evaluate(const coe_engine* engine, const char* dataset_jsonl,
                        const char* predictions_jsonl, char** out_json) {
  return guarded([&] {
    require(engine, "engine");
    require(dataset_jsonl, "dataset_jsonl");
    require(predictions_jsonl, "predictions_jsonl");
    require(out_json, "out_json");
    const auto records = records_from_text(dataset_jsonl);
    const auto predictions = predictions_from_text(predictions_jsonl);
    coeforge::EvalOptions options;
    options.cfg = engine->config.reward;
    options.concurrency = engine->config.concurrency;
    const auto report = coeforge::evaluate(predictions, records, *engine->encoder, options);
    *out_json = dup_string(
        coeforge::report_to_json(report, coeforge::run_metadata(engine->config, "evaluate")).dump());
  });
}

coe_status coe_run_score(const coe_engine* engine, const char* dataset_path,
                         const char* predictions_path, const char* out_path, int* exit_code) {
  return guarded([&] {
    require(engine, "engine");
    require(dataset_path, "dataset_path");
    require(predictions_path, "predictions_path");
    require(out_path, "out_path");
    require(exit_code, "exit_code");
    *exit_code = coeforge::run_score(dataset_path, predictions_path, out_path, engine->config);
  });
}

coe_status coe_run_evaluate(const coe_engine* engine, const char* dataset_path,
                            const char* predictions_path, const char* out_path, int* exit_code) {
  return guarded([&] {
    require(engine, "engine");
    require(dataset_path, "dataset_path");
    require(predictions_path, "predictions_path");
    require(out_path, "out_path");
    require(exit_code, "exit_code");
    *exit_code = coeforge::run_evaluate(dataset_path, predictions_path, out_path, engine->config);
  });
}

coe_status coe_run_filter(const char* candidates_path, const char* retained_path,
                          const char* rejections_path, double gamma, int* exit_code) {
  return guarded([&] {
    require(candidates_path, "candidates_path");
    require(retained_path, "retained_path");
    require(rejections_path, "rejections_path");
    require(exit_code, "exit_code");
    *exit_code = coeforge::run_filter(candidates_path, retained_path, rejections_path, gamma);
  });
}

coe_status coe_run_build_candidates(const char* sources_path, const char* retrievals_path,
                                    const char* out_path, int m, double no_answer_prob,
                                    uint64_t seed, int* exit_code) {
  return guarded([&] {
    require(sources_path, "sources_path");
    require(retrievals_path, "retrievals_path");
    require(out_path, "out_path");
    require(exit_code, "exit_code");
    *exit_code = coeforge::run_build_candidates(sources_path, retrievals_path, out_path, m,
                                                no_answer_prob, seed);
  });
}

coe_status coe_run_train_sim(const coe_engine* engine, const char* world_path,
                             const char* out_path, const char* options_json, int* exit_code) {
  return guarded([&] {
    require(engine, "engine");
    require(out_path, "out_path");
    require(exit_code, "exit_code");
    coeforge::SimulationOptions options;
    options.seed = engine->config.seed;
    options.ablation = engine->config.ablation;
    if (options_json != nullptr && *options_json != '\0') {
      const auto j = parse_json(options_json, "options");
      if (!j.is_object()) coeforge::fail(ErrorCode::kSchemaError, "options must be an object");
      for (const auto& [key, value] : j.items()) {
        if (key == "steps") {
          options.steps = value.get<int>();
        } else if (key == "group_size") {
          options.group_size = value.get<std::size_t>();
        } else if (key == "learning_rate") {
          options.learning_rate = value.get<double>();
        } else if (key == "temperature") {
          options.temperature = value.get<double>();
        } else if (key == "encoder_dim") {
          options.encoder_dim = value.get<std::size_t>();
        } else {
          coeforge::fail(ErrorCode::kSchemaError, "unknown simulation option '" + key + "'");
        }
      }
    }
    *exit_code = coeforge::run_train_sim(world_path ? world_path : "", out_path, engine->config,
                                         options);
  });
}

coe_status coe_write_synthetic_corpus(const char* out_dir) {
  return guarded([&] {
    require(out_dir, "out_dir");
    coeforge::write_synthetic_corpus(out_dir);
  });
}

}  // extern "C"

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

/* C interface to the coeforge reward library.
 *
 * Every function returns a coe_status. On failure the thread-local message is
 * available from coe_last_error_message(). Strings returned through out
 * parameters are owned by the caller and released with coe_string_free().
 */
#ifndef COEFORGE_COEFORGE_H_
#define COEFORGE_COEFORGE_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define COE_API __declspec(dllexport)
#else
#define COE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum coe_status {
  COE_OK = 0,
  COE_INVALID_ARGUMENT = 1,
  COE_DEGENERATE_BOX = 2,
  COE_NEGATIVE_COORDINATE = 3,
  COE_UNSERIALIZABLE_TRAJECTORY = 4,
  COE_EMPTY_AFTER_CLAMP = 5,
  COE_EMPTY_GROUND_TRUTH = 6,
  COE_DIMENSION_MISMATCH = 7,
  COE_ZERO_VECTOR = 8,
  COE_PROVIDER_UNAVAILABLE = 9,
  COE_PAGE_OUT_OF_RANGE = 10,
  COE_GROUP_TOO_SMALL = 11,
  COE_UNRESOLVED_QUERY_ID = 12,
  COE_INSUFFICIENT_CANDIDATES = 13,
  COE_DECODE_ERROR = 14,
  COE_IMAGE_DIMENSION_MISMATCH = 15,
  COE_SCHEMA_ERROR = 16,
  COE_IO_ERROR = 17,
  COE_INTERNAL = 99
} coe_status;

typedef struct coe_engine coe_engine;

COE_API const char* coe_version(void);

/* Name of a status code, e.g. "PageOutOfRange". Never NULL. */
COE_API const char* coe_status_name(coe_status status);

/* Message of the last failed call on this thread; empty when none. */
COE_API const char* coe_last_error_message(void);

COE_API void coe_string_free(char* s);

/* config_json: {"reward": {...}, "encoder": "mock:256" | URL, ...}; NULL or
 * empty selects the defaults. The configuration is fixed for the engine's
 * lifetime; an engine may be shared across threads. */
COE_API coe_status coe_engine_create(const char* config_json, coe_engine** out);
COE_API void coe_engine_destroy(coe_engine* engine);

/* Effective configuration as JSON. */
COE_API coe_status coe_engine_config(const coe_engine* engine, char** out_json);

/* Scores one response against a ground-truth record (dataset row JSON).
 * Writes the reward breakdown as JSON. */
COE_API coe_status coe_score(const coe_engine* engine, const char* response,
                             const char* record_json, char** out_json);

/* Group-normalized advantages; out must hold n doubles. */
COE_API coe_status coe_group_advantage(const double* rewards, size_t n, double* out);

/* Parses a response into {"trajectory": ..., "diagnostics": [...]}. */
COE_API coe_status coe_parse_response(const char* response, int strict_answer_in_chain,
                                      char** out_json);

/* Metrics over predictions/dataset JSONL text (with schema tag lines).
 * Writes the evaluation report JSON. */
COE_API coe_status coe_evaluate(const coe_engine* engine, const char* dataset_jsonl,
                                const char* predictions_jsonl, char** out_json);

/* File commands; exit_code receives the command-line exit status. */
COE_API coe_status coe_run_score(const coe_engine* engine, const char* dataset_path,
                                 const char* predictions_path, const char* out_path,
                                 int* exit_code);
COE_API coe_status coe_run_evaluate(const coe_engine* engine, const char* dataset_path,
                                    const char* predictions_path, const char* out_path,
                                    int* exit_code);
COE_API coe_status coe_run_filter(const char* candidates_path, const char* retained_path,
                                  const char* rejections_path, double gamma, int* exit_code);
COE_API coe_status coe_run_build_candidates(const char* sources_path,
                                            const char* retrievals_path, const char* out_path,
                                            int m, double no_answer_prob, uint64_t seed,
                                            int* exit_code);
/* world_path may be NULL or empty for the built-in world. options_json:
 * {"steps", "group_size", "learning_rate", "temperature", "encoder_dim"};
 * seed and ablation come from the engine configuration. */
COE_API coe_status coe_run_train_sim(const coe_engine* engine, const char* world_path,
                                     const char* out_path, const char* options_json,
                                     int* exit_code);
COE_API coe_status coe_write_synthetic_corpus(const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* COEFORGE_COEFORGE_H_ */

/* Copyright 2026 The lsreward Authors
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to the lsreward engine.
 *
 * Every entry point returns an lsr_status. On failure the message is
 * available from lsr_last_error() on the calling thread until the next call.
 * Strings handed out through char** parameters are owned by the caller and
 * released with lsr_string_free(). An lsr_engine is immutable after creation
 * and may be shared between threads.
 *
 * Paths given to the *_stream functions may be "-" for stdin/stdout.
 */

#ifndef LSR_LSR_H_
#define LSR_LSR_H_

#include <stddef.h>

#if defined(LSR_BUILDING_LIBRARY)
#define LSR_API __attribute__((visibility("default")))
#else
#define LSR_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lsr_status {
  LSR_OK = 0,
  LSR_INVALID_ARGUMENT = 1,
  LSR_SCHEMA = 2,
  LSR_UNKNOWN_KIND = 3,
  LSR_MISSING_PARAM = 4,
  LSR_DUPLICATE_ID = 5,
  LSR_SCORING_UNAVAILABLE = 6,
  LSR_IO = 7,
  LSR_DIMENSION_MISMATCH = 8,
  LSR_INTERNAL = 9
} lsr_status;

typedef struct lsr_engine lsr_engine;

typedef struct lsr_config {
  double gamma;                   /* sequential decay, [0, 1) */
  double trigger_threshold;       /* (0, 1] */
  double soft_binarize_threshold; /* (0, 1) */
  double advantage_eps;           /* > 0 */
  const char* soft_scorer_url;    /* NULL or "": no HTTP scorer */
  const char* mock_soft_rules;    /* JSON rule list; overrides the URL when set */
  size_t jobs;                    /* worker threads for streams, >= 1 */
  int strict;                     /* abort streams on the first bad row */
} lsr_config;

LSR_API const char* lsr_version(void);
LSR_API const char* lsr_last_error(void);
LSR_API const char* lsr_status_name(lsr_status status);
LSR_API void lsr_string_free(char* s);

/* Fills defaults: gamma 0.5, threshold 1.0, binarize 0.5, eps 1e-6, jobs 1. */
LSR_API void lsr_config_init(lsr_config* config);

/* A NULL config uses the defaults above. */
LSR_API lsr_status lsr_engine_create(const lsr_config* config, lsr_engine** out);
LSR_API void lsr_engine_destroy(lsr_engine* engine);

/* Single hard-constraint check. params_json may be NULL ("{}"). */
LSR_API lsr_status lsr_verify(const lsr_engine* engine, const char* kind, const char* params_json,
                              const char* response, const char* instruction, int* verdict,
                              char** detail);

/* Scores one tree document. trace_json (nullable) receives the same line the
 * score stream writes for this input. */
LSR_API lsr_status lsr_score_tree(const lsr_engine* engine, const char* tree_json,
                                  const char* response, const char* instruction,
                                  double* root_reward, char** trace_json);

/* Batch form of lsr_score_tree. instructions and traces_out may be NULL.
 * On error nothing is written to traces_out. */
LSR_API lsr_status lsr_score_batch(const lsr_engine* engine, const char* const* tree_docs,
                                   const char* const* responses, const char* const* instructions,
                                   size_t count, double* rewards_out, char** traces_out);

/* Advantages for consecutive chunks of group_size rewards. */
LSR_API lsr_status lsr_group_advantages(const double* rewards, size_t count, size_t group_size,
                                        double eps, double* advantages_out);

/* JSONL streams; summary_json (nullable) receives counts and warnings. */
LSR_API lsr_status lsr_score_stream(const lsr_engine* engine, const char* input_path,
                                    const char* output_path, char** summary_json);
LSR_API lsr_status lsr_verify_stream(const lsr_engine* engine, const char* input_path,
                                     const char* output_path, char** summary_json);
LSR_API lsr_status lsr_advantages_stream(const lsr_engine* engine, const char* input_path,
                                         const char* output_path, char** summary_json);

/* Builds instruction records from a seed JSONL file. options_json keys:
 * mode ("template" | "llm"), seed, structures, records_per_seed,
 * parallel_width, soft_fraction, concurrency. */
LSR_API lsr_status lsr_build_dataset(const char* seeds_path, const char* output_path,
                                     const char* options_json, char** summary_json);

/* Per-structure table; format is "tsv" or "json". */
LSR_API lsr_status lsr_dataset_stats(const char* input_path, const char* format, char** table,
                                     char** summary_json);

/* Parameter change report between two dump directories. */
LSR_API lsr_status lsr_change_report(const char* before_dir, const char* after_dir,
                                     const char* format, char** report);

/* Ranked saliency deltas between two attribution dumps. */
LSR_API lsr_status lsr_saliency_report(const char* before_dir, const char* after_dir,
                                       const char* format, char** report);

#ifdef __cplusplus
}
#endif

#endif /* LSR_LSR_H_ */

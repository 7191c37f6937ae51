// Copyright 2026 The evoqa Authors
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

/* Stable C interface to the evoqa engine. Complex inputs and outputs are
 * UTF-8 JSON strings using the same record schemas as the ndjson files.
 * Strings returned through `char** out` parameters are owned by the caller
 * and released with evq_string_free. Every function returning evq_status
 * leaves a message for the calling thread in evq_last_error() on failure. */

#ifndef EVOQA_EVOQA_H_
#define EVOQA_EVOQA_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define EVQ_API __declspec(dllexport)
#else
#define EVQ_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum evq_status {
  EVQ_OK = 0,
  EVQ_INVALID_ARGUMENT = 1,
  EVQ_PARSE_ERROR = 2,
  EVQ_DUPLICATE_DOC_ID = 3,
  EVQ_DUPLICATE_QID = 4,
  EVQ_DOMAIN_ERROR = 5,
  EVQ_MALFORMED_TRANSCRIPT = 6,
  EVQ_LENGTH_MISMATCH = 7,
  EVQ_EMPTY_GROUP = 8,
  EVQ_BACKEND_UNAVAILABLE = 9,
  EVQ_CONTRACT_VIOLATION = 10,
  EVQ_EMPTY_CURRICULUM = 11,
  EVQ_IO_ERROR = 12,
  EVQ_INTERNAL = 13
} evq_status;

typedef enum evq_rollout_scheme {
  EVQ_SCHEME_GRPO_NESTED = 0,
  EVQ_SCHEME_HRPO = 1
} evq_rollout_scheme;

typedef struct evq_corpus evq_corpus;
typedef struct evq_index evq_index;
typedef struct evq_service evq_service;

EVQ_API const char* evq_version(void);
/* "Ok", "InvalidArgument", "ParseError", ... */
EVQ_API const char* evq_status_name(evq_status status);
/* Message of the calling thread's most recent failure, or "". */
EVQ_API const char* evq_last_error(void);
EVQ_API void evq_string_free(char* s);
/* "trace", "debug", "info", "warn", "error" or "off". */
EVQ_API evq_status evq_set_log_level(const char* level);

/* Corpus: line-delimited {doc_id, title, text} records. */
EVQ_API evq_status evq_corpus_load(const char* path, evq_corpus** out);
EVQ_API evq_status evq_corpus_parse(const char* ndjson, size_t len, evq_corpus** out);
EVQ_API size_t evq_corpus_size(const evq_corpus* corpus);
EVQ_API void evq_corpus_free(evq_corpus* corpus);

/* config_json may be NULL for defaults: {k1, b, top_k, scorer,
 * embedder_endpoint}. The index keeps its own reference to the corpus. */
EVQ_API evq_status evq_index_build(const evq_corpus* corpus, const char* config_json,
                                   evq_index** out);
EVQ_API size_t evq_index_size(const evq_index* index);
EVQ_API evq_status evq_index_digest(const evq_index* index, char** out);
EVQ_API void evq_index_free(evq_index* index);

/* {query_list, top_k?} -> {results, tool_response} */
EVQ_API evq_status evq_search(const evq_index* index, const char* request_json, char** out);

/* Scalar helpers. */
EVQ_API evq_status evq_difficulty_reward(int k, int n, double* out);
EVQ_API evq_status evq_exact_match(const char* prediction, const char* gold,
                                   const char* match_json, int* out);
EVQ_API evq_status evq_rollout_budget(evq_rollout_scheme scheme, int m, int n, int64_t* out);
EVQ_API evq_status evq_apportion_hops(int batch_size, const int ratio[4], int out[4]);

/* {trajectories, answers, match?} -> {rewards} */
EVQ_API evq_status evq_reward(const char* request_json, char** out);
/* {grouping, records | groups, delta?, variance_mode?, beta?, epsilon_clip?}
 * -> {entries, delta, variance_mode, beta, epsilon_clip} */
EVQ_API evq_status evq_advantage(const char* request_json, char** out);
/* {prompt | messages, policy, config?, seed?, sample_index?, episode_id?}
 * -> episode record. index may be NULL for policies that never search. */
EVQ_API evq_status evq_rollout(const evq_index* index, const char* request_json, char** out);

/* Runs or resumes a self-evolution run. config_json carries the run
 * settings plus "proposer_policy" and "solver_policy". Returns the run
 * report; status EVQ_EMPTY_CURRICULUM is returned together with the report
 * when the solver phase had nothing to train on. */
EVQ_API evq_status evq_evolve(const evq_index* index, const char* config_json, char** report);

/* Toy co-evolution. config_json may be NULL. Either output may be NULL. */
EVQ_API evq_status evq_toyco_run(const char* config_json, char** csv, char** summary_json);

/* {bench | bench_path, policy, config?, match?, parallelism?, seed?}
 * -> {per_dataset, overall_mean, items, match, csv, table} */
EVQ_API evq_status evq_eval(const evq_index* index, const char* request_json, char** out);

/* {host, port, auth_token?, parallelism?, match?, policy_endpoint?,
 * policy_token?}. The service holds its own reference to the index. */
EVQ_API evq_status evq_service_start(const evq_index* index, const char* config_json,
                                     evq_service** out);
EVQ_API int evq_service_port(const evq_service* service);
EVQ_API void evq_service_stop(evq_service* service);
EVQ_API void evq_service_free(evq_service* service);

#ifdef __cplusplus
}
#endif

#endif /* EVOQA_EVOQA_H_ */

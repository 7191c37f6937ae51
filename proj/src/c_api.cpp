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

#include "evoqa/evoqa.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "api.hpp"
#include "evoqa/bench_eval.hpp"
#include "evoqa/evolve.hpp"
#include "evoqa/log.hpp"
#include "evoqa/service.hpp"
#include "evoqa/toyco.hpp"
#include "wire.hpp"

struct evq_corpus {
  evoqa::Corpus corpus;
};

struct evq_index {
  evoqa::SearchIndex index;
};

struct evq_service {
  std::unique_ptr<evoqa::Service> service;
};

namespace {

using evoqa::ErrorCode;
using evoqa::wire::json;

thread_local std::string g_last_error;

evq_status ToStatus(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return EVQ_INVALID_ARGUMENT;
    case ErrorCode::kParseError: return EVQ_PARSE_ERROR;
    case ErrorCode::kDuplicateDocId: return EVQ_DUPLICATE_DOC_ID;
    case ErrorCode::kDuplicateQid: return EVQ_DUPLICATE_QID;
    case ErrorCode::kDomainError: return EVQ_DOMAIN_ERROR;
    case ErrorCode::kMalformedTranscript: return EVQ_MALFORMED_TRANSCRIPT;
    case ErrorCode::kLengthMismatch: return EVQ_LENGTH_MISMATCH;
    case ErrorCode::kEmptyGroup: return EVQ_EMPTY_GROUP;
    case ErrorCode::kBackendUnavailable: return EVQ_BACKEND_UNAVAILABLE;
    case ErrorCode::kContractViolation: return EVQ_CONTRACT_VIOLATION;
    case ErrorCode::kEmptyCurriculum: return EVQ_EMPTY_CURRICULUM;
    case ErrorCode::kIoError: return EVQ_IO_ERROR;
    case ErrorCode::kInternal: return EVQ_INTERNAL;
  }
  return EVQ_INTERNAL;
}

template <typename Fn>
evq_status Guard(Fn&& fn) {
  try {
    g_last_error.clear();
    return fn();
  } catch (const evoqa::Error& e) {
    g_last_error = e.what();
    return ToStatus(e.code());
  } catch (const json::exception& e) {
    g_last_error = e.what();
    return EVQ_PARSE_ERROR;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return EVQ_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return EVQ_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return EVQ_INTERNAL;
  }
}

void Need(const void* p, const char* what) {
  if (p == nullptr) {
    throw evoqa::Error(ErrorCode::kInvalidArgument, std::string(what) + " is NULL");
  }
}

char* Dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

json ParseRequest(const char* text) {
  Need(text, "request");
  return evoqa::wire::Parse(text);
}

evq_status Emit(const json& j, char** out) {
  Need(out, "out");
  *out = Dup(j.dump());
  return EVQ_OK;
}

evoqa::ToyConfig ToyConfigFromJson(const json& j) {
  namespace w = evoqa::wire;
  w::CheckKeys(j,
               {"iterations", "proposer_steps", "solver_steps", "batch_size", "n", "seed",
                "proposer_lr", "solver_lr", "a", "b", "c", "delta", "boundary_window"},
               "toyco config");
  evoqa::ToyConfig c;
  c.iterations = w::GetInt(j, "iterations", c.iterations);
  c.proposer_steps = w::GetInt(j, "proposer_steps", c.proposer_steps);
  c.solver_steps = w::GetInt(j, "solver_steps", c.solver_steps);
  c.batch_size = w::GetInt(j, "batch_size", c.batch_size);
  c.n = w::GetInt(j, "n", c.n);
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) {
      throw evoqa::Error(ErrorCode::kParseError, "seed must be a non-negative integer");
    }
    c.seed = j["seed"].get<std::uint64_t>();
  }
  c.proposer_lr = w::GetDouble(j, "proposer_lr", c.proposer_lr);
  c.solver_lr = w::GetDouble(j, "solver_lr", c.solver_lr);
  c.a = w::GetDouble(j, "a", c.a);
  c.b = w::GetDouble(j, "b", c.b);
  c.c = w::GetDouble(j, "c", c.c);
  c.delta = w::GetDouble(j, "delta", c.delta);
  c.boundary_window = w::GetInt(j, "boundary_window", c.boundary_window);
  evoqa::Validate(c);
  return c;
}

json ToyJson(const evoqa::ToyReport& r) {
  json phases = json::array();
  for (const auto& p : r.phases) {
    phases.push_back({{"iteration", p.iteration},
                      {"phase", evoqa::PhaseName(p.phase)},
                      {"start_reward", p.start_reward},
                      {"end_reward", p.end_reward},
                      {"start_E_d", p.start_difficulty},
                      {"end_E_d", p.end_difficulty}});
  }
  return {{"episodes", r.episodes},
          {"steps", r.steps.size()},
          {"phases", std::move(phases)},
          {"final",
           {{"skill", r.solver.skill},
            {"E_d", r.proposer.ExpectedDifficulty()},
            {"E_h", r.proposer.ExpectedHop()},
            {"policy", r.proposer.Policy()}}}};
}

json EvalJson(const evoqa::EvalReport& r) {
  json per = json::array();
  for (const auto& d : r.per_dataset) {
    per.push_back({{"dataset", d.dataset}, {"n_items", d.n_items}, {"em_mean", d.em_mean}});
  }
  json items = json::array();
  for (const auto& it : r.items) {
    json j = {{"qid", it.qid},
              {"dataset", it.dataset},
              {"prediction", it.prediction},
              {"em", it.em},
              {"failed", it.failed}};
    if (it.failed) j["error"] = it.error;
    items.push_back(std::move(j));
  }
  return {{"per_dataset", std::move(per)},
          {"overall_mean", r.overall_mean},
          {"items", std::move(items)},
          {"match", evoqa::wire::ToJson(r.match)},
          {"csv", r.Csv()},
          {"table", r.Table()}};
}

evoqa::SearchIndex IndexFor(const evq_index* index, const json& cfg) {
  if (index != nullptr) return index->index;
  if (!cfg.contains("corpus")) {
    throw evoqa::Error(ErrorCode::kInvalidArgument, "no index handle and no \"corpus\" path");
  }
  const evoqa::IndexConfig ic = cfg.contains("index")
                                    ? evoqa::wire::IndexConfigFromJson(cfg["index"])
                                    : evoqa::IndexConfig{};
  return evoqa::SearchIndex::Build(
      evoqa::Corpus::Load(evoqa::wire::GetString(cfg, "corpus")), ic);
}

}  // namespace

extern "C" {

const char* evq_version(void) { return EVOQA_VERSION; }

const char* evq_status_name(evq_status status) {
  switch (status) {
    case EVQ_OK: return "Ok";
    case EVQ_INVALID_ARGUMENT: return "InvalidArgument";
    case EVQ_PARSE_ERROR: return "ParseError";
    case EVQ_DUPLICATE_DOC_ID: return "DuplicateDocId";
    case EVQ_DUPLICATE_QID: return "DuplicateQid";
    case EVQ_DOMAIN_ERROR: return "DomainError";
    case EVQ_MALFORMED_TRANSCRIPT: return "MalformedTranscript";
    case EVQ_LENGTH_MISMATCH: return "LengthMismatch";
    case EVQ_EMPTY_GROUP: return "EmptyGroup";
    case EVQ_BACKEND_UNAVAILABLE: return "BackendUnavailable";
    case EVQ_CONTRACT_VIOLATION: return "ContractViolation";
    case EVQ_EMPTY_CURRICULUM: return "EmptyCurriculum";
    case EVQ_IO_ERROR: return "IoError";
    case EVQ_INTERNAL: return "Internal";
  }
  return "Unknown";
}

const char* evq_last_error(void) { return g_last_error.c_str(); }

void evq_string_free(char* s) { std::free(s); }

evq_status evq_set_log_level(const char* level) {
  return Guard([&] {
    Need(level, "level");
    evoqa::SetLogLevel(level);
    return EVQ_OK;
  });
}

evq_status evq_corpus_load(const char* path, evq_corpus** out) {
  return Guard([&] {
    Need(path, "path");
    Need(out, "out");
    *out = new evq_corpus{evoqa::Corpus::Load(path)};
    return EVQ_OK;
  });
}

evq_status evq_corpus_parse(const char* ndjson, size_t len, evq_corpus** out) {
  return Guard([&] {
    Need(ndjson, "ndjson");
    Need(out, "out");
    *out = new evq_corpus{evoqa::Corpus::Parse(std::string_view(ndjson, len))};
    return EVQ_OK;
  });
}

size_t evq_corpus_size(const evq_corpus* corpus) {
  return corpus == nullptr ? 0 : corpus->corpus.size();
}

void evq_corpus_free(evq_corpus* corpus) { delete corpus; }

evq_status evq_index_build(const evq_corpus* corpus, const char* config_json, evq_index** out) {
  return Guard([&] {
    Need(corpus, "corpus");
    Need(out, "out");
    evoqa::IndexConfig cfg;
    if (config_json != nullptr) cfg = evoqa::wire::IndexConfigFromJson(ParseRequest(config_json));
    *out = new evq_index{evoqa::SearchIndex::Build(corpus->corpus, cfg)};
    return EVQ_OK;
  });
}

size_t evq_index_size(const evq_index* index) {
  return index == nullptr ? 0 : index->index.size();
}

evq_status evq_index_digest(const evq_index* index, char** out) {
  return Guard([&] {
    Need(index, "index");
    Need(out, "out");
    *out = Dup(index->index.Digest());
    return EVQ_OK;
  });
}

void evq_index_free(evq_index* index) { delete index; }

evq_status evq_search(const evq_index* index, const char* request_json, char** out) {
  return Guard([&] {
    Need(index, "index");
    evoqa::api::Context ctx;
    ctx.index = &index->index;
    return Emit(evoqa::api::Search(ctx, ParseRequest(request_json)), out);
  });
}

evq_status evq_difficulty_reward(int k, int n, double* out) {
  return Guard([&] {
    Need(out, "out");
    *out = evoqa::DifficultyReward(k, n);
    return EVQ_OK;
  });
}

evq_status evq_exact_match(const char* prediction, const char* gold, const char* match_json,
                           int* out) {
  return Guard([&] {
    Need(prediction, "prediction");
    Need(gold, "gold");
    Need(out, "out");
    evoqa::MatchConfig cfg;
    if (match_json != nullptr) cfg = evoqa::wire::MatchConfigFromJson(ParseRequest(match_json));
    *out = evoqa::ExactMatch(prediction, gold, cfg);
    return EVQ_OK;
  });
}

evq_status evq_rollout_budget(evq_rollout_scheme scheme, int m, int n, int64_t* out) {
  return Guard([&] {
    Need(out, "out");
    if (scheme != EVQ_SCHEME_GRPO_NESTED && scheme != EVQ_SCHEME_HRPO) {
      throw evoqa::Error(ErrorCode::kInvalidArgument, "unknown rollout scheme");
    }
    *out = evoqa::RolloutBudget(scheme == EVQ_SCHEME_HRPO ? evoqa::RolloutScheme::kHrpo
                                                          : evoqa::RolloutScheme::kGrpoNested,
                                m, n);
    return EVQ_OK;
  });
}

evq_status evq_apportion_hops(int batch_size, const int ratio[4], int out[4]) {
  return Guard([&] {
    Need(ratio, "ratio");
    Need(out, "out");
    const evoqa::HopCounts counts =
        evoqa::ApportionHops(batch_size, {ratio[0], ratio[1], ratio[2], ratio[3]});
    for (int h = 0; h < 4; ++h) out[h] = counts[h];
    return EVQ_OK;
  });
}

evq_status evq_reward(const char* request_json, char** out) {
  return Guard([&] {
    return Emit(evoqa::api::Reward(evoqa::api::Context{}, ParseRequest(request_json)), out);
  });
}

evq_status evq_advantage(const char* request_json, char** out) {
  return Guard([&] { return Emit(evoqa::api::Advantage(ParseRequest(request_json)), out); });
}

evq_status evq_rollout(const evq_index* index, const char* request_json, char** out) {
  return Guard([&] {
    evoqa::api::Context ctx;
    ctx.index = index == nullptr ? nullptr : &index->index;
    return Emit(evoqa::api::Rollout(ctx, ParseRequest(request_json)), out);
  });
}

evq_status evq_evolve(const evq_index* index, const char* config_json, char** report) {
  return Guard([&] {
    Need(report, "report");
    const json cfg_json = ParseRequest(config_json);
    const evoqa::EvolveConfig cfg = evoqa::wire::EvolveConfigFromJson(cfg_json);
    const auto proposer =
        evoqa::MakeBackend(evoqa::wire::PolicyFromJson(evoqa::wire::Require(cfg_json, "proposer_policy")));
    const auto solver =
        evoqa::MakeBackend(evoqa::wire::PolicyFromJson(evoqa::wire::Require(cfg_json, "solver_policy")));
    const evoqa::SearchIndex idx = IndexFor(index, cfg_json);
    const evoqa::RunReport r = evoqa::RunSelfEvolution(cfg, *proposer, *solver, idx);
    json last = nullptr;
    if (r.last_completed) {
      last = {{"iteration", r.last_completed->iteration},
              {"phase", evoqa::PhaseName(r.last_completed->phase)},
              {"step", r.last_completed->step},
              {"directory", r.last_completed->directory}};
    }
    *report = Dup(json{{"run_id", r.run_id},
                       {"status", r.status},
                       {"iterations", r.iterations},
                       {"phase_steps_completed", r.phase_steps_completed},
                       {"last_completed", last},
                       {"episodes_issued", r.episodes_issued},
                       {"harvest_sizes", r.harvest_sizes},
                       {"directory", r.directory}}
                      .dump());
    if (r.status == "empty_curriculum") {
      g_last_error = "solver phase has no harvested QA pairs";
      return EVQ_EMPTY_CURRICULUM;
    }
    return EVQ_OK;
  });
}

evq_status evq_toyco_run(const char* config_json, char** csv, char** summary_json) {
  return Guard([&] {
    const evoqa::ToyConfig cfg =
        config_json == nullptr ? evoqa::ToyConfig{} : ToyConfigFromJson(ParseRequest(config_json));
    const evoqa::ToyReport r = evoqa::RunToyCoevolution(cfg);
    if (csv != nullptr) *csv = Dup(r.Csv());
    if (summary_json != nullptr) *summary_json = Dup(ToyJson(r).dump());
    return EVQ_OK;
  });
}

evq_status evq_eval(const evq_index* index, const char* request_json, char** out) {
  return Guard([&] {
    namespace w = evoqa::wire;
    const json req = ParseRequest(request_json);
    w::CheckKeys(req,
                 {"bench", "bench_path", "policy", "config", "match", "parallelism", "seed",
                  "corpus", "index"},
                 "eval request");
    const std::vector<evoqa::BenchItem> items =
        req.contains("bench") ? evoqa::ParseBenchmark(w::GetString(req, "bench"))
                              : evoqa::LoadBenchmark(w::GetString(req, "bench_path"));
    const auto solver = evoqa::MakeBackend(w::PolicyFromJson(w::Require(req, "policy")));
    const evoqa::RolloutConfig cfg =
        req.contains("config") ? w::RolloutConfigFromJson(req["config"], evoqa::RolloutConfig::Solver())
                               : evoqa::RolloutConfig::Solver();
    const evoqa::MatchConfig match =
        req.contains("match") ? w::MatchConfigFromJson(req["match"]) : evoqa::MatchConfig{};
    std::optional<evoqa::SearchIndex> idx;
    if (index != nullptr || req.contains("corpus")) idx = IndexFor(index, req);
    std::uint64_t seed = 0;
    if (req.contains("seed")) seed = req["seed"].get<std::uint64_t>();
    const evoqa::EvalReport r =
        evoqa::Evaluate(items, *solver, cfg, idx ? &*idx : nullptr, match,
                        w::GetInt(req, "parallelism", 1), seed);
    return Emit(EvalJson(r), out);
  });
}

evq_status evq_service_start(const evq_index* index, const char* config_json,
                             evq_service** out) {
  return Guard([&] {
    namespace w = evoqa::wire;
    Need(out, "out");
    const json j = config_json == nullptr ? json::object() : ParseRequest(config_json);
    w::CheckKeys(j,
                 {"host", "port", "auth_token", "parallelism", "match", "policy_endpoint",
                  "policy_token", "corpus", "index"},
                 "service config");
    evoqa::ServiceConfig cfg;
    cfg.host = w::GetString(j, "host", cfg.host);
    cfg.port = w::GetInt(j, "port", cfg.port);
    cfg.auth_token = w::GetString(j, "auth_token", "");
    cfg.parallelism = w::GetInt(j, "parallelism", cfg.parallelism);
    if (j.contains("match")) cfg.match = w::MatchConfigFromJson(j["match"]);
    cfg.policy_endpoint = w::GetString(j, "policy_endpoint", "");
    cfg.policy_token = w::GetString(j, "policy_token", "");
    *out = new evq_service{evoqa::Service::Start(cfg, IndexFor(index, j))};
    return EVQ_OK;
  });
}

int evq_service_port(const evq_service* service) {
  return service == nullptr ? -1 : service->service->port();
}

void evq_service_stop(evq_service* service) {
  if (service != nullptr) service->service->Stop();
}

void evq_service_free(evq_service* service) { delete service; }

}  // extern "C"

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

// evoqa command-line front end. Talks to the engine only through the C API.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <pthread.h>

#include "CLI11.hpp"
#include "evoqa/evoqa.h"
#include "json.hpp"

namespace {

using nlohmann::json;

// Exit codes per error family.
enum Exit {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kBadInput = 3,
  kDomain = 4,
  kBackend = 5,
  kEmptyCurriculum = 6,
  kIo = 7,
};

int ExitCode(evq_status s) {
  switch (s) {
    case EVQ_OK:
      return kOk;
    case EVQ_PARSE_ERROR:
    case EVQ_DUPLICATE_DOC_ID:
    case EVQ_DUPLICATE_QID:
    case EVQ_MALFORMED_TRANSCRIPT:
      return kBadInput;
    case EVQ_INVALID_ARGUMENT:
    case EVQ_DOMAIN_ERROR:
    case EVQ_LENGTH_MISMATCH:
    case EVQ_EMPTY_GROUP:
      return kDomain;
    case EVQ_BACKEND_UNAVAILABLE:
    case EVQ_CONTRACT_VIOLATION:
      return kBackend;
    case EVQ_EMPTY_CURRICULUM:
      return kEmptyCurriculum;
    case EVQ_IO_ERROR:
      return kIo;
    case EVQ_INTERNAL:
      return kInternal;
  }
  return kInternal;
}

struct Failure {
  evq_status status;
  std::string message;
};

void Check(evq_status s) {
  if (s != EVQ_OK) throw Failure{s, evq_last_error()};
}

// Owns a string returned by the C API.
class Owned {
 public:
  Owned() = default;
  ~Owned() { evq_string_free(p_); }
  Owned(const Owned&) = delete;
  Owned& operator=(const Owned&) = delete;
  char** out() { return &p_; }
  std::string str() const { return p_ == nullptr ? std::string() : std::string(p_); }

 private:
  char* p_ = nullptr;
};

struct CorpusHandle {
  evq_corpus* corpus = nullptr;
  evq_index* index = nullptr;
  ~CorpusHandle() {
    evq_index_free(index);
    evq_corpus_free(corpus);
  }
};

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{EVQ_IO_ERROR, "cannot open '" + path + "'"};
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void WriteFile(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !out.write(data.data(), static_cast<std::streamsize>(data.size()))) {
    throw Failure{EVQ_IO_ERROR, "cannot write '" + path + "'"};
  }
}

json ParseJson(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Failure{EVQ_PARSE_ERROR, what + ": " + e.what()};
  }
}

std::vector<json> ParseLines(const std::string& text, const std::string& what) {
  std::vector<json> out;
  std::istringstream in(text);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(ParseJson(line, what + " line " + std::to_string(n)));
  }
  return out;
}

json LoadConfig(const std::string& path) {
  if (path.empty()) return json::object();
  json j = ParseJson(ReadFile(path), path);
  if (!j.is_object()) throw Failure{EVQ_PARSE_ERROR, path + ": config must be an object"};
  return j;
}

// Copies an option into `dst[key]` when given on the command line or through
// its environment variable; config-file values stay otherwise.
template <typename T>
void Overlay(json& dst, const std::string& key, const CLI::Option* opt, const T& value) {
  if (opt->count() > 0) dst[key] = value;
}

void LoadIndex(CorpusHandle& h, const std::string& corpus, const json& index_cfg) {
  Check(evq_corpus_load(corpus.c_str(), &h.corpus));
  const std::string cfg = index_cfg.dump();
  Check(evq_index_build(h.corpus, index_cfg.empty() ? nullptr : cfg.c_str(), &h.index));
}

json PolicyJson(const std::string& script, const std::string& endpoint, const std::string& token) {
  if (!script.empty() && !endpoint.empty()) {
    throw Failure{EVQ_INVALID_ARGUMENT, "give either a script or an endpoint, not both"};
  }
  if (!script.empty()) return {{"kind", "scripted"}, {"script_id", script}};
  if (endpoint.empty()) throw Failure{EVQ_INVALID_ARGUMENT, "no policy script or endpoint"};
  json p = {{"kind", "http"}, {"endpoint", endpoint}};
  if (!token.empty()) p["auth_token"] = token;
  return p;
}

sigset_t StopSignals() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  return set;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"evoqa: search-augmented proposer/solver self-evolution engine", "evoqa"};
  app.set_version_flag("--version", std::string(evq_version()));
  app.require_subcommand(1);
  std::string log_level;
  app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off")
      ->envname("EVOQA_LOG_LEVEL");

  // index
  auto* index_cmd = app.add_subcommand("index", "Build a search index and optionally query it");
  std::string ix_corpus;
  std::vector<std::string> ix_queries;
  int ix_top_k = 3;
  double ix_k1 = 1.2, ix_b = 0.75;
  index_cmd->add_option("--corpus", ix_corpus, "ndjson corpus")->required()->envname("EVOQA_CORPUS");
  auto* ix_topk_opt = index_cmd->add_option("--top-k", ix_top_k, "results per query");
  auto* ix_k1_opt = index_cmd->add_option("--k1", ix_k1, "BM25 k1");
  auto* ix_b_opt = index_cmd->add_option("--b", ix_b, "BM25 b");
  index_cmd->add_option("--query", ix_queries, "query to run (repeatable)");

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  std::string sv_config, sv_corpus, sv_host, sv_token, sv_policy, sv_policy_token;
  int sv_port = 8080, sv_parallel = 4;
  serve_cmd->add_option("--config", sv_config, "JSON service config");
  auto* sv_corpus_opt = serve_cmd->add_option("--corpus", sv_corpus, "ndjson corpus")->envname("EVOQA_CORPUS");
  auto* sv_host_opt = serve_cmd->add_option("--host", sv_host, "bind address")->envname("EVOQA_HOST");
  auto* sv_port_opt = serve_cmd->add_option("--port", sv_port, "port (0 picks one)")->envname("EVOQA_PORT");
  auto* sv_token_opt = serve_cmd->add_option("--token", sv_token, "required bearer token")->envname("EVOQA_AUTH_TOKEN");
  auto* sv_par_opt = serve_cmd->add_option("--parallelism", sv_parallel, "worker threads")->envname("EVOQA_PARALLELISM");
  auto* sv_pol_opt = serve_cmd->add_option("--policy-endpoint", sv_policy, "policy for http rollouts")->envname("EVOQA_POLICY_ENDPOINT");
  auto* sv_polt_opt = serve_cmd->add_option("--policy-token", sv_policy_token, "policy bearer token")->envname("EVOQA_POLICY_TOKEN");

  // rollout
  auto* rollout_cmd = app.add_subcommand("rollout", "Run one episode and print it");
  std::string ro_corpus, ro_script, ro_endpoint, ro_token, ro_role = "solver", ro_doc, ro_question;
  int ro_hop = 1, ro_sample = 0, ro_max_turns = 5, ro_max_tokens = 0;
  std::uint64_t ro_seed = 0;
  rollout_cmd->add_option("--corpus", ro_corpus, "ndjson corpus")->envname("EVOQA_CORPUS");
  rollout_cmd->add_option("--script", ro_script, "scripted policy id");
  rollout_cmd->add_option("--endpoint", ro_endpoint, "policy endpoint")->envname("EVOQA_POLICY_ENDPOINT");
  rollout_cmd->add_option("--token", ro_token, "policy bearer token")->envname("EVOQA_POLICY_TOKEN");
  rollout_cmd->add_option("--role", ro_role, "proposer|solver")->check(CLI::IsMember({"proposer", "solver"}));
  rollout_cmd->add_option("--hop", ro_hop, "requested hop (proposer)");
  rollout_cmd->add_option("--doc-id", ro_doc, "seed document (proposer)");
  rollout_cmd->add_option("--question", ro_question, "question (solver)");
  rollout_cmd->add_option("--seed", ro_seed, "seed");
  rollout_cmd->add_option("--sample-index", ro_sample, "sample index");
  rollout_cmd->add_option("--max-turns", ro_max_turns, "assistant turn cap");
  rollout_cmd->add_option("--max-tokens", ro_max_tokens, "sequence token budget");

  // score
  auto* score_cmd = app.add_subcommand("score", "Compute proposer rewards for trajectories");
  std::string sc_traj, sc_answers;
  score_cmd->add_option("--trajectories", sc_traj, "episode ndjson (meta.hop required)")->required();
  score_cmd->add_option("--answers", sc_answers, "{episode_id, predictions} ndjson")->required();

  // advantage
  auto* adv_cmd = app.add_subcommand("advantage", "Standardize rewards into advantages");
  std::string ad_rewards, ad_grouping = "hop", ad_mode = "population";
  double ad_delta = 1e-6;
  adv_cmd->add_option("--rewards", ad_rewards, "{episode_id, reward|total, hop?, group_key?} ndjson")->required();
  adv_cmd->add_option("--grouping", ad_grouping, "hop|question|global")
      ->check(CLI::IsMember({"hop", "question", "global"}));
  adv_cmd->add_option("--delta", ad_delta, "stabilizer added to the std");
  adv_cmd->add_option("--variance-mode", ad_mode, "population|sample")
      ->check(CLI::IsMember({"population", "sample"}));

  // evolve
  auto* evo_cmd = app.add_subcommand("evolve", "Run or resume a self-evolution run");
  std::string ev_config, ev_corpus, ev_run, ev_out, ev_pscript, ev_sscript, ev_pend, ev_send, ev_harvest;
  int ev_iters = 3, ev_psteps = 50, ev_ssteps = 50, ev_batch = 256, ev_par = 1, ev_stop = 0;
  std::uint64_t ev_seed = 0;
  evo_cmd->add_option("--config", ev_config, "JSON run config (see docs/config.md)");
  auto* ev_corpus_opt = evo_cmd->add_option("--corpus", ev_corpus, "ndjson corpus")->envname("EVOQA_CORPUS");
  auto* ev_run_opt = evo_cmd->add_option("--run-id", ev_run, "run name");
  auto* ev_out_opt = evo_cmd->add_option("--output-dir", ev_out, "runs directory")->envname("EVOQA_RUN_DIR");
  auto* ev_iter_opt = evo_cmd->add_option("--iterations", ev_iters, "iterations");
  auto* ev_ps_opt = evo_cmd->add_option("--proposer-steps", ev_psteps, "proposer steps per iteration");
  auto* ev_ss_opt = evo_cmd->add_option("--solver-steps", ev_ssteps, "solver steps per iteration");
  auto* ev_batch_opt = evo_cmd->add_option("--batch-size", ev_batch, "batch size of both phases");
  auto* ev_seed_opt = evo_cmd->add_option("--seed", ev_seed, "run seed")->envname("EVOQA_SEED");
  auto* ev_par_opt = evo_cmd->add_option("--parallelism", ev_par, "concurrent episodes")->envname("EVOQA_PARALLELISM");
  auto* ev_stop_opt = evo_cmd->add_option("--stop-after", ev_stop, "stop after N phase-steps");
  auto* ev_harvest_opt = evo_cmd->add_option("--harvest", ev_harvest, "regenerate|cumulative")
                             ->check(CLI::IsMember({"regenerate", "cumulative"}));
  evo_cmd->add_option("--proposer-script", ev_pscript, "scripted proposer id");
  evo_cmd->add_option("--solver-script", ev_sscript, "scripted solver id");
  evo_cmd->add_option("--proposer-endpoint", ev_pend, "proposer policy endpoint");
  evo_cmd->add_option("--solver-endpoint", ev_send, "solver policy endpoint");

  // toyco
  auto* toy_cmd = app.add_subcommand("toyco", "Toy co-evolution simulator");
  toy_cmd->require_subcommand(1);
  auto* toy_run = toy_cmd->add_subcommand("run", "Run the simulator and print the dynamics CSV");
  std::string ty_config, ty_out, ty_summary;
  std::uint64_t ty_seed = 7;
  int ty_iters = 3, ty_steps = 50, ty_batch = 256, ty_n = 5;
  toy_run->add_option("--config", ty_config, "JSON toy config");
  auto* ty_seed_opt = toy_run->add_option("--seed", ty_seed, "seed")->envname("EVOQA_SEED");
  auto* ty_iter_opt = toy_run->add_option("--iterations", ty_iters, "iterations");
  auto* ty_steps_opt = toy_run->add_option("--steps", ty_steps, "steps per phase");
  auto* ty_batch_opt = toy_run->add_option("--batch-size", ty_batch, "batch size");
  auto* ty_n_opt = toy_run->add_option("--n", ty_n, "solver samples per question");
  toy_run->add_option("--out", ty_out, "write the CSV here instead of stdout");
  toy_run->add_option("--summary", ty_summary, "write a JSON summary here");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Exact-match evaluation over a benchmark file");
  std::string el_bench, el_endpoint, el_token, el_script, el_corpus, el_csv, el_json;
  int el_par = 1;
  eval_cmd->add_option("--bench", el_bench, "{qid, question, golds, dataset} ndjson")->required();
  eval_cmd->add_option("--endpoint", el_endpoint, "solver policy endpoint")->envname("EVOQA_POLICY_ENDPOINT");
  eval_cmd->add_option("--token", el_token, "policy bearer token")->envname("EVOQA_POLICY_TOKEN");
  eval_cmd->add_option("--script", el_script, "scripted solver id");
  eval_cmd->add_option("--corpus", el_corpus, "ndjson corpus for the search tool")->envname("EVOQA_CORPUS");
  eval_cmd->add_option("--csv", el_csv, "write the per-dataset CSV here");
  eval_cmd->add_option("--json", el_json, "write the full JSON report here");
  eval_cmd->add_option("--parallelism", el_par, "concurrent items")->envname("EVOQA_PARALLELISM");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << "\n" << app.help();
    return kUsage;
  }

  try {
    if (!log_level.empty()) Check(evq_set_log_level(log_level.c_str()));

    if (*index_cmd) {
      json cfg = json::object();
      Overlay(cfg, "top_k", ix_topk_opt, ix_top_k);
      Overlay(cfg, "k1", ix_k1_opt, ix_k1);
      Overlay(cfg, "b", ix_b_opt, ix_b);
      CorpusHandle h;
      LoadIndex(h, ix_corpus, cfg);
      Owned digest;
      Check(evq_index_digest(h.index, digest.out()));
      json out = {{"documents", evq_index_size(h.index)}, {"digest", digest.str()}};
      if (!ix_queries.empty()) {
        Owned res;
        const std::string req = json{{"query_list", ix_queries}}.dump();
        Check(evq_search(h.index, req.c_str(), res.out()));
        out["search"] = json::parse(res.str());
      }
      std::cout << out.dump(2) << "\n";
      return kOk;
    }

    if (*serve_cmd) {
      json cfg = LoadConfig(sv_config);
      Overlay(cfg, "corpus", sv_corpus_opt, sv_corpus);
      Overlay(cfg, "host", sv_host_opt, sv_host);
      Overlay(cfg, "port", sv_port_opt, sv_port);
      Overlay(cfg, "auth_token", sv_token_opt, sv_token);
      Overlay(cfg, "parallelism", sv_par_opt, sv_parallel);
      Overlay(cfg, "policy_endpoint", sv_pol_opt, sv_policy);
      Overlay(cfg, "policy_token", sv_polt_opt, sv_policy_token);
      if (!cfg.contains("corpus")) throw Failure{EVQ_INVALID_ARGUMENT, "serve needs --corpus"};
      const sigset_t signals = StopSignals();
      pthread_sigmask(SIG_BLOCK, &signals, nullptr);
      evq_service* svc = nullptr;
      Check(evq_service_start(nullptr, cfg.dump().c_str(), &svc));
      std::cerr << "listening on port " << evq_service_port(svc) << "\n";
      int sig = 0;
      sigwait(&signals, &sig);
      evq_service_stop(svc);
      evq_service_free(svc);
      return kOk;
    }

    if (*rollout_cmd) {
      CorpusHandle h;
      if (!ro_corpus.empty()) LoadIndex(h, ro_corpus, json::object());
      json req = {{"policy", PolicyJson(ro_script, ro_endpoint, ro_token)},
                  {"seed", ro_seed},
                  {"sample_index", ro_sample}};
      if (ro_role == "proposer") {
        req["prompt"] = {{"role", "proposer"}, {"hop", ro_hop}, {"doc_id", ro_doc}};
      } else {
        req["prompt"] = {{"role", "solver"}, {"question", ro_question}};
      }
      json cfg = {{"max_turns", ro_max_turns}};
      if (ro_max_tokens > 0) cfg["max_sequence_tokens"] = ro_max_tokens;
      req["config"] = cfg;
      Owned out;
      Check(evq_rollout(h.index, req.dump().c_str(), out.out()));
      std::cout << json::parse(out.str()).dump(2) << "\n";
      return kOk;
    }

    if (*score_cmd) {
      const json req = {{"trajectories", ParseLines(ReadFile(sc_traj), sc_traj)},
                        {"answers", ParseLines(ReadFile(sc_answers), sc_answers)}};
      Owned out;
      Check(evq_reward(req.dump().c_str(), out.out()));
      const json res = json::parse(out.str());
      for (const auto& r : res["rewards"]) std::cout << r.dump() << "\n";
      return kOk;
    }

    if (*adv_cmd) {
      const json req = {{"grouping", ad_grouping},
                        {"records", ParseLines(ReadFile(ad_rewards), ad_rewards)},
                        {"delta", ad_delta},
                        {"variance_mode", ad_mode}};
      Owned out;
      Check(evq_advantage(req.dump().c_str(), out.out()));
      const json res = json::parse(out.str());
      for (const auto& e : res["entries"]) std::cout << e.dump() << "\n";
      return kOk;
    }

    if (*evo_cmd) {
      json cfg = LoadConfig(ev_config);
      Overlay(cfg, "corpus", ev_corpus_opt, ev_corpus);
      Overlay(cfg, "run_id", ev_run_opt, ev_run);
      Overlay(cfg, "output_dir", ev_out_opt, ev_out);
      Overlay(cfg, "iterations", ev_iter_opt, ev_iters);
      Overlay(cfg, "seed", ev_seed_opt, ev_seed);
      Overlay(cfg, "parallelism", ev_par_opt, ev_par);
      Overlay(cfg, "stop_after_steps", ev_stop_opt, ev_stop);
      Overlay(cfg, "harvest", ev_harvest_opt, ev_harvest);
      for (const char* phase : {"proposer", "solver"}) {
        if (!cfg.contains(phase)) cfg[phase] = json::object();
        Overlay(cfg[phase], "batch_size", ev_batch_opt, ev_batch);
      }
      Overlay(cfg["proposer"], "steps", ev_ps_opt, ev_psteps);
      Overlay(cfg["solver"], "steps", ev_ss_opt, ev_ssteps);
      if (!ev_pscript.empty() || !ev_pend.empty()) cfg["proposer_policy"] = PolicyJson(ev_pscript, ev_pend, "");
      if (!ev_sscript.empty() || !ev_send.empty()) cfg["solver_policy"] = PolicyJson(ev_sscript, ev_send, "");
      Owned report;
      const evq_status s = evq_evolve(nullptr, cfg.dump().c_str(), report.out());
      if (!report.str().empty()) std::cout << json::parse(report.str()).dump(2) << "\n";
      Check(s);
      return kOk;
    }

    if (*toy_run) {
      json cfg = LoadConfig(ty_config);
      Overlay(cfg, "seed", ty_seed_opt, ty_seed);
      Overlay(cfg, "iterations", ty_iter_opt, ty_iters);
      Overlay(cfg, "proposer_steps", ty_steps_opt, ty_steps);
      Overlay(cfg, "solver_steps", ty_steps_opt, ty_steps);
      Overlay(cfg, "batch_size", ty_batch_opt, ty_batch);
      Overlay(cfg, "n", ty_n_opt, ty_n);
      Owned csv, summary;
      Check(evq_toyco_run(cfg.dump().c_str(), csv.out(), summary.out()));
      if (ty_out.empty()) {
        std::cout << csv.str();
      } else {
        WriteFile(ty_out, csv.str());
      }
      if (!ty_summary.empty()) WriteFile(ty_summary, json::parse(summary.str()).dump(2) + "\n");
      return kOk;
    }

    if (*eval_cmd) {
      json req = {{"bench_path", el_bench},
                  {"policy", PolicyJson(el_script, el_endpoint, el_token)},
                  {"parallelism", el_par}};
      if (!el_corpus.empty()) req["corpus"] = el_corpus;
      Owned out;
      Check(evq_eval(nullptr, req.dump().c_str(), out.out()));
      const json report = json::parse(out.str());
      std::cout << report["table"].get<std::string>();
      if (!el_csv.empty()) WriteFile(el_csv, report["csv"].get<std::string>());
      if (!el_json.empty()) WriteFile(el_json, report.dump(2) + "\n");
      return kOk;
    }
  } catch (const Failure& f) {
    std::cerr << "evoqa: " << evq_status_name(f.status) << ": " << f.message << "\n";
    return ExitCode(f.status);
  } catch (const std::exception& e) {
    std::cerr << "evoqa: internal error: " << e.what() << "\n";
    return kInternal;
  }
  std::cerr << app.help();
  return kUsage;
}

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

#include "wire.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "evoqa/error.hpp"
#include "evoqa/text.hpp"

namespace evoqa::wire {
namespace {

Error Bad(std::string_view key, std::string_view want) {
  return Error(ErrorCode::kParseError,
               "field '" + std::string(key) + "' must be " + std::string(want));
}

const json* Find(const json& obj, std::string_view key) {
  if (!obj.is_object()) throw Error(ErrorCode::kParseError, "expected a JSON object");
  auto it = obj.find(key);
  return it == obj.end() || it->is_null() ? nullptr : &*it;
}

}  // namespace

json Parse(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
}

std::vector<json> ParseLines(std::string_view text) {
  std::vector<json> out;
  std::size_t pos = 0, line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    ++line_no;
    pos = end + 1;
    if (text::Trim(line).empty()) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw LineError(ErrorCode::kParseError, line_no, e.what());
    }
  }
  return out;
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void WriteFileAtomic(const std::string& path, std::string_view contents) {
  namespace fs = std::filesystem;
  std::error_code ec;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path(), ec);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write '" + tmp + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(ErrorCode::kIoError, "write failed for '" + tmp + "'");
  }
  fs::rename(tmp, target, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot rename to '" + path + "': " + ec.message());
}

const json& Require(const json& obj, std::string_view key) {
  const json* v = Find(obj, key);
  if (v == nullptr) {
    throw Error(ErrorCode::kParseError, "missing field '" + std::string(key) + "'");
  }
  return *v;
}

std::string GetString(const json& obj, std::string_view key) {
  const json& v = Require(obj, key);
  if (!v.is_string()) throw Bad(key, "a string");
  return v.get<std::string>();
}

std::string GetString(const json& obj, std::string_view key, std::string fallback) {
  return Find(obj, key) == nullptr ? fallback : GetString(obj, key);
}

int GetInt(const json& obj, std::string_view key) {
  const json& v = Require(obj, key);
  if (!v.is_number_integer()) throw Bad(key, "an integer");
  return v.get<int>();
}

int GetInt(const json& obj, std::string_view key, int fallback) {
  return Find(obj, key) == nullptr ? fallback : GetInt(obj, key);
}

double GetDouble(const json& obj, std::string_view key, double fallback) {
  const json* v = Find(obj, key);
  if (v == nullptr) return fallback;
  if (!v->is_number()) throw Bad(key, "a number");
  return v->get<double>();
}

bool GetBool(const json& obj, std::string_view key, bool fallback) {
  const json* v = Find(obj, key);
  if (v == nullptr) return fallback;
  if (!v->is_boolean()) throw Bad(key, "a boolean");
  return v->get<bool>();
}

std::vector<std::string> GetStrings(const json& obj, std::string_view key) {
  const json& v = Require(obj, key);
  if (!v.is_array()) throw Bad(key, "an array of strings");
  std::vector<std::string> out;
  for (const auto& s : v) {
    if (!s.is_string()) throw Bad(key, "an array of strings");
    out.push_back(s.get<std::string>());
  }
  return out;
}

void CheckKeys(const json& obj, std::initializer_list<std::string_view> allowed,
               std::string_view what) {
  if (!obj.is_object()) {
    throw Error(ErrorCode::kParseError, std::string(what) + " must be a JSON object");
  }
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || a == key;
    if (!ok) {
      throw Error(ErrorCode::kParseError,
                  "unknown key '" + key + "' in " + std::string(what));
    }
  }
}

json ToJson(const Message& m) { return {{"role", RoleName(m.role)}, {"text", m.text}}; }

json ToJson(const std::vector<Message>& messages) {
  json arr = json::array();
  for (const auto& m : messages) arr.push_back(ToJson(m));
  return arr;
}

json ToJson(const EpisodeRecord& rec) {
  json turns = json::array();
  for (const auto& t : rec.trajectory.turns) {
    turns.push_back({{"role", RoleName(t.role)}, {"text", t.text}});
  }
  const EpisodeMeta& m = rec.meta;
  return {{"episode_id", rec.episode_id},
          {"turns", std::move(turns)},
          {"max_turns", rec.trajectory.max_turns},
          {"truncated", rec.trajectory.truncated},
          {"token_count", rec.trajectory.token_count},
          {"meta",
           {{"hop", m.hop},
            {"phase", m.phase},
            {"iteration", m.iteration},
            {"source_doc_id", m.source_doc_id},
            {"stop_reason", m.stop_reason},
            {"token_source", m.token_source},
            {"invalid_tool_calls", m.invalid_tool_calls}}}};
}

json ToJson(const QAPair& qa) {
  return {{"question", qa.question},
          {"answer", qa.answer},
          {"hop", qa.hop},
          {"source_doc_id", qa.source_doc_id}};
}

json ToJson(const SearchResult& r) {
  return {{"doc_id", r.doc_id},
          {"title", r.title},
          {"snippet", r.snippet},
          {"score", r.score},
          {"rank", r.rank}};
}

json ToJson(const FormatReport& report) {
  return {{"think_ok", report.think_ok},
          {"tool_ok", report.tool_ok},
          {"question_ok", report.question_ok},
          {"answer_ok", report.answer_ok},
          {"violations", report.violations}};
}

json ToJson(const RewardBreakdown& r) {
  return {{"difficulty", r.difficulty},
          {"format_components", r.format_components},
          {"format_total", r.format_total},
          {"total", r.total},
          {"k", r.k},
          {"n", r.n}};
}

json ToJson(const AdvantageEntry& e, const AdvantageBatch& batch, const PgConfig& pg) {
  return {{"episode_id", e.episode_id},
          {"group_key", e.group_key},
          {"reward", e.reward},
          {"advantage", e.advantage},
          {"delta", batch.delta},
          {"variance_mode", VarianceModeName(batch.variance_mode)},
          {"beta", pg.beta},
          {"epsilon_clip", pg.epsilon_clip}};
}

json ToJson(const AdvantageBatch& batch, const PgConfig& pg) {
  json entries = json::array();
  for (const auto& e : batch.entries) entries.push_back(ToJson(e, batch, pg));
  return {{"entries", std::move(entries)},
          {"delta", batch.delta},
          {"variance_mode", VarianceModeName(batch.variance_mode)},
          {"beta", pg.beta},
          {"epsilon_clip", pg.epsilon_clip}};
}

json ToJson(const MatchConfig& cfg) {
  return {{"lowercase", cfg.lowercase},
          {"strip_articles", cfg.strip_articles},
          {"strip_punct", cfg.strip_punct},
          {"collapse_ws", cfg.collapse_ws}};
}

json ToJson(const IndexConfig& cfg) {
  json j = {{"k1", cfg.k1},
            {"b", cfg.b},
            {"top_k", cfg.top_k},
            {"scorer", ScorerName(cfg.scorer)}};
  if (!cfg.embedder_endpoint.empty()) j["embedder_endpoint"] = cfg.embedder_endpoint;
  return j;
}

json ToJson(const RolloutConfig& cfg) {
  return {{"max_turns", cfg.max_turns},
          {"max_sequence_tokens", cfg.max_sequence_tokens},
          {"tool_top_k", cfg.tool_top_k},
          {"temperature", cfg.temperature}};
}

json ToJson(const PgConfig& pg) {
  return {{"beta", pg.beta}, {"epsilon_clip", pg.epsilon_clip}, {"group_size", pg.group_size}};
}

json ToJson(const PolicyHandle& h) {
  if (h.kind == BackendKind::kScripted) return {{"kind", "scripted"}, {"script_id", h.script_id}};
  return {{"kind", "http"},
          {"endpoint", h.endpoint},
          {"max_retries", h.max_retries},
          {"timeout_ms", h.timeout_ms}};
}

Message MessageFromJson(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kParseError, "message must be an object");
  Message m;
  m.role = ParseRole(GetString(j, "role"));
  m.text = j.contains("text") ? GetString(j, "text") : GetString(j, "content");
  return m;
}

std::vector<Message> MessagesFromJson(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::kParseError, "messages must be an array");
  std::vector<Message> out;
  for (const auto& m : j) out.push_back(MessageFromJson(m));
  return out;
}

EpisodeRecord EpisodeFromJson(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kParseError, "episode must be an object");
  EpisodeRecord rec;
  rec.episode_id = GetString(j, "episode_id", "");
  const json& turns = j.contains("turns") ? j["turns"] : Require(j, "messages");
  const std::vector<Message> messages = MessagesFromJson(turns);
  const int max_turns = GetInt(j, "max_turns", kDefaultMaxTurns);
  const json* tc = Find(j, "token_count");
  if (tc != nullptr && !tc->is_number_unsigned()) throw Bad("token_count", "a count");
  rec.trajectory = ParseTrajectory(messages, max_turns, tc ? tc->get<std::size_t>() : 0);
  if (const json* meta = Find(j, "meta")) {
    EpisodeMeta& m = rec.meta;
    m.hop = GetInt(*meta, "hop", 0);
    m.phase = GetString(*meta, "phase", "");
    m.iteration = GetInt(*meta, "iteration", 0);
    m.source_doc_id = GetString(*meta, "source_doc_id", "");
    m.stop_reason = GetString(*meta, "stop_reason", "");
    m.token_source = GetString(*meta, "token_source", "");
    if (Find(*meta, "invalid_tool_calls") != nullptr) {
      m.invalid_tool_calls = GetStrings(*meta, "invalid_tool_calls");
    }
  }
  return rec;
}

QAPair QaFromJson(const json& j) {
  QAPair qa;
  qa.question = GetString(j, "question");
  qa.answer = GetString(j, "answer");
  qa.hop = GetInt(j, "hop", 1);
  qa.source_doc_id = GetString(j, "source_doc_id", "");
  return qa;
}

HopGroup HopGroupFromJson(const json& j) {
  HopGroup g;
  g.hop = GetInt(j, "hop");
  g.member_ids = GetStrings(j, "member_ids");
  const json& rewards = Require(j, "rewards");
  if (!rewards.is_array()) throw Bad("rewards", "an array of numbers");
  for (const auto& r : rewards) {
    if (!r.is_number()) throw Bad("rewards", "an array of numbers");
    g.rewards.push_back(r.get<double>());
  }
  return g;
}

Document DocumentFromJson(const json& j) {
  return {GetString(j, "doc_id"), GetString(j, "title"), GetString(j, "text")};
}

MatchConfig MatchConfigFromJson(const json& j, MatchConfig base) {
  CheckKeys(j, {"lowercase", "strip_articles", "strip_punct", "collapse_ws"}, "match config");
  base.lowercase = GetBool(j, "lowercase", base.lowercase);
  base.strip_articles = GetBool(j, "strip_articles", base.strip_articles);
  base.strip_punct = GetBool(j, "strip_punct", base.strip_punct);
  base.collapse_ws = GetBool(j, "collapse_ws", base.collapse_ws);
  return base;
}

IndexConfig IndexConfigFromJson(const json& j, IndexConfig base) {
  CheckKeys(j, {"k1", "b", "top_k", "scorer", "embedder_endpoint"}, "index config");
  base.k1 = GetDouble(j, "k1", base.k1);
  base.b = GetDouble(j, "b", base.b);
  base.top_k = GetInt(j, "top_k", base.top_k);
  if (j.contains("scorer")) base.scorer = ParseScorer(GetString(j, "scorer"));
  base.embedder_endpoint = GetString(j, "embedder_endpoint", base.embedder_endpoint);
  return base;
}

RolloutConfig RolloutConfigFromJson(const json& j, RolloutConfig base) {
  CheckKeys(j, {"max_turns", "max_sequence_tokens", "tool_top_k", "temperature"},
            "rollout config");
  base.max_turns = GetInt(j, "max_turns", base.max_turns);
  base.max_sequence_tokens = GetInt(j, "max_sequence_tokens", base.max_sequence_tokens);
  base.tool_top_k = GetInt(j, "tool_top_k", base.tool_top_k);
  base.temperature = GetDouble(j, "temperature", base.temperature);
  Validate(base);
  return base;
}

PgConfig PgConfigFromJson(const json& j, PgConfig base) {
  CheckKeys(j, {"beta", "epsilon_clip", "group_size"}, "pg config");
  base.beta = GetDouble(j, "beta", base.beta);
  base.epsilon_clip = GetDouble(j, "epsilon_clip", base.epsilon_clip);
  base.group_size = GetInt(j, "group_size", base.group_size);
  Validate(base);
  return base;
}

PolicyHandle PolicyFromJson(const json& j) {
  CheckKeys(j, {"kind", "endpoint", "script_id", "auth_token", "max_retries", "timeout_ms"},
            "policy");
  const std::string kind = GetString(j, "kind");
  PolicyHandle h;
  if (kind == "scripted") {
    h.kind = BackendKind::kScripted;
  } else if (kind == "http") {
    h.kind = BackendKind::kHttp;
  } else {
    throw Error(ErrorCode::kParseError, "policy kind must be 'scripted' or 'http'");
  }
  h.endpoint = GetString(j, "endpoint", "");
  h.script_id = GetString(j, "script_id", "");
  h.auth_token = GetString(j, "auth_token", "");
  h.max_retries = GetInt(j, "max_retries", h.max_retries);
  h.timeout_ms = GetInt(j, "timeout_ms", h.timeout_ms);
  Validate(h);
  return h;
}

namespace {

json PhaseJson(const PhaseConfig& p, const RolloutConfig& rollout) {
  json j = {{"steps", p.steps}, {"batch_size", p.batch_size}, {"pg", ToJson(p.pg)},
            {"variance_mode", VarianceModeName(p.variance_mode)}, {"rollout", ToJson(rollout)}};
  if (p.phase == Phase::kProposer) {
    j["hop_ratio"] = p.hop_ratio;
    j["n_solver_samples"] = p.n_solver_samples;
  }
  return j;
}

void PhaseFromJson(const json& j, PhaseConfig& p, RolloutConfig& rollout) {
  if (p.phase == Phase::kProposer) {
    CheckKeys(j,
              {"steps", "batch_size", "hop_ratio", "n_solver_samples", "pg", "variance_mode",
               "rollout"},
              "proposer config");
  } else {
    CheckKeys(j, {"steps", "batch_size", "pg", "variance_mode", "rollout"}, "solver config");
  }
  if (Find(j, "variance_mode")) p.variance_mode = ParseVarianceMode(GetString(j, "variance_mode"));
  p.steps = GetInt(j, "steps", p.steps);
  p.batch_size = GetInt(j, "batch_size", p.batch_size);
  p.n_solver_samples = GetInt(j, "n_solver_samples", p.n_solver_samples);
  if (const json* r = Find(j, "hop_ratio")) {
    if (!r->is_array() || r->size() != 4) throw Bad("hop_ratio", "an array of 4 integers");
    for (std::size_t h = 0; h < 4; ++h) {
      if (!(*r)[h].is_number_integer()) throw Bad("hop_ratio", "an array of 4 integers");
      p.hop_ratio[h] = (*r)[h].get<int>();
    }
  }
  if (const json* pg = Find(j, "pg")) p.pg = PgConfigFromJson(*pg, p.pg);
  if (const json* r = Find(j, "rollout")) rollout = RolloutConfigFromJson(*r, rollout);
}

}  // namespace

json ToJson(const EvolveConfig& cfg) {
  return {{"run_id", cfg.run_id},
          {"output_dir", cfg.output_dir},
          {"iterations", cfg.iterations},
          {"seed", cfg.seed},
          {"parallelism", cfg.parallelism},
          {"delta", cfg.delta},
          {"harvest", cfg.harvest == HarvestMode::kCumulative ? "cumulative" : "regenerate"},
          {"harvest_prompts", cfg.harvest_prompts},
          {"match", ToJson(cfg.match)},
          {"proposer", PhaseJson(cfg.proposer, cfg.proposer_rollout)},
          {"solver", PhaseJson(cfg.solver, cfg.solver_rollout)}};
}

EvolveConfig EvolveConfigFromJson(const json& j, EvolveConfig base) {
  CheckKeys(j,
            {"run_id", "output_dir", "iterations", "seed", "parallelism", "delta",
             "harvest", "harvest_prompts", "stop_after_steps",
             "callback_url", "match", "proposer", "solver", "corpus", "index",
             "proposer_policy", "solver_policy"},
            "evolve config");
  base.run_id = GetString(j, "run_id", base.run_id);
  base.output_dir = GetString(j, "output_dir", base.output_dir);
  base.iterations = GetInt(j, "iterations", base.iterations);
  if (const json* s = Find(j, "seed")) {
    if (!s->is_number_unsigned()) throw Bad("seed", "a non-negative integer");
    base.seed = s->get<std::uint64_t>();
  }
  base.parallelism = GetInt(j, "parallelism", base.parallelism);
  base.delta = GetDouble(j, "delta", base.delta);
  if (Find(j, "harvest")) {
    const std::string h = GetString(j, "harvest");
    if (h == "regenerate") {
      base.harvest = HarvestMode::kRegenerate;
    } else if (h == "cumulative") {
      base.harvest = HarvestMode::kCumulative;
    } else {
      throw Bad("harvest", "'regenerate' or 'cumulative'");
    }
  }
  base.harvest_prompts = GetInt(j, "harvest_prompts", base.harvest_prompts);
  base.stop_after_steps = GetInt(j, "stop_after_steps", base.stop_after_steps);
  base.callback_url = GetString(j, "callback_url", base.callback_url);
  if (const json* m = Find(j, "match")) base.match = MatchConfigFromJson(*m, base.match);
  if (const json* p = Find(j, "proposer")) PhaseFromJson(*p, base.proposer, base.proposer_rollout);
  if (const json* s = Find(j, "solver")) PhaseFromJson(*s, base.solver, base.solver_rollout);
  Validate(base);
  return base;
}

}  // namespace evoqa::wire

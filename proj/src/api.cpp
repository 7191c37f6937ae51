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

#include "api.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "evoqa/advantage.hpp"
#include "evoqa/prompts.hpp"

namespace evoqa::api {
namespace {

const json& RequireArray(const json& body, std::string_view key) {
  const json& v = wire::Require(body, key);
  if (!v.is_array()) {
    throw Error(ErrorCode::kParseError, "field '" + std::string(key) + "' must be an array");
  }
  return v;
}

int HopOf(const json& rec, const EpisodeRecord& episode) {
  const int hop = wire::GetInt(rec, "hop", episode.meta.hop);
  if (hop == 0) {
    throw Error(ErrorCode::kParseError,
                "trajectory '" + episode.episode_id + "' has no requested hop");
  }
  return hop;
}

struct Member {
  std::string id;
  double reward = 0.0;
  int hop = 0;
  std::string key;
};

std::vector<Member> Members(const json& body) {
  std::vector<Member> out;
  if (body.contains("records")) {
    for (const auto& r : RequireArray(body, "records")) {
      Member m;
      m.id = wire::GetString(r, "episode_id");
      const json& reward = r.contains("reward") ? r["reward"] : wire::Require(r, "total");
      if (!reward.is_number()) throw Error(ErrorCode::kParseError, "reward must be a number");
      m.reward = reward.get<double>();
      m.hop = wire::GetInt(r, "hop", 0);
      m.key = wire::GetString(r, "group_key", "");
      out.push_back(std::move(m));
    }
    return out;
  }
  const json& groups = RequireArray(body, "groups");
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const json& j = groups[g];
    const std::vector<std::string> ids = wire::GetStrings(j, "member_ids");
    const json& rewards = RequireArray(j, "rewards");
    if (ids.size() != rewards.size()) {
      throw Error(ErrorCode::kLengthMismatch, "member_ids and rewards differ in length");
    }
    if (ids.empty()) throw Error(ErrorCode::kEmptyGroup, "group " + std::to_string(g) + " is empty");
    const int hop = wire::GetInt(j, "hop", 0);
    const std::string key = wire::GetString(j, "key", "q" + std::to_string(g));
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (!rewards[i].is_number()) throw Error(ErrorCode::kParseError, "rewards must be numbers");
      out.push_back({ids[i], rewards[i].get<double>(), hop, key});
    }
  }
  return out;
}

PolicyHandle ResolvePolicy(const Context& ctx, const json& j) {
  if (wire::GetString(j, "kind") == "http" && !j.contains("endpoint")) {
    if (!ctx.default_policy) {
      throw Error(ErrorCode::kInvalidArgument, "no default policy endpoint is configured");
    }
    return *ctx.default_policy;
  }
  PolicyHandle h = wire::PolicyFromJson(j);
  if (h.kind == BackendKind::kHttp && !ctx.allow_policy_endpoints) {
    throw Error(ErrorCode::kInvalidArgument, "requests may not name a policy endpoint");
  }
  return h;
}

}  // namespace

json Search(const Context& ctx, const json& body) {
  if (ctx.index == nullptr) throw Error(ErrorCode::kInvalidArgument, "no search index");
  wire::CheckKeys(body, {"query_list", "top_k"}, "search request");
  const std::vector<std::string> queries = wire::GetStrings(body, "query_list");
  if (queries.empty()) throw Error(ErrorCode::kInvalidArgument, "query_list is empty");
  const int top_k = wire::GetInt(body, "top_k", ctx.index->config().top_k);
  std::vector<std::vector<SearchResult>> results;
  json out = json::array();
  for (const auto& q : queries) {
    results.push_back(ctx.index->Query(q, top_k));
    json list = json::array();
    for (const auto& r : results.back()) list.push_back(wire::ToJson(r));
    out.push_back(std::move(list));
  }
  return {{"results", std::move(out)}, {"tool_response", RenderToolResponse(results, queries)}};
}

json ScoreEpisode(const EpisodeRecord& episode, int hop,
                  const std::vector<std::string>& predictions, const MatchConfig& match) {
  const FormatReport report = ValidateFormat(episode.trajectory, hop);
  const std::optional<QAPair> qa = ExtractQa(episode.trajectory, hop, episode.meta.source_doc_id);
  const RewardBreakdown r = ProposerReward(qa, predictions, report, match);
  json j = wire::ToJson(r);
  j["episode_id"] = episode.episode_id;
  j["hop"] = hop;
  j["group_key"] = HopGroupKey(hop);
  j["qa"] = qa ? wire::ToJson(*qa) : json(nullptr);
  j["format"] = wire::ToJson(report);
  return j;
}

json Reward(const Context& ctx, const json& body) {
  wire::CheckKeys(body, {"trajectories", "answers", "match"}, "reward request");
  const MatchConfig match =
      body.contains("match") ? wire::MatchConfigFromJson(body["match"], ctx.match) : ctx.match;
  std::map<std::string, std::vector<std::string>> answers;
  for (const auto& a : RequireArray(body, "answers")) {
    const std::string id = wire::GetString(a, "episode_id");
    if (!answers.emplace(id, wire::GetStrings(a, "predictions")).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate answers for '" + id + "'");
    }
  }
  json rewards = json::array();
  std::set<std::string> seen;
  for (const auto& t : RequireArray(body, "trajectories")) {
    const EpisodeRecord episode = wire::EpisodeFromJson(t);
    if (!seen.insert(episode.episode_id).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate trajectory '" + episode.episode_id + "'");
    }
    auto it = answers.find(episode.episode_id);
    if (it == answers.end()) {
      throw Error(ErrorCode::kLengthMismatch,
                  "no predictions for trajectory '" + episode.episode_id + "'");
    }
    rewards.push_back(ScoreEpisode(episode, HopOf(t, episode), it->second, match));
  }
  if (seen.size() != answers.size()) {
    throw Error(ErrorCode::kLengthMismatch, "answers name episodes without trajectories");
  }
  return {{"rewards", std::move(rewards)}};
}

json Advantage(const json& body) {
  wire::CheckKeys(body,
                  {"grouping", "records", "groups", "delta", "variance_mode", "beta",
                   "epsilon_clip"},
                  "advantage request");
  const std::string grouping = wire::GetString(body, "grouping", "hop");
  const double delta = wire::GetDouble(body, "delta", kDefaultDelta);
  const VarianceMode mode = body.contains("variance_mode")
                                ? ParseVarianceMode(wire::GetString(body, "variance_mode"))
                                : VarianceMode::kPopulation;
  PgConfig pg;
  pg.beta = wire::GetDouble(body, "beta", 0.0);
  pg.epsilon_clip = wire::GetDouble(body, "epsilon_clip", 0.2);
  Validate(pg);
  const std::vector<Member> members = Members(body);
  if (members.empty()) throw Error(ErrorCode::kEmptyGroup, "no rewards given");

  AdvantageBatch batch;
  batch.delta = delta;
  batch.variance_mode = mode;
  if (grouping == "hop") {
    std::map<int, HopGroup> by_hop;
    for (const auto& m : members) {
      if (m.hop < 1) {
        throw Error(ErrorCode::kParseError, "hop grouping needs a hop for '" + m.id + "'");
      }
      HopGroup& g = by_hop[m.hop];
      g.hop = m.hop;
      g.member_ids.push_back(m.id);
      g.rewards.push_back(m.reward);
    }
    std::vector<HopGroup> groups;
    for (auto& [_, g] : by_hop) groups.push_back(std::move(g));
    batch = HrpoAdvantages(groups, delta, mode);
  } else if (grouping == "question" || grouping == "global") {
    std::map<std::string, std::vector<const Member*>> by_key;
    for (const auto& m : members) {
      if (grouping == "question" && m.key.empty()) {
        throw Error(ErrorCode::kParseError, "question grouping needs a group_key for '" + m.id + "'");
      }
      by_key[grouping == "global" ? std::string("global") : m.key].push_back(&m);
    }
    std::set<std::string> ids;
    for (const auto& [key, group] : by_key) {
      std::vector<double> rewards;
      for (const Member* m : group) rewards.push_back(m->reward);
      const std::vector<double> adv = grouping == "global"
                                          ? GlobalBaselineAdvantages(rewards, delta, mode)
                                          : GrpoAdvantages(rewards, delta, mode);
      for (std::size_t i = 0; i < group.size(); ++i) {
        if (!ids.insert(group[i]->id).second) {
          throw Error(ErrorCode::kInvalidArgument, "duplicate episode id '" + group[i]->id + "'");
        }
        batch.entries.push_back({group[i]->id, adv[i], key, group[i]->reward});
      }
    }
    std::sort(batch.entries.begin(), batch.entries.end(),
              [](const AdvantageEntry& a, const AdvantageEntry& b) {
                return a.episode_id < b.episode_id;
              });
  } else {
    throw Error(ErrorCode::kParseError, "grouping must be hop, question or global");
  }
  return wire::ToJson(batch, pg);
}

json Rollout(const Context& ctx, const json& body) {
  wire::CheckKeys(body,
                  {"prompt", "messages", "policy", "config", "seed", "sample_index",
                   "episode_id"},
                  "rollout request");
  const PolicyHandle handle = ResolvePolicy(ctx, wire::Require(body, "policy"));
  std::vector<Message> messages;
  int hop = 0;
  std::string doc_id;
  RolloutConfig cfg = RolloutConfig::Solver();
  if (body.contains("prompt")) {
    const json& p = body["prompt"];
    wire::CheckKeys(p, {"role", "hop", "doc_id", "question"}, "prompt");
    const std::string role = wire::GetString(p, "role");
    if (role == "proposer") {
      if (ctx.index == nullptr) throw Error(ErrorCode::kInvalidArgument, "no corpus loaded");
      hop = wire::GetInt(p, "hop");
      if (hop < 1 || hop > 4) throw Error(ErrorCode::kDomainError, "hop must be in 1..4");
      doc_id = wire::GetString(p, "doc_id");
      const auto& docs = ctx.index->corpus().documents();
      auto it = std::find_if(docs.begin(), docs.end(),
                             [&](const Document& d) { return d.doc_id == doc_id; });
      if (it == docs.end()) throw Error(ErrorCode::kInvalidArgument, "unknown doc_id '" + doc_id + "'");
      messages = prompts::ProposerPrompt(hop, *it);
      cfg = RolloutConfig::Proposer();
    } else if (role == "solver") {
      messages = prompts::SolverPrompt(wire::GetString(p, "question"));
    } else {
      throw Error(ErrorCode::kParseError, "prompt role must be proposer or solver");
    }
  } else {
    messages = wire::MessagesFromJson(wire::Require(body, "messages"));
  }
  if (body.contains("config")) cfg = wire::RolloutConfigFromJson(body["config"], cfg);
  std::uint64_t seed = 0;
  if (body.contains("seed")) {
    if (!body["seed"].is_number_unsigned()) throw Error(ErrorCode::kParseError, "seed must be a non-negative integer");
    seed = body["seed"].get<std::uint64_t>();
  }
  const int sample = wire::GetInt(body, "sample_index", 0);
  if (sample < 0) throw Error(ErrorCode::kInvalidArgument, "sample_index must be >= 0");

  const auto backend = MakeBackend(handle);
  EpisodeRecord rec = RunEpisode(*backend, std::move(messages), cfg, ctx.index, seed,
                                 static_cast<std::uint32_t>(sample));
  rec.episode_id = wire::GetString(body, "episode_id", "");
  rec.meta.hop = hop;
  rec.meta.source_doc_id = doc_id;
  json out = wire::ToJson(rec);
  out["answer"] = FinalAnswer(rec.trajectory);
  if (hop > 0) {
    const auto qa = ExtractQa(rec.trajectory, hop, doc_id);
    out["qa"] = qa ? wire::ToJson(*qa) : json(nullptr);
  }
  return out;
}

json Health(const Context& ctx) {
  json j = {{"status", "ok"}, {"version", EVOQA_VERSION}};
  if (ctx.index != nullptr) {
    j["corpus_digest"] = ctx.index->Digest();
    j["documents"] = ctx.index->size();
    j["index"] = wire::ToJson(ctx.index->config());
  }
  return j;
}

int HttpStatus(ErrorCode code) {
  switch (code) {
    case ErrorCode::kBackendUnavailable:
      return 503;
    case ErrorCode::kContractViolation:
      return 502;
    case ErrorCode::kEmptyCurriculum:
      return 409;
    case ErrorCode::kIoError:
    case ErrorCode::kInternal:
      return 500;
    default:
      return 400;
  }
}

json ErrorBody(ErrorCode code, std::string_view message) {
  return {{"error", {{"code", ErrorCodeName(code)}, {"message", message}}}};
}

}  // namespace evoqa::api

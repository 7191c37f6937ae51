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

// JSON request handlers shared by the HTTP service and the C API, so both
// return identical results for identical inputs.

#ifndef EVOQA_SRC_API_HPP_
#define EVOQA_SRC_API_HPP_

#include <optional>
#include <string>

#include "evoqa/error.hpp"
#include "evoqa/policy.hpp"
#include "evoqa/rewards.hpp"
#include "evoqa/search.hpp"
#include "wire.hpp"

namespace evoqa::api {

using wire::json;

struct Context {
  const SearchIndex* index = nullptr;
  MatchConfig match;
  // Used for {"kind": "http"} policies that name no endpoint.
  std::optional<PolicyHandle> default_policy;
  // When false, requests may not name their own policy endpoint.
  bool allow_policy_endpoints = true;
};

// {query_list, top_k?} -> {results: [[SearchResult...]...], tool_response}
json Search(const Context& ctx, const json& body);
// {trajectories: [episode], answers: [{episode_id, predictions}], match?}
//   -> {rewards: [...]}, one per trajectory in order. The requested hop is
// meta.hop or a top-level "hop" of each trajectory record.
json Reward(const Context& ctx, const json& body);
// One reward record for `episode` (shared with the score subcommand).
json ScoreEpisode(const EpisodeRecord& episode, int hop,
                  const std::vector<std::string>& predictions, const MatchConfig& match);
// {grouping: hop|question|global, records: [{episode_id, reward|total, hop?,
//  group_key?}] or groups: [{hop?, key?, member_ids, rewards}], delta?,
//  variance_mode?, beta?, epsilon_clip?} -> AdvantageBatch
json Advantage(const json& body);
// {prompt: {role: proposer, hop, doc_id} | {role: solver, question}
//  or messages: [...], policy, config?, seed?, sample_index?, episode_id?}
//   -> episode record plus "answer" and, for proposer prompts, "qa".
json Rollout(const Context& ctx, const json& body);
json Health(const Context& ctx);

int HttpStatus(ErrorCode code);
json ErrorBody(ErrorCode code, std::string_view message);

}  // namespace evoqa::api

#endif  // EVOQA_SRC_API_HPP_

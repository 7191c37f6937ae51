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

// JSON forms of the engine's records. The same vocabulary is used for ndjson
// files, HTTP bodies and the C API.

#ifndef EVOQA_SRC_WIRE_HPP_
#define EVOQA_SRC_WIRE_HPP_

#include <string>
#include <string_view>
#include <vector>

#include "evoqa/advantage.hpp"
#include "evoqa/evolve.hpp"
#include "evoqa/policy.hpp"
#include "evoqa/protocol.hpp"
#include "evoqa/rewards.hpp"
#include "evoqa/search.hpp"
#include "json.hpp"

namespace evoqa::wire {

using nlohmann::json;

// Parses one JSON document; throws Error(kParseError).
json Parse(std::string_view text);
// Parses ndjson, skipping blank lines; throws LineError(kParseError).
std::vector<json> ParseLines(std::string_view text);
std::string ReadFile(const std::string& path);
// Writes through a temporary file and a rename.
void WriteFileAtomic(const std::string& path, std::string_view contents);

// Field accessors that throw Error(kParseError) naming the missing or
// mistyped key.
const json& Require(const json& obj, std::string_view key);
std::string GetString(const json& obj, std::string_view key);
std::string GetString(const json& obj, std::string_view key, std::string fallback);
int GetInt(const json& obj, std::string_view key);
int GetInt(const json& obj, std::string_view key, int fallback);
double GetDouble(const json& obj, std::string_view key, double fallback);
bool GetBool(const json& obj, std::string_view key, bool fallback);
std::vector<std::string> GetStrings(const json& obj, std::string_view key);

json ToJson(const Message& m);
json ToJson(const std::vector<Message>& messages);
json ToJson(const EpisodeRecord& rec);
json ToJson(const QAPair& qa);
json ToJson(const SearchResult& r);
json ToJson(const FormatReport& report);
json ToJson(const RewardBreakdown& r);
json ToJson(const AdvantageEntry& e, const AdvantageBatch& batch, const PgConfig& pg);
json ToJson(const AdvantageBatch& batch, const PgConfig& pg);
json ToJson(const MatchConfig& cfg);
json ToJson(const IndexConfig& cfg);
json ToJson(const RolloutConfig& cfg);
json ToJson(const PgConfig& pg);
json ToJson(const PolicyHandle& handle);

// Messages accept "text" or "content".
Message MessageFromJson(const json& j);
std::vector<Message> MessagesFromJson(const json& j);
// {episode_id?, turns|messages, max_turns?, token_count?, meta?}.
EpisodeRecord EpisodeFromJson(const json& j);
QAPair QaFromJson(const json& j);
HopGroup HopGroupFromJson(const json& j);
Document DocumentFromJson(const json& j);

// Config objects: absent keys keep `base` values; unknown keys are rejected.
MatchConfig MatchConfigFromJson(const json& j, MatchConfig base = {});
IndexConfig IndexConfigFromJson(const json& j, IndexConfig base = {});
RolloutConfig RolloutConfigFromJson(const json& j, RolloutConfig base = {});
PgConfig PgConfigFromJson(const json& j, PgConfig base = {});
PolicyHandle PolicyFromJson(const json& j);

// The reproducibility-relevant part of an evolve config; stop_after_steps
// and callback_url are left out.
json ToJson(const EvolveConfig& cfg);
// Also accepts, and ignores, the keys "corpus", "index", "proposer_policy"
// and "solver_policy" that callers resolve themselves.
EvolveConfig EvolveConfigFromJson(const json& j, EvolveConfig base = {});

// Rejects keys outside `allowed`.
void CheckKeys(const json& obj, std::initializer_list<std::string_view> allowed,
               std::string_view what);

}  // namespace evoqa::wire

#endif  // EVOQA_SRC_WIRE_HPP_

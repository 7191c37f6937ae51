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

// Text-generation backends and the multi-turn rollout driver that
// interleaves generation with search tool execution.

#ifndef EVOQA_POLICY_HPP_
#define EVOQA_POLICY_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "evoqa/protocol.hpp"
#include "evoqa/search.hpp"

namespace evoqa {

struct GenRequest {
  std::vector<Message> messages;
  std::vector<std::string> stop_tags = {"</tool_call>", "</answer>"};
  int max_new_tokens = 1024;
  double temperature = 1.0;
  int sample_count = 1;
  std::uint64_t seed = 0;
  // Completion j is sample number sample_index + j of this request.
  std::uint32_t sample_index = 0;
};

struct Completion {
  std::string text;
  std::optional<std::vector<double>> token_logprobs;
  std::optional<std::size_t> token_count;
};

enum class BackendKind { kHttp, kScripted };

struct PolicyHandle {
  BackendKind kind = BackendKind::kScripted;
  std::string endpoint;   // http only
  std::string script_id;  // scripted only
  std::string auth_token;
  int max_retries = 3;
  int timeout_ms = 120000;

  static PolicyHandle Scripted(std::string script_id);
  static PolicyHandle Http(std::string endpoint, std::string auth_token = {});
};

// Throws Error(kInvalidArgument) unless exactly the fields of its kind are
// set.
void Validate(const PolicyHandle& handle);

class PolicyBackend {
 public:
  virtual ~PolicyBackend() = default;

  // Returns exactly req.sample_count completions. Stop tags are kept at the
  // end of a completion. Throws Error(kBackendUnavailable) once retries are
  // exhausted and Error(kContractViolation) on short or malformed replies.
  virtual std::vector<Completion> Generate(const GenRequest& req) const = 0;
};

// Scripted backends are deterministic in (script_id, messages, seed,
// sample index) and stateless. The HTTP backend speaks
//   POST {messages:[{role,content}], n, temperature, stop, max_tokens, seed}
//   -> {choices:[{text, logprobs?, token_count?}]}
std::shared_ptr<const PolicyBackend> MakeBackend(const PolicyHandle& handle);

std::vector<Completion> Generate(const PolicyHandle& handle, const GenRequest& req);

// Names accepted by PolicyHandle::Scripted, without parameters.
std::vector<std::string> ScriptNames();

struct RolloutConfig {
  int max_turns = kDefaultMaxTurns;
  int max_sequence_tokens = 4096;
  int tool_top_k = 3;
  double temperature = 1.0;

  static RolloutConfig Proposer() { return {kDefaultMaxTurns, 4096, 3, 1.0}; }
  static RolloutConfig Solver() { return {kDefaultMaxTurns, 3072, 3, 1.0}; }
};

// Throws Error(kInvalidArgument) unless every field is positive.
void Validate(const RolloutConfig& cfg);

inline constexpr std::size_t kCharsPerToken = 4;

// Character-based token estimate used when a backend reports no counts.
std::size_t ProxyTokenCount(std::string_view text);

// Runs one episode: generate an assistant turn; execute every valid tool call
// against `index` and append one tool turn; stop on an <answer> block, after
// max_turns assistant turns, or when the token budget is spent. Invalid tool
// calls are recorded in meta.invalid_tool_calls and the episode continues.
// `index` may be null when the policy never searches; a valid call without
// an index is recorded as a failed call. Backend errors propagate.
EpisodeRecord RunEpisode(const PolicyBackend& backend, std::vector<Message> prompt,
                         const RolloutConfig& cfg, const SearchIndex* index,
                         std::uint64_t seed, std::uint32_t sample_index = 0);

struct SolverSamples {
  std::vector<std::string> answers;  // "" where no answer was produced
  std::vector<EpisodeRecord> episodes;
  std::vector<bool> failed;  // backend failure for that sample
};

// n independent solver episodes on `question` (sample indices 0..n-1).
// Backend errors propagate unless `tolerate_failures` is set, in which case
// a failed sample yields an empty answer and only a failure of every sample
// is rethrown. Throws Error(kDomainError) when n < 2.
SolverSamples SampleSolverEpisodes(const PolicyBackend& solver,
                                   std::string_view question, int n,
                                   const RolloutConfig& cfg,
                                   const SearchIndex* index, std::uint64_t seed,
                                   bool tolerate_failures = false);

std::vector<std::string> SampleSolverAnswers(const PolicyBackend& solver,
                                             std::string_view question, int n,
                                             const RolloutConfig& cfg,
                                             const SearchIndex* index,
                                             std::uint64_t seed);

// The trimmed content of the final turn's unique <answer> block, or "".
std::string FinalAnswer(const Trajectory& trajectory);

}  // namespace evoqa

#endif  // EVOQA_POLICY_HPP_

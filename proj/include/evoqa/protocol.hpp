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

// Multi-turn tool-use transcripts: the data model, the tag-based wire
// protocol (<think>, <tool_call>, <tool_response>, <question>, <answer>),
// and parsing/validation/rendering of episodes.

#ifndef EVOQA_PROTOCOL_HPP_
#define EVOQA_PROTOCOL_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace evoqa {

enum class Role { kSystem, kUser, kAssistant, kTool };

std::string_view RoleName(Role role);
// Throws Error(kParseError) for unknown names.
Role ParseRole(std::string_view name);

struct Message {
  Role role = Role::kUser;
  std::string text;

  bool operator==(const Message&) const = default;
};

struct Turn {
  Role role = Role::kUser;
  std::string text;
  std::size_t index = 0;

  bool operator==(const Turn&) const = default;
};

struct ToolCall {
  std::string name;
  std::vector<std::string> query_list;

  bool operator==(const ToolCall&) const = default;
};

struct InvalidToolCall {
  std::string span;
  std::string reason;
};

struct ToolCallExtraction {
  std::vector<ToolCall> calls;
  std::vector<InvalidToolCall> invalid;
};

inline constexpr int kDefaultMaxTurns = 5;

struct Trajectory {
  std::vector<Turn> turns;
  int max_turns = kDefaultMaxTurns;
  bool truncated = false;
  std::size_t token_count = 0;

  std::size_t AssistantTurnCount() const;
  // Last assistant turn, or nullptr.
  const Turn* FinalAssistantTurn() const;

  bool operator==(const Trajectory&) const = default;
};

struct QAPair {
  std::string question;
  std::string answer;
  int hop = 1;
  std::string source_doc_id;

  bool operator==(const QAPair&) const = default;
};

struct FormatReport {
  bool think_ok = false;
  bool tool_ok = false;
  bool question_ok = false;
  bool answer_ok = false;
  std::vector<std::string> violations;

  int SatisfiedCount() const {
    return int{think_ok} + int{tool_ok} + int{question_ok} + int{answer_ok};
  }
  bool operator==(const FormatReport&) const = default;
};

// Per-episode bookkeeping written next to each trajectory in episode logs.
struct EpisodeMeta {
  int hop = 0;  // 0 when the episode has no requested hop (solver, eval)
  std::string phase;
  int iteration = 0;
  std::string source_doc_id;
  std::string stop_reason;
  // "backend", "char_proxy" or "mixed"; empty for hand-built records.
  std::string token_source;
  std::vector<std::string> invalid_tool_calls;

  bool operator==(const EpisodeMeta&) const = default;
};

// One line of a trajectory log.
struct EpisodeRecord {
  std::string episode_id;
  Trajectory trajectory;
  EpisodeMeta meta;

  bool operator==(const EpisodeRecord&) const = default;
};

// Result of scanning a text for one tag name.
struct TagScan {
  std::vector<std::string> contents;  // well-nested spans, in order
  int nested = 0;                     // spans invalidated by nesting
  bool unclosed = false;              // an opening tag never closed
};

// Case-sensitive scan for <tag>...</tag>. A span containing another
// opening tag of the same name is counted in `nested`, not `contents`.
TagScan ScanTag(std::string_view text, std::string_view tag);

// True when `text` contains a closed, non-nested <answer> block.
bool HasTerminalBlock(std::string_view text);

// Throws Error(kMalformedTranscript) on an illegal role sequence, a tool turn
// without exactly one <tool_response> span, or more than max_turns assistant
// turns. The text of every turn is kept byte-for-byte.
Trajectory ParseTrajectory(std::span<const Message> raw,
                           int max_turns = kDefaultMaxTurns,
                           std::size_t token_count = 0);

std::vector<Message> RenderTrajectory(const Trajectory& trajectory);

// Never throws for malformed spans; they are collected in `invalid`.
// Throws Error(kInvalidArgument) if the turn is not an assistant turn.
ToolCallExtraction ExtractToolCalls(const Turn& turn);

// The unique <question>/<answer> pair of the final assistant turn, trimmed.
// Absent when either block is missing, duplicated, nested or empty.
std::optional<QAPair> ExtractQa(const Trajectory& trajectory, int hop,
                                std::string source_doc_id = {});

// Throws Error(kDomainError) unless 1 <= expected_hop <= 4.
FormatReport ValidateFormat(const Trajectory& trajectory, int expected_hop);

}  // namespace evoqa

#endif  // EVOQA_PROTOCOL_HPP_

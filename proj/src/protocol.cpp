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

#include "evoqa/protocol.hpp"

#include <array>

#include "evoqa/error.hpp"
#include "evoqa/text.hpp"
#include "json.hpp"

namespace evoqa {
namespace {

constexpr std::array<std::string_view, 4> kAssistantTags = {
    "think", "tool_call", "question", "answer"};

bool HasUnclosedTag(std::string_view text) {
  for (auto tag : kAssistantTags) {
    if (ScanTag(text, tag).unclosed) return true;
  }
  return false;
}

bool ComputeTruncated(const Trajectory& t) {
  const Turn* last = t.FinalAssistantTurn();
  if (last == nullptr) return true;
  if (HasUnclosedTag(last->text)) return true;
  return !HasTerminalBlock(last->text);
}

// Exactly one usable block of `tag`, trimmed and non-empty.
std::optional<std::string> UniqueBlock(std::string_view text,
                                       std::string_view tag) {
  TagScan scan = ScanTag(text, tag);
  if (scan.contents.size() != 1 || scan.nested != 0) return std::nullopt;
  std::string_view body = text::Trim(scan.contents.front());
  if (body.empty()) return std::nullopt;
  return std::string(body);
}

std::string Plural(int n, std::string_view word) {
  std::string s = std::to_string(n) + " " + std::string(word);
  if (n != 1) s += "es";
  return s;
}

}  // namespace

std::string_view RoleName(Role role) {
  switch (role) {
    case Role::kSystem:
      return "system";
    case Role::kUser:
      return "user";
    case Role::kAssistant:
      return "assistant";
    case Role::kTool:
      return "tool";
  }
  return "user";
}

Role ParseRole(std::string_view name) {
  if (name == "system") return Role::kSystem;
  if (name == "user") return Role::kUser;
  if (name == "assistant") return Role::kAssistant;
  if (name == "tool") return Role::kTool;
  throw Error(ErrorCode::kParseError, "unknown role '" + std::string(name) + "'");
}

std::size_t Trajectory::AssistantTurnCount() const {
  std::size_t n = 0;
  for (const auto& turn : turns) n += turn.role == Role::kAssistant;
  return n;
}

const Turn* Trajectory::FinalAssistantTurn() const {
  for (auto it = turns.rbegin(); it != turns.rend(); ++it) {
    if (it->role == Role::kAssistant) return &*it;
  }
  return nullptr;
}

TagScan ScanTag(std::string_view text, std::string_view tag) {
  const std::string open = "<" + std::string(tag) + ">";
  const std::string close = "</" + std::string(tag) + ">";
  TagScan scan;
  std::size_t pos = 0;
  while (true) {
    const std::size_t start = text.find(open, pos);
    if (start == std::string_view::npos) break;
    const std::size_t body = start + open.size();
    std::size_t cursor = body;
    int depth = 1;
    bool nested = false;
    while (depth > 0) {
      const std::size_t next_open = text.find(open, cursor);
      const std::size_t next_close = text.find(close, cursor);
      if (next_close == std::string_view::npos) {
        scan.unclosed = true;
        return scan;
      }
      if (next_open < next_close) {
        ++depth;
        nested = true;
        cursor = next_open + open.size();
      } else {
        --depth;
        cursor = next_close + close.size();
        if (depth == 0) {
          if (nested) {
            ++scan.nested;
          } else {
            scan.contents.emplace_back(text.substr(body, next_close - body));
          }
        }
      }
    }
    pos = cursor;
  }
  return scan;
}

bool HasTerminalBlock(std::string_view text) {
  TagScan scan = ScanTag(text, "answer");
  return !scan.contents.empty();
}

Trajectory ParseTrajectory(std::span<const Message> raw, int max_turns,
                           std::size_t token_count) {
  if (max_turns < 1) {
    throw Error(ErrorCode::kInvalidArgument, "max_turns must be positive");
  }
  if (raw.empty()) {
    throw Error(ErrorCode::kMalformedTranscript, "empty transcript");
  }
  if (raw.front().role != Role::kSystem && raw.front().role != Role::kUser) {
    throw Error(ErrorCode::kMalformedTranscript,
                "first turn must be system or user");
  }
  Trajectory t;
  t.max_turns = max_turns;
  t.token_count = token_count;
  t.turns.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const Message& m = raw[i];
    if (m.role == Role::kTool) {
      const Role prev = raw[i - 1].role;
      if (prev == Role::kTool) {
        throw Error(ErrorCode::kMalformedTranscript,
                    "consecutive tool turns at index " + std::to_string(i));
      }
      if (prev != Role::kAssistant) {
        throw Error(ErrorCode::kMalformedTranscript,
                    "tool turn at index " + std::to_string(i) +
                        " does not follow an assistant turn");
      }
      TagScan scan = ScanTag(m.text, "tool_response");
      if (scan.contents.size() != 1 || scan.nested != 0 || scan.unclosed) {
        throw Error(ErrorCode::kMalformedTranscript,
                    "tool turn at index " + std::to_string(i) +
                        " must hold exactly one <tool_response> span");
      }
    }
    t.turns.push_back(Turn{m.role, m.text, i});
  }
  const std::size_t assistant = t.AssistantTurnCount();
  if (assistant > static_cast<std::size_t>(max_turns)) {
    throw Error(ErrorCode::kMalformedTranscript,
                std::to_string(assistant) + " assistant turns exceed max_turns " +
                    std::to_string(max_turns));
  }
  t.truncated = ComputeTruncated(t);
  return t;
}

std::vector<Message> RenderTrajectory(const Trajectory& trajectory) {
  std::vector<Message> out;
  out.reserve(trajectory.turns.size());
  for (const auto& turn : trajectory.turns) out.push_back({turn.role, turn.text});
  return out;
}

ToolCallExtraction ExtractToolCalls(const Turn& turn) {
  if (turn.role != Role::kAssistant) {
    throw Error(ErrorCode::kInvalidArgument,
                "tool calls are only extracted from assistant turns");
  }
  ToolCallExtraction out;
  TagScan scan = ScanTag(turn.text, "tool_call");
  for (int i = 0; i < scan.nested; ++i) {
    out.invalid.push_back({"<tool_call>", "nested <tool_call> tags"});
  }
  if (scan.unclosed) {
    out.invalid.push_back({"<tool_call>", "unclosed <tool_call> tag"});
  }
  for (const auto& span : scan.contents) {
    nlohmann::json payload;
    try {
      payload = nlohmann::json::parse(span);
    } catch (const nlohmann::json::parse_error&) {
      out.invalid.push_back({span, "payload is not a single JSON object"});
      continue;
    }
    if (!payload.is_object()) {
      out.invalid.push_back({span, "payload is not a JSON object"});
      continue;
    }
    auto name = payload.find("name");
    if (name == payload.end() || !name->is_string()) {
      out.invalid.push_back({span, "missing function name"});
      continue;
    }
    if (name->get<std::string>() != "search") {
      out.invalid.push_back(
          {span, "unknown tool '" + name->get<std::string>() + "'"});
      continue;
    }
    auto args = payload.find("arguments");
    if (args == payload.end() || !args->is_object()) {
      out.invalid.push_back({span, "missing arguments object"});
      continue;
    }
    auto queries = args->find("query_list");
    if (queries == args->end() || !queries->is_array() || queries->empty()) {
      out.invalid.push_back({span, "query_list must be a non-empty array"});
      continue;
    }
    ToolCall call{"search", {}};
    bool ok = true;
    for (const auto& q : *queries) {
      if (!q.is_string() || text::Trim(q.get_ref<const std::string&>()).empty()) {
        ok = false;
        break;
      }
      call.query_list.push_back(q.get<std::string>());
    }
    if (!ok) {
      out.invalid.push_back({span, "query_list entries must be non-empty strings"});
      continue;
    }
    out.calls.push_back(std::move(call));
  }
  return out;
}

std::optional<QAPair> ExtractQa(const Trajectory& trajectory, int hop,
                                std::string source_doc_id) {
  const Turn* last = trajectory.FinalAssistantTurn();
  if (last == nullptr) return std::nullopt;
  auto question = UniqueBlock(last->text, "question");
  auto answer = UniqueBlock(last->text, "answer");
  if (!question || !answer) return std::nullopt;
  return QAPair{std::move(*question), std::move(*answer), hop,
                std::move(source_doc_id)};
}

FormatReport ValidateFormat(const Trajectory& trajectory, int expected_hop) {
  if (expected_hop < 1 || expected_hop > 4) {
    throw Error(ErrorCode::kDomainError,
                "expected_hop must be in 1..4, got " + std::to_string(expected_hop));
  }
  FormatReport report;
  report.think_ok = true;
  bool any_assistant = false;
  int searches = 0;
  bool calls_valid = true;
  for (const auto& turn : trajectory.turns) {
    if (turn.role != Role::kAssistant) continue;
    any_assistant = true;
    if (ScanTag(turn.text, "think").contents.empty()) {
      report.think_ok = false;
      report.violations.push_back("no <think> block in turn " +
                                  std::to_string(turn.index));
    }
    ToolCallExtraction calls = ExtractToolCalls(turn);
    searches += static_cast<int>(calls.calls.size());
    for (const auto& bad : calls.invalid) {
      calls_valid = false;
      report.violations.push_back("invalid tool call in turn " +
                                  std::to_string(turn.index) + ": " + bad.reason);
    }
  }
  if (!any_assistant) {
    report.think_ok = false;
    report.violations.push_back("no assistant turn");
  }
  const int expected = expected_hop - 1;
  report.tool_ok = calls_valid && searches == expected;
  if (searches != expected) {
    report.violations.push_back("expected " + Plural(expected, "search") +
                                ", saw " + std::to_string(searches));
  }
  const Turn* last = trajectory.FinalAssistantTurn();
  const std::string_view final_text =
      last != nullptr ? std::string_view(last->text) : std::string_view();
  report.question_ok = UniqueBlock(final_text, "question").has_value();
  report.answer_ok = UniqueBlock(final_text, "answer").has_value();
  if (!report.question_ok) {
    report.violations.push_back("no unique <question> block in final turn");
  }
  if (!report.answer_ok) {
    report.violations.push_back("no unique <answer> block in final turn");
  }
  return report;
}

}  // namespace evoqa

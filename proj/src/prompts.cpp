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

#include "evoqa/prompts.hpp"

#include <span>

namespace evoqa::prompts {
namespace {

#include "recorded_prompts.inc"

std::string ReplaceAll(std::string s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
  return s;
}

}  // namespace

std::string_view ToolSystemPrompt() { return kToolSystemPrompt; }

std::string FormatDocument(const Document& doc) {
  return "(Title: \"" + doc.title + "\")\n" + doc.text;
}

std::string ProposerInstruction(int hop, std::string_view document) {
  // Substitute the document last so its text is never rescanned.
  std::string s = ReplaceAll(std::string(kProposerInstruction), "{hop}",
                             std::to_string(hop));
  const std::size_t at = s.rfind("{document}");
  if (at != std::string::npos) s.replace(at, 10, document);
  return s;
}

std::string SolverInstruction(std::string_view question) {
  std::string s(kSolverInstruction);
  const std::size_t at = s.rfind("{question}");
  if (at != std::string::npos) s.replace(at, 10, question);
  return s;
}

std::vector<Message> ProposerPrompt(int hop, const Document& doc) {
  return {{Role::kSystem, std::string(kToolSystemPrompt)},
          {Role::kUser, ProposerInstruction(hop, FormatDocument(doc))}};
}

std::vector<Message> SolverPrompt(std::string_view question) {
  return {{Role::kSystem, std::string(kToolSystemPrompt)},
          {Role::kUser, SolverInstruction(question)}};
}

std::optional<std::vector<Message>> RecordedTranscript(std::string_view name) {
  for (const auto& t : kRecordedTranscripts) {
    if (t.name != name) continue;
    std::vector<Message> out;
    for (const auto& turn : t.turns) out.push_back({turn.role, std::string(turn.text)});
    return out;
  }
  return std::nullopt;
}

std::vector<std::string> RecordedTranscriptNames() {
  std::vector<std::string> names;
  for (const auto& t : kRecordedTranscripts) names.emplace_back(t.name);
  return names;
}

}  // namespace evoqa::prompts

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

// Default prompts for the proposer and solver agents and a small library of
// recorded example transcripts used by the replay scripts and fixtures.

#ifndef EVOQA_PROMPTS_HPP_
#define EVOQA_PROMPTS_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "evoqa/protocol.hpp"
#include "evoqa/search.hpp"

namespace evoqa::prompts {

// System prompt declaring the single `search` tool.
std::string_view ToolSystemPrompt();

// `(Title: "<title>")` followed by a newline and the document text.
std::string FormatDocument(const Document& doc);

std::string ProposerInstruction(int hop, std::string_view document);
std::string SolverInstruction(std::string_view question);

std::vector<Message> ProposerPrompt(int hop, const Document& doc);
std::vector<Message> SolverPrompt(std::string_view question);

// Recorded transcripts "proposer-1".."proposer-4" (hop 1..4) and
// "solver-1".."solver-4". proposer-4 and solver-4 are failure cases.
std::optional<std::vector<Message>> RecordedTranscript(std::string_view name);
std::vector<std::string> RecordedTranscriptNames();

}  // namespace evoqa::prompts

#endif  // EVOQA_PROMPTS_HPP_

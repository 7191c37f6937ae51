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

#include <string>
#include <vector>

#include "doctest.h"
#include "evoqa/error.hpp"
#include "evoqa/prompts.hpp"
#include "evoqa/protocol.hpp"
#include "evoqa/rng.hpp"
#include "evoqa/text.hpp"
#include "fixtures.hpp"
#include "json.hpp"

namespace {

using namespace evoqa;
using evoqa::testing::Call;
using evoqa::testing::RandomTranscript;
using evoqa::testing::ToolResponse;

std::vector<Message> Fixture(const char* name) {
  auto t = prompts::RecordedTranscript(name);
  REQUIRE(t.has_value());
  return *t;
}

Trajectory Parsed(const char* name) { return ParseTrajectory(Fixture(name)); }

}  // namespace

TEST_CASE("text: tokenization folds case and splits on non-word code points") {
  CHECK(text::Tokenize("Robert Holmes à Court, 1962!") ==
        std::vector<std::string>{"robert", "holmes", "à", "court", "1962"});
  CHECK(text::Lowercase("ÀÉÎ Massey") == "àéî massey");
  CHECK(text::Trim("  x y \n") == "x y");
  CHECK(text::CodePointCount("naïve") == 5);
  CHECK(text::Encode(text::Decode("Sonnac ü")) == "Sonnac ü");
}

TEST_CASE("protocol: parse_trajectory examples") {
  SUBCASE("prompt only is truncated") {
    const std::vector<Message> raw = {{Role::kSystem, "…"}, {Role::kUser, "Question: Q"}};
    const Trajectory t = ParseTrajectory(raw);
    CHECK(t.turns.size() == 2);
    CHECK(t.truncated);
    CHECK(t.turns[1].index == 1);
  }
  SUBCASE("recorded solver transcript 1") {
    const Trajectory t = Parsed("solver-1");
    CHECK_FALSE(t.truncated);
    CHECK(t.AssistantTurnCount() == 2);
    CHECK(t.FinalAssistantTurn()->text.find("<answer>Cork</answer>") != std::string::npos);
  }
  SUBCASE("too many assistant turns") {
    std::vector<Message> raw = {{Role::kUser, "Q"}};
    for (int i = 0; i < 6; ++i) raw.push_back({Role::kAssistant, "<think> x </think>"});
    try {
      ParseTrajectory(raw, 5);
      FAIL("expected MalformedTranscript");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kMalformedTranscript);
    }
  }
  SUBCASE("two consecutive tool turns") {
    const std::vector<Message> raw = {{Role::kUser, "Q"},
                                      {Role::kAssistant, Call("search", "a")},
                                      {Role::kTool, ToolResponse()},
                                      {Role::kTool, ToolResponse()}};
    CHECK_THROWS_AS(ParseTrajectory(raw), Error);
  }
  SUBCASE("first turn must be system or user") {
    const std::vector<Message> raw = {{Role::kAssistant, "hi"}};
    CHECK_THROWS_AS(ParseTrajectory(raw), Error);
    CHECK_THROWS_AS(ParseTrajectory(std::vector<Message>{}), Error);
  }
  SUBCASE("unclosed tag in the final turn marks truncation") {
    const std::vector<Message> raw = {{Role::kUser, "Q"},
                                      {Role::kAssistant, "<answer> x </answer><think> more"}};
    CHECK(ParseTrajectory(raw).truncated);
  }
  SUBCASE("recorded solver transcript 4 never answers") {
    CHECK(Parsed("solver-4").truncated);
  }
}

TEST_CASE("protocol: extract_tool_calls") {
  Turn turn{Role::kAssistant,
            "<think> go </think>\n<tool_call>\n"
            R"({"name":"search","arguments":{"query_list":["a"]}})"
            "\n</tool_call>",
            2};
  ToolCallExtraction x = ExtractToolCalls(turn);
  REQUIRE(x.calls.size() == 1);
  CHECK(x.calls[0] == ToolCall{"search", {"a"}});
  CHECK(x.invalid.empty());

  turn.text = "no tags here";
  x = ExtractToolCalls(turn);
  CHECK(x.calls.empty());
  CHECK(x.invalid.empty());

  turn.text = Call("browse", "a");
  x = ExtractToolCalls(turn);
  CHECK(x.calls.empty());
  REQUIRE(x.invalid.size() == 1);
  CHECK(x.invalid[0].reason.find("browse") != std::string::npos);

  SUBCASE("malformed payloads are reported per span") {
    turn.text = "<tool_call>{\"name\":\"search\"} {}</tool_call>" + Call("search", "ok") +
                "<tool_call>[1]</tool_call><tool_call>{\"name\":\"search\",\"arguments\":{"
                "\"query_list\":[]}}</tool_call>";
    x = ExtractToolCalls(turn);
    CHECK(x.calls.size() == 1);
    CHECK(x.invalid.size() == 3);
  }
  SUBCASE("only assistant turns carry calls") {
    turn.role = Role::kTool;
    CHECK_THROWS_AS(ExtractToolCalls(turn), Error);
  }
}

TEST_CASE("protocol: extract_qa") {
  SUBCASE("recorded proposer transcript 1") {
    const auto qa = ExtractQa(Parsed("proposer-1"), 1);
    REQUIRE(qa.has_value());
    CHECK(qa->question.rfind("At which university", 0) == 0);
    CHECK(qa->answer == "Massey University");
    CHECK(qa->hop == 1);
  }
  SUBCASE("two answer blocks") {
    const std::vector<Message> raw = {
        {Role::kUser, "Q"},
        {Role::kAssistant, "<question> q </question><answer> a </answer><answer> b </answer>"}};
    CHECK_FALSE(ExtractQa(ParseTrajectory(raw), 1).has_value());
  }
  SUBCASE("recorded proposer transcript 4 with padded tags") {
    const auto qa = ExtractQa(Parsed("proposer-4"), 4, "alp-act");
    REQUIRE(qa.has_value());
    CHECK(qa->answer == "1989");
    CHECK(qa->question.find("first sit") != std::string::npos);
    CHECK(qa->hop == 4);
    CHECK(qa->source_doc_id == "alp-act");
  }
  SUBCASE("blocks before the final turn do not count") {
    const std::vector<Message> raw = {
        {Role::kUser, "Q"},
        {Role::kAssistant, "<question> q </question><answer> a </answer>" + Call("search", "x")},
        {Role::kTool, ToolResponse()},
        {Role::kAssistant, "<think> done </think>"}};
    CHECK_FALSE(ExtractQa(ParseTrajectory(raw), 2).has_value());
  }
  SUBCASE("nested blocks are invalid") {
    const std::vector<Message> raw = {
        {Role::kUser, "Q"},
        {Role::kAssistant, "<question> q </question><answer> <answer>a</answer> </answer>"}};
    CHECK_FALSE(ExtractQa(ParseTrajectory(raw), 1).has_value());
    CHECK(ScanTag("<answer> <answer>a</answer> </answer>", "answer").nested == 1);
  }
}

TEST_CASE("protocol: validate_format") {
  SUBCASE("recorded proposer transcript 3, hop 3") {
    const FormatReport r = ValidateFormat(Parsed("proposer-3"), 3);
    CHECK(r.think_ok);
    CHECK(r.tool_ok);
    CHECK(r.question_ok);
    CHECK(r.answer_ok);
    CHECK(r.violations.empty());
  }
  SUBCASE("no think blocks") {
    const std::vector<Message> raw = {
        {Role::kUser, "Q"}, {Role::kAssistant, "<question> q </question><answer> a </answer>"}};
    const FormatReport r = ValidateFormat(ParseTrajectory(raw), 1);
    CHECK_FALSE(r.think_ok);
    CHECK(r.tool_ok);
    CHECK(r.question_ok);
    CHECK(r.answer_ok);
  }
  SUBCASE("hop 2 without a search") {
    const std::vector<Message> raw = {
        {Role::kUser, "Q"},
        {Role::kAssistant, "<think> t </think><question> q </question><answer> a </answer>"}};
    const FormatReport r = ValidateFormat(ParseTrajectory(raw), 2);
    CHECK_FALSE(r.tool_ok);
    CHECK(std::find(r.violations.begin(), r.violations.end(), "expected 1 search, saw 0") !=
          r.violations.end());
  }
  SUBCASE("an invalid call fails tool_ok even when the count matches") {
    const std::vector<Message> raw = {
        {Role::kUser, "Q"},
        {Role::kAssistant, "<think> t </think>" + Call("search", "a") + Call("browse", "b")},
        {Role::kTool, ToolResponse()},
        {Role::kAssistant, "<think> t </think><question> q </question><answer> a </answer>"}};
    CHECK_FALSE(ValidateFormat(ParseTrajectory(raw), 2).tool_ok);
  }
  SUBCASE("pure and hop-checked") {
    const Trajectory t = Parsed("proposer-2");
    CHECK(ValidateFormat(t, 2) == ValidateFormat(t, 2));
    CHECK_THROWS_AS(ValidateFormat(t, 5), Error);
  }
}

TEST_CASE("protocol: tool_ok implies h-1 valid calls") {
  Rng rng(99);
  for (int trial = 0; trial < 500; ++trial) {
    const int searches = static_cast<int>(rng.Below(4));
    std::vector<Message> raw = {{Role::kUser, "Q"}};
    for (int s = 0; s < searches; ++s) {
      raw.push_back({Role::kAssistant, "<think> t </think>" +
                                           Call(rng.Bernoulli(0.2) ? "browse" : "search", "q")});
      raw.push_back({Role::kTool, ToolResponse()});
    }
    raw.push_back({Role::kAssistant, "<think> t </think><question> q </question><answer> a </answer>"});
    const Trajectory t = ParseTrajectory(raw);
    for (int h = 1; h <= 4; ++h) {
      const FormatReport r = ValidateFormat(t, h);
      if (!r.tool_ok) continue;
      int valid = 0;
      for (const auto& turn : t.turns) {
        if (turn.role == Role::kAssistant) valid += static_cast<int>(ExtractToolCalls(turn).calls.size());
      }
      CHECK(valid == h - 1);
    }
  }
}

TEST_CASE("protocol: render and parse round-trip") {
  for (const auto& name : prompts::RecordedTranscriptNames()) {
    CAPTURE(name);
    const std::vector<Message> raw = Fixture(name.c_str());
    const Trajectory t = ParseTrajectory(raw);
    CHECK(RenderTrajectory(t) == raw);
    CHECK(ParseTrajectory(RenderTrajectory(t)) == t);
  }
  const std::vector<Message> empty_turn = {{Role::kUser, "Q"}, {Role::kAssistant, ""}};
  CHECK(RenderTrajectory(ParseTrajectory(empty_turn))[1].text.empty());

  Rng rng(2024);
  for (int i = 0; i < 1000; ++i) {
    const std::vector<Message> raw = RandomTranscript(rng);
    const Trajectory t = ParseTrajectory(raw, 5, i);
    REQUIRE(ParseTrajectory(RenderTrajectory(t), t.max_turns, t.token_count) == t);
  }
}

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

#include <atomic>
#include <string>
#include <vector>

#include "doctest.h"
#include "evoqa/error.hpp"
#include "evoqa/policy.hpp"
#include "evoqa/prompts.hpp"
#include "evoqa/rewards.hpp"
#include "fixtures.hpp"

namespace {

using namespace evoqa;
using evoqa::testing::ChainCorpus;
using evoqa::testing::FakeServer;
using nlohmann::json;

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::kInternal;
}

std::shared_ptr<const PolicyBackend> Script(const std::string& id) {
  return MakeBackend(PolicyHandle::Scripted(id));
}

int ToolTurns(const Trajectory& t) {
  int n = 0;
  for (const auto& turn : t.turns) n += turn.role == Role::kTool;
  return n;
}

}  // namespace

TEST_CASE("policy: handles validate their kind") {
  CHECK_NOTHROW(Validate(PolicyHandle::Scripted("echo")));
  CHECK_NOTHROW(Validate(PolicyHandle::Http("http://127.0.0.1:9/v1")));
  PolicyHandle h = PolicyHandle::Scripted("echo");
  h.endpoint = "http://x";
  CHECK(CodeOf([&] { Validate(h); }) == ErrorCode::kInvalidArgument);
  CHECK(CodeOf([] { Validate(PolicyHandle::Http("")); }) == ErrorCode::kInvalidArgument);
  CHECK(CodeOf([] { Validate(PolicyHandle::Http("ftp://host/x")); }) == ErrorCode::kInvalidArgument);
  CHECK(CodeOf([] { MakeBackend(PolicyHandle::Scripted("no-such-script")); }) ==
        ErrorCode::kInvalidArgument);
  const auto names = ScriptNames();
  CHECK(std::find(names.begin(), names.end(), "lookup") != names.end());
}

TEST_CASE("policy: scripted generation") {
  GenRequest req;
  req.messages = {{Role::kUser, "hello there"}};
  req.sample_count = 2;
  const auto out = Generate(PolicyHandle::Scripted("echo"), req);
  REQUIRE(out.size() == 2);
  CHECK(out[0].text == "hello there");
  CHECK(out[0].text == out[1].text);
  CHECK_FALSE(out[0].token_count.has_value());

  SUBCASE("stop tags cut after the first close tag") {
    req.messages = {{Role::kUser, "<tool_call>a</tool_call> tail <answer>b</answer>"}};
    req.sample_count = 1;
    CHECK(Generate(PolicyHandle::Scripted("echo"), req)[0].text == "<tool_call>a</tool_call>");
  }
  SUBCASE("output is capped by max_new_tokens") {
    req.messages = {{Role::kUser, std::string(100, 'x')}};
    req.max_new_tokens = 5;
    CHECK(Generate(PolicyHandle::Scripted("echo"), req)[0].text.size() == 5 * kCharsPerToken);
  }
  SUBCASE("bad requests") {
    req.sample_count = 0;
    CHECK(CodeOf([&] { Generate(PolicyHandle::Scripted("echo"), req); }) ==
          ErrorCode::kInvalidArgument);
  }
}

TEST_CASE("policy: replay of a recorded solver transcript") {
  const auto recorded = prompts::RecordedTranscript("solver-1");
  REQUIRE(recorded.has_value());
  const std::vector<Message> prompt(recorded->begin(), recorded->begin() + 2);
  const EpisodeRecord rec =
      RunEpisode(*Script("replay-solver-1"), prompt, RolloutConfig::Solver(),
                 nullptr, 0);
  // Without an index the tool turn is not produced, so compare assistant turns.
  std::vector<std::string> want, got;
  for (const auto& m : *recorded) {
    if (m.role == Role::kAssistant) want.push_back(m.text);
  }
  for (const auto& t : rec.trajectory.turns) {
    if (t.role == Role::kAssistant) got.push_back(t.text);
  }
  CHECK(got == want);
  CHECK(FinalAnswer(rec.trajectory) == "Cork");
}

TEST_CASE("policy: episodes against the chain corpus") {
  const SearchIndex idx = SearchIndex::Build(ChainCorpus(12), {});
  const Document& seed_doc = idx.corpus()[4];

  SUBCASE("a two-search proposer yields a valid hop-3 pair") {
    const EpisodeRecord rec = RunEpisode(*Script("proposer"), prompts::ProposerPrompt(3, seed_doc),
                                         RolloutConfig::Proposer(), &idx, 1);
    CHECK(ToolTurns(rec.trajectory) == 2);
    CHECK_FALSE(rec.trajectory.truncated);
    CHECK(rec.meta.stop_reason == "answer");
    CHECK(rec.meta.token_source == "char_proxy");
    const auto qa = ExtractQa(rec.trajectory, 3, seed_doc.doc_id);
    REQUIRE(qa.has_value());
    CHECK(qa->answer == "Doc06");
    const FormatReport f = ValidateFormat(rec.trajectory, 3);
    CHECK(f.SatisfiedCount() == 4);
    // Each tool turn renders the preceding call's results.
    for (std::size_t i = 0; i < rec.trajectory.turns.size(); ++i) {
      const Turn& t = rec.trajectory.turns[i];
      if (t.role != Role::kTool) continue;
      const auto calls = ExtractToolCalls(rec.trajectory.turns[i - 1]);
      std::vector<std::string> queries;
      std::vector<std::vector<SearchResult>> results;
      for (const auto& c : calls.calls) {
        for (const auto& q : c.query_list) {
          queries.push_back(q);
          results.push_back(idx.Query(q, 3));
        }
      }
      CHECK(t.text == RenderToolResponse(results, queries));
    }
  }
  SUBCASE("a script that never answers stops at max_turns") {
    const EpisodeRecord rec = RunEpisode(*Script("never-answer"), prompts::SolverPrompt("q?"),
                                         RolloutConfig::Solver(), &idx, 0);
    CHECK(rec.trajectory.truncated);
    CHECK(rec.trajectory.AssistantTurnCount() == 5);
    CHECK(rec.meta.stop_reason == "max_turns");
  }
  SUBCASE("an invalid tool name is recorded and the episode continues") {
    const EpisodeRecord rec = RunEpisode(*Script("bad-tool"), prompts::SolverPrompt("q?"),
                                         RolloutConfig::Solver(), &idx, 0);
    CHECK(ToolTurns(rec.trajectory) == 0);
    CHECK(rec.trajectory.AssistantTurnCount() == 2);
    REQUIRE(rec.meta.invalid_tool_calls.size() == 1);
    CHECK(rec.meta.invalid_tool_calls[0].find("browse") != std::string::npos);
    CHECK(FinalAnswer(rec.trajectory) == "unknown");
  }
  SUBCASE("token budget") {
    RolloutConfig cfg = RolloutConfig::Solver();
    cfg.max_sequence_tokens = 10;
    const EpisodeRecord rec = RunEpisode(*Script("never-answer"), prompts::SolverPrompt("q?"), cfg,
                                         &idx, 0);
    CHECK(rec.meta.stop_reason == "token_budget");
    CHECK(rec.trajectory.AssistantTurnCount() == 0);
    CHECK(rec.trajectory.truncated);
  }
  SUBCASE("tool turns never exceed max_turns - 1 and never repeat") {
    RolloutConfig cfg = RolloutConfig::Proposer();
    cfg.max_turns = 2;
    const EpisodeRecord rec = RunEpisode(*Script("proposer"), prompts::ProposerPrompt(4, seed_doc),
                                         cfg, &idx, 0);
    CHECK(ToolTurns(rec.trajectory) <= 1);
    for (std::size_t i = 1; i < rec.trajectory.turns.size(); ++i) {
      CHECK_FALSE((rec.trajectory.turns[i].role == Role::kTool &&
                   rec.trajectory.turns[i - 1].role == Role::kTool));
    }
  }
  SUBCASE("deterministic") {
    const auto a = RunEpisode(*Script("lookup?p=0.5"), prompts::SolverPrompt("Doc03 amber"),
                              RolloutConfig::Solver(), &idx, 11, 3);
    const auto b = RunEpisode(*Script("lookup?p=0.5"), prompts::SolverPrompt("Doc03 amber"),
                              RolloutConfig::Solver(), &idx, 11, 3);
    CHECK(a == b);
  }
}

TEST_CASE("policy: solver sampling") {
  const SearchIndex idx = SearchIndex::Build(ChainCorpus(12), {});
  const RolloutConfig cfg = RolloutConfig::Solver();
  const auto fixed = SampleSolverAnswers(*Script("fixed?answer=Paris"), "q", 5, cfg, &idx, 0);
  CHECK(fixed == std::vector<std::string>(5, "Paris"));
  const QAPair qa{"q", "Paris", 1, ""};
  FormatReport ok;
  ok.think_ok = ok.tool_ok = ok.question_ok = ok.answer_ok = true;
  CHECK(ProposerReward(qa, fixed, ok).difficulty == 0.0);

  const auto first = SampleSolverAnswers(*Script("lookup?k=1"), "Doc07 is a", 5, cfg, &idx, 0);
  CHECK(first[0] == "Doc07");
  for (int i = 1; i < 5; ++i) CHECK(first[static_cast<std::size_t>(i)] == "unknown");
  const QAPair qa7{"q", "Doc07", 1, ""};
  CHECK(ProposerReward(qa7, first, ok).k == 1);
  CHECK(ProposerReward(qa7, first, ok).difficulty == 1.0);

  CHECK(CodeOf([&] { SampleSolverAnswers(*Script("echo"), "q", 1, cfg, &idx, 0); }) ==
        ErrorCode::kDomainError);
}

TEST_CASE("policy: http backend contract") {
  FakeServer fake;
  std::atomic<int> hits{0};
  json last_body;
  std::mutex mu;
  fake.server().Post("/v1/chat", [&](const httplib::Request& req, httplib::Response& res) {
    ++hits;
    const json body = json::parse(req.body);
    {
      std::lock_guard<std::mutex> lock(mu);
      last_body = body;
    }
    json choices = json::array();
    for (int i = 0; i < body["n"].get<int>(); ++i) {
      // Servers usually drop the stop sequence; the backend restores it.
      choices.push_back({{"text", "<think> ok </think>\n<answer> Cork"}, {"token_count", 7},
                         {"logprobs", {-0.5, -0.25}}});
    }
    res.set_content(json{{"choices", choices}}.dump(), "application/json");
  });
  fake.server().Post("/short", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"choices":[]})", "application/json");
  });
  fake.server().Post("/garbage", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("not json", "text/plain");
  });
  fake.server().Post("/auth", [](const httplib::Request& req, httplib::Response& res) {
    if (req.get_header_value("Authorization") != "Bearer s3cret") {
      res.status = 401;
      return;
    }
    res.set_content(R"({"choices":[{"text":"<answer>x</answer>"}]})", "application/json");
  });
  fake.Start();

  GenRequest req;
  req.messages = {{Role::kSystem, "s"}, {Role::kUser, "u"}};
  req.sample_count = 3;
  req.temperature = 0.0;
  req.seed = 42;
  req.sample_index = 2;
  const auto out = Generate(PolicyHandle::Http(fake.url("/v1/chat")), req);
  REQUIRE(out.size() == 3);
  CHECK(out[0].text == "<think> ok </think>\n<answer> Cork </answer>");
  CHECK(out[0].token_count == std::optional<std::size_t>(7));
  CHECK(out[0].token_logprobs->size() == 2);
  {
    std::lock_guard<std::mutex> lock(mu);
    CHECK(last_body["n"] == 3);
    CHECK(last_body["seed"] == 42);
    CHECK(last_body["sample_index"] == 2);
    CHECK(last_body["messages"][1]["role"] == "user");
    CHECK(last_body["messages"][1]["content"] == "u");
    CHECK(last_body["stop"] == json::array({"</tool_call>", "</answer>"}));
  }

  SUBCASE("token counts from the backend drive the budget") {
    const EpisodeRecord rec = RunEpisode(*MakeBackend(PolicyHandle::Http(fake.url("/v1/chat"))),
                                         prompts::SolverPrompt("q"), RolloutConfig::Solver(),
                                         nullptr, 0);
    CHECK(rec.meta.token_source == "backend");
    CHECK(FinalAnswer(rec.trajectory) == "Cork");
  }
  SUBCASE("fewer completions than requested") {
    CHECK(CodeOf([&] { Generate(PolicyHandle::Http(fake.url("/short")), req); }) ==
          ErrorCode::kContractViolation);
  }
  SUBCASE("malformed body") {
    PolicyHandle h = PolicyHandle::Http(fake.url("/garbage"));
    h.max_retries = 0;
    CHECK(CodeOf([&] { Generate(h, req); }) == ErrorCode::kContractViolation);
  }
  SUBCASE("bearer token") {
    req.sample_count = 1;
    PolicyHandle bad = PolicyHandle::Http(fake.url("/auth"), "wrong");
    bad.max_retries = 0;
    CHECK_THROWS_AS(Generate(bad, req), Error);
    CHECK(Generate(PolicyHandle::Http(fake.url("/auth"), "s3cret"), req)[0].text == "<answer>x</answer>");
  }
  SUBCASE("unreachable endpoint after retries") {
    PolicyHandle h = PolicyHandle::Http("http://127.0.0.1:" +
                                        std::to_string(evoqa::testing::ClosedPort()) + "/v1");
    h.max_retries = 2;
    h.timeout_ms = 500;
    CHECK(CodeOf([&] { Generate(h, req); }) == ErrorCode::kBackendUnavailable);
  }
}

TEST_CASE("policy: per-sample failures can be tolerated") {
  FakeServer fake;
  fake.server().Post("/flaky", [](const httplib::Request& req, httplib::Response& res) {
    const json body = json::parse(req.body);
    if (body["sample_index"].get<int>() % 2 == 1) {
      res.status = 503;
      return;
    }
    res.set_content(R"({"choices":[{"text":"<think>x</think><answer> A </answer>"}]})",
                    "application/json");
  });
  fake.Start();
  PolicyHandle h = PolicyHandle::Http(fake.url("/flaky"));
  h.max_retries = 0;
  const auto backend = MakeBackend(h);
  const SolverSamples s =
      SampleSolverEpisodes(*backend, "q", 4, RolloutConfig::Solver(), nullptr, 0, true);
  CHECK(s.answers == std::vector<std::string>{"A", "", "A", ""});
  CHECK(s.failed == std::vector<bool>{false, true, false, true});
  CHECK(s.episodes[1].meta.stop_reason == "backend_error");
  CHECK(CodeOf([&] {
          SampleSolverEpisodes(*backend, "q", 4, RolloutConfig::Solver(), nullptr, 0, false);
        }) == ErrorCode::kBackendUnavailable);
}

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

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "doctest.h"
#include "evoqa/bench_eval.hpp"
#include "evoqa/error.hpp"
#include "fixtures.hpp"

namespace {

using namespace evoqa;
using evoqa::testing::ClosedPort;

std::string Item(const std::string& qid, const std::string& dataset,
                 const std::vector<std::string>& golds) {
  nlohmann::json j = {{"qid", qid}, {"question", "question " + qid}, {"golds", golds},
                      {"dataset", dataset}};
  return j.dump() + "\n";
}

std::shared_ptr<const PolicyBackend> Fixed(const std::string& answer) {
  return MakeBackend(PolicyHandle::Scripted("fixed?answer=" + answer));
}

std::optional<ErrorCode> CodeOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace

TEST_CASE("bench_eval: loading") {
  const auto items = LoadBenchmark(EVOQA_TEST_DATA "/bench5.ndjson");
  REQUIRE(items.size() == 5);
  CHECK(items[1].gold_answers == std::vector<std::string>{"River Lee", "Lee"});
  CHECK(items[4].dataset == "bamboogle");

  CHECK(CodeOf([] { ParseBenchmark(Item("a", "x", {"1"}) + Item("a", "x", {"2"})); }) ==
        ErrorCode::kDuplicateQid);
  CHECK(CodeOf([] { ParseBenchmark(Item("a", "x", {})); }) == ErrorCode::kParseError);
  CHECK(CodeOf([] { ParseBenchmark("{\"qid\":\"a\"\n"); }) == ErrorCode::kParseError);
  CHECK(CodeOf([] { ParseBenchmark(R"({"qid":"a","question":"q","golds":"x","dataset":"d"})"); }) ==
        ErrorCode::kParseError);
  try {
    ParseBenchmark(Item("a", "x", {"1"}) + "\n" + Item("a", "y", {"1"}));
    FAIL("expected DuplicateQid");
  } catch (const LineError& e) {
    CHECK(e.line() == 3);
  }
  CHECK(CodeOf([] { LoadBenchmark("/nonexistent/bench.ndjson"); }) == ErrorCode::kIoError);
}

TEST_CASE("bench_eval: exact match over golds") {
  const std::vector<std::string> golds = {"River Lee", "Lee"};
  CHECK(BestExactMatch("the lee", golds) == 1);
  CHECK(BestExactMatch("River Lee.", golds) == 1);
  CHECK(BestExactMatch("Lee River", golds) == 0);
  CHECK(BestExactMatch("the lee", golds, MatchConfig::Strict()) == 0);
  CHECK(BestExactMatch("Lee", golds, MatchConfig::Strict()) == 1);
}

TEST_CASE("bench_eval: evaluate") {
  const RolloutConfig cfg = RolloutConfig::Solver();
  SUBCASE("always right") {
    std::string text;
    for (int i = 0; i < 6; ++i) text += Item("q" + std::to_string(i), i % 2 ? "nq" : "popqa", {"Paris"});
    const auto items = ParseBenchmark(text);
    const auto r = Evaluate(items, *Fixed("Paris"), cfg, nullptr);
    REQUIRE(r.per_dataset.size() == 2);
    for (const auto& d : r.per_dataset) CHECK(d.em_mean == 1.0);
    CHECK(r.overall_mean == 1.0);
  }
  SUBCASE("half right on ten items") {
    std::string text;
    for (int i = 0; i < 10; ++i) text += Item("q" + std::to_string(i), "nq", {i < 5 ? "Paris" : "Rome"});
    const auto r = Evaluate(ParseBenchmark(text), *Fixed("Paris"), cfg, nullptr);
    REQUIRE(r.per_dataset.size() == 1);
    CHECK(r.per_dataset[0].em_mean == 0.5);
    CHECK(r.per_dataset[0].n_items == 10);
  }
  SUBCASE("second gold matches") {
    const auto items = LoadBenchmark(EVOQA_TEST_DATA "/bench5.ndjson");
    const auto r = Evaluate(items, *Fixed("London"), cfg, nullptr);
    for (const auto& it : r.items) CHECK(it.em == (it.qid == "hp-1" ? 1 : 0));
  }
  SUBCASE("overall is the mean of dataset means") {
    const auto items = LoadBenchmark(EVOQA_TEST_DATA "/bench5.ndjson");
    const auto r = Evaluate(items, *Fixed("Paris"), cfg, nullptr);
    REQUIRE(r.per_dataset.size() == 4);
    CHECK(r.per_dataset[0].dataset == "bamboogle");
    double sum = 0.0;
    for (const auto& d : r.per_dataset) sum += d.em_mean;
    CHECK(std::abs(r.overall_mean - sum / 4) <= 1e-12);
    CHECK(r.overall_mean == doctest::Approx((0.0 + 1.0 + 0.5 + 0.0) / 4));
    CHECK(r.Csv() ==
          "dataset,n_items,em_mean\n"
          "bamboogle,1,0.000000\n"
          "hotpotqa,1,1.000000\n"
          "nq,2,0.500000\n"
          "triviaqa,1,0.000000\n"
          "average,5,0.375000\n");
    CHECK(r.Table().find("average") != std::string::npos);
  }
  SUBCASE("leave one out moves only its dataset") {
    std::string text;
    const char* datasets[] = {"nq", "nq", "nq", "tq", "tq", "pq"};
    const char* golds[] = {"Paris", "Rome", "Paris", "Paris", "Oslo", "Rome"};
    for (int i = 0; i < 6; ++i) text += Item("q" + std::to_string(i), datasets[i], {golds[i]});
    const auto items = ParseBenchmark(text);
    const auto solver = Fixed("Paris");
    const auto full = Evaluate(items, *solver, cfg, nullptr);
    for (std::size_t drop = 0; drop < items.size(); ++drop) {
      std::vector<BenchItem> rest = items;
      rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(drop));
      const auto r = Evaluate(rest, *solver, cfg, nullptr);
      const bool hit = std::string(golds[drop]) == "Paris";
      for (const auto& before : full.per_dataset) {
        const DatasetScore* after = nullptr;
        for (const auto& d : r.per_dataset) {
          if (d.dataset == before.dataset) after = &d;
        }
        if (before.dataset != datasets[drop]) {
          REQUIRE(after != nullptr);
          CHECK(after->em_mean == before.em_mean);
        } else if (after != nullptr) {
          if (hit) CHECK(after->em_mean <= before.em_mean);
          else CHECK(after->em_mean >= before.em_mean);
        }
      }
    }
  }
  SUBCASE("parallel evaluation is deterministic") {
    const auto items = LoadBenchmark(EVOQA_TEST_DATA "/bench5.ndjson");
    const auto solver = MakeBackend(PolicyHandle::Scripted("lookup"));
    const SearchIndex index = SearchIndex::Build(evoqa::testing::ChainCorpus(12), {});
    const auto a = Evaluate(items, *solver, cfg, &index, {}, 1, 3);
    const auto b = Evaluate(items, *solver, cfg, &index, {}, 4, 3);
    CHECK(a.Csv() == b.Csv());
    REQUIRE(a.items.size() == b.items.size());
    for (std::size_t i = 0; i < a.items.size(); ++i) {
      CHECK(a.items[i].prediction == b.items[i].prediction);
    }
  }
  SUBCASE("backend failures score zero") {
    PolicyHandle h =
        PolicyHandle::Http("http://127.0.0.1:" + std::to_string(ClosedPort()) + "/generate");
    h.max_retries = 0;
    h.timeout_ms = 300;
    const auto items = LoadBenchmark(EVOQA_TEST_DATA "/bench5.ndjson");
    const auto r = Evaluate(items, *MakeBackend(h), cfg, nullptr);
    CHECK(r.items.size() == 5);
    for (const auto& it : r.items) {
      CHECK(it.failed);
      CHECK(it.em == 0);
    }
    CHECK(r.overall_mean == 0.0);
  }
  SUBCASE("empty input") {
    CHECK(CodeOf([&] { Evaluate({}, *Fixed("x"), cfg, nullptr); }) == ErrorCode::kInvalidArgument);
  }
}

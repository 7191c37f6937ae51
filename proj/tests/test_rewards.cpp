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
#include "evoqa/rewards.hpp"
#include "evoqa/rng.hpp"

namespace {

using namespace evoqa;

FormatReport AllTrue() {
  FormatReport r;
  r.think_ok = r.tool_ok = r.question_ok = r.answer_ok = true;
  return r;
}

// Independent closed form of the difficulty reward.
double Oracle(int k, int n) {
  if (k <= 0 || k >= n) return 0.0;
  return static_cast<double>(n - k) / static_cast<double>(n - 1);
}

}  // namespace

TEST_CASE("rewards: normalize_answer") {
  CHECK(NormalizeAnswer("Massey University.") == "massey university");
  CHECK(NormalizeAnswer("") == "");
  CHECK(NormalizeAnswer("The Gold for the Caesars") == "gold for caesars");
  CHECK(NormalizeAnswer("  An   apple\tpie ") == "apple pie");
  CHECK(NormalizeAnswer("Massey University.", MatchConfig::Strict()) == "Massey University.");

  Rng rng(5);
  const std::string alphabet = "aAbB .,!-the an Théâtre\t";
  for (int i = 0; i < 2000; ++i) {
    std::string s;
    const int len = static_cast<int>(rng.Below(24));
    for (int c = 0; c < len; ++c) s += alphabet[rng.Below(alphabet.size())];
    const std::string once = NormalizeAnswer(s);
    CHECK(NormalizeAnswer(once) == once);
  }
}

TEST_CASE("rewards: exact_match") {
  CHECK(ExactMatch("Cork", "Cork") == 1);
  CHECK(ExactMatch("Cork city", "Cork") == 0);
  CHECK(ExactMatch("massey university", "Massey University") == 1);
  CHECK(ExactMatch("massey university", "Massey University", MatchConfig::Strict()) == 0);
  CHECK(SolverReward("Sonnac", "Sonnac") == 1);
  CHECK(SolverReward("", "Sonnac") == 0);
  CHECK(SolverReward("sonnac ", "Sonnac") == 1);

  const std::vector<std::string> samples = {"Cork", "cork.", "the Cork", "An Cork", "Paris", "", " "};
  for (const auto& a : samples) {
    CHECK(ExactMatch(a, a) == 1);
    for (const auto& b : samples) CHECK(ExactMatch(a, b) == ExactMatch(b, a));
  }
}

TEST_CASE("rewards: difficulty_reward") {
  CHECK(DifficultyReward(1, 5) == 1.0);
  CHECK(DifficultyReward(0, 5) == 0.0);
  CHECK(DifficultyReward(5, 5) == 0.0);
  CHECK(DifficultyReward(3, 5) == 0.5);
  for (int n = 2; n <= 12; ++n) {
    CHECK(DifficultyReward(1, n) == 1.0);
    for (int k = 0; k <= n; ++k) {
      CHECK(DifficultyReward(k, n) == Oracle(k, n));
      if (k != 1) CHECK(DifficultyReward(k, n) < 1.0);
    }
    for (int k = 1; k <= n - 2; ++k) {
      CHECK(DifficultyReward(k, n) - DifficultyReward(k + 1, n) ==
            doctest::Approx(1.0 / (n - 1)).epsilon(1e-12));
    }
  }
  for (auto [k, n] : {std::pair{0, 1}, {1, 1}, {-1, 5}, {6, 5}, {0, 0}}) {
    try {
      DifficultyReward(k, n);
      FAIL("expected DomainError");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kDomainError);
    }
  }
}

TEST_CASE("rewards: format_reward") {
  CHECK(ComputeFormatReward(AllTrue()).total == 0.5);
  CHECK(ComputeFormatReward(FormatReport{}).total == 0.0);
  FormatReport r;
  r.think_ok = r.answer_ok = true;
  const FormatReward f = ComputeFormatReward(r);
  CHECK(f.total == 0.25);
  CHECK(f.components == FormatComponents{0.125, 0.0, 0.0, 0.125});
}

TEST_CASE("rewards: proposer_reward") {
  const QAPair qa{"When?", "1989", 4, "d"};
  const std::vector<std::string> preds = {"1989", "1989", "1988", "1979", "2015"};
  RewardBreakdown r = ProposerReward(qa, preds, AllTrue());
  CHECK(r.k == 2);
  CHECK(r.n == 5);
  CHECK(r.difficulty == 0.75);
  CHECK(r.total == 1.25);

  const std::vector<std::string> wrong = {"a", "b", "c", "d", "e"};
  r = ProposerReward(qa, wrong, AllTrue());
  CHECK(r.total == 0.5);
  CHECK(r.total == r.format_total);

  FormatReport absent = AllTrue();
  absent.question_ok = absent.answer_ok = false;
  r = ProposerReward(std::nullopt, preds, absent);
  CHECK(r.difficulty == 0.0);
  CHECK(r.format_components[2] == 0.0);
  CHECK(r.format_components[3] == 0.0);
  CHECK(r.total == 0.25);

  const std::vector<std::string> one = {"1989"};
  CHECK_THROWS_AS(ProposerReward(qa, one, AllTrue()), Error);
}

TEST_CASE("rewards: brute force over every correctness pattern") {
  const QAPair qa{"q", "gold", 1, ""};
  for (int n = 2; n <= 6; ++n) {
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      std::vector<std::string> preds;
      int popcount = 0;
      for (int i = 0; i < n; ++i) {
        const bool hit = (mask >> i) & 1u;
        popcount += hit;
        preds.push_back(hit ? (i % 2 ? "Gold." : "gold") : "lead");
      }
      for (int flags = 0; flags < 16; ++flags) {
        FormatReport rep;
        rep.think_ok = flags & 1;
        rep.tool_ok = flags & 2;
        rep.question_ok = flags & 4;
        rep.answer_ok = flags & 8;
        const RewardBreakdown r = ProposerReward(qa, preds, rep);
        REQUIRE(r.k == popcount);
        REQUIRE(r.difficulty == Oracle(popcount, n));
        REQUIRE(r.format_total == 0.125 * rep.SatisfiedCount());
        REQUIRE(r.total == r.difficulty + r.format_total);
        REQUIRE(r.total >= 0.0);
        REQUIRE(r.total <= 1.5);
      }
    }
  }
}

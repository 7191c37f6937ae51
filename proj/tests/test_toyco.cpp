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
#include <vector>

#include "doctest.h"
#include "evoqa/error.hpp"
#include "evoqa/rewards.hpp"
#include "evoqa/toyco.hpp"

namespace {

using namespace evoqa;

double Choose(int n, int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

// Proposer that always emits one template.
ToyProposer Pinned(int hop, int difficulty) {
  ToyProposer p;
  p.logits.fill(-50.0);
  p.logits[static_cast<std::size_t>(TemplateIndex(hop, difficulty))] = 50.0;
  return p;
}

const ToyPhaseSummary& Summary(const ToyReport& r, int iteration, Phase phase) {
  for (const auto& s : r.phases) {
    if (s.iteration == iteration && s.phase == phase) return s;
  }
  FAIL("missing phase summary");
  return r.phases.front();
}

}  // namespace

TEST_CASE("toyco: template grid") {
  for (int i = 0; i < kToyTemplates; ++i) {
    const ToyTemplate t = TemplateAt(i);
    CHECK(TemplateIndex(t.hop, t.difficulty) == i);
  }
  CHECK_THROWS_AS(TemplateIndex(5, 1), Error);
  CHECK_THROWS_AS(TemplateIndex(1, 6), Error);
}

TEST_CASE("toyco: episodes") {
  ToyProposer proposer;
  ToySolver solver;
  SUBCASE("saturated solver") {
    solver.skill.fill(1e3);
    for (std::uint64_t s = 0; s < 200; ++s) {
      const ToyEpisode e = SampleToyEpisode(proposer, solver, 5, s);
      CHECK(e.k == 5);
      CHECK(e.reward == 0.0);
    }
  }
  SUBCASE("hopeless solver") {
    solver.skill.fill(-1e3);
    for (std::uint64_t s = 0; s < 200; ++s) {
      const ToyEpisode e = SampleToyEpisode(proposer, solver, 5, s);
      CHECK(e.k == 0);
      CHECK(e.reward == 0.0);
    }
  }
  SUBCASE("expected reward at p = 0.2 matches the binomial sum") {
    const ToyProposer pinned = Pinned(1, 1);
    solver.skill[0] = std::log(0.25) - 0.7;
    CHECK(solver.PassProbability(1, 1) == doctest::Approx(0.2).epsilon(1e-12));
    double oracle = 0.0;
    for (int k = 1; k <= 4; ++k) {
      oracle += Choose(5, k) * std::pow(0.2, k) * std::pow(0.8, 5 - k) * (5 - k) / 4.0;
    }
    CHECK(oracle == doctest::Approx(0.5904).epsilon(1e-12));
    Rng rng(2024);
    double sum = 0.0;
    const int episodes = 100000;
    for (int i = 0; i < episodes; ++i) {
      const ToyEpisode e = SampleToyEpisode(pinned, solver, 5, rng);
      REQUIRE(e.template_index == TemplateIndex(1, 1));
      REQUIRE(e.reward == DifficultyReward(e.k, 5));
      sum += e.reward;
    }
    CHECK(std::abs(sum / episodes - oracle) <= 0.02);
  }
  SUBCASE("n below two") {
    CHECK_THROWS_AS(SampleToyEpisode(proposer, solver, 1, std::uint64_t{1}), Error);
  }
}

TEST_CASE("toyco: proposer updates") {
  SUBCASE("equal rewards leave the logits alone") {
    ToyProposer proposer;
    ToySolver solver;
    solver.skill.fill(1e3);
    const ToyLogits before = proposer.logits;
    Rng rng(3);
    const auto r = ToyProposerStep(proposer, solver, 64, 5, rng);
    CHECK(r.mean_reward == 0.0);
    for (int i = 0; i < kToyTemplates; ++i) {
      CHECK(r.update[static_cast<std::size_t>(i)] == 0.0);
      CHECK(proposer.logits[static_cast<std::size_t>(i)] == before[static_cast<std::size_t>(i)]);
    }
  }
  SUBCASE("two templates in one hop group") {
    const ToyLogits logits{};
    const int a = TemplateIndex(2, 1);
    const int b = TemplateIndex(2, 4);
    std::vector<ToyEpisode> batch = {{a, 1, 1.0}, {b, 0, 0.0}};
    const auto adv = ToyAdvantages(batch, ToyEstimator::kHopGrouped);
    const double expect = 0.5 / (0.5 + kDefaultDelta);
    REQUIRE(adv.size() == 2);
    CHECK(adv[0] == doctest::Approx(expect).epsilon(1e-12));
    CHECK(adv[1] == doctest::Approx(-expect).epsilon(1e-12));
    const std::vector<int> templates = {a, b};
    const ToyLogits g = ToySurrogateGradient(logits, templates, adv);
    // Advantages sum to zero, so only the two sampled logits move: +-A/2.
    CHECK(g[static_cast<std::size_t>(a)] == doctest::Approx(expect / 2).epsilon(1e-12));
    CHECK(g[static_cast<std::size_t>(b)] == doctest::Approx(-expect / 2).epsilon(1e-12));
    for (int i = 0; i < kToyTemplates; ++i) {
      if (i != a && i != b) CHECK(std::abs(g[static_cast<std::size_t>(i)]) < 1e-15);
    }
    CHECK(g[static_cast<std::size_t>(a)] - g[static_cast<std::size_t>(b)] > 0.0);
  }
  SUBCASE("analytic gradient matches finite differences") {
    Rng rng(99);
    for (int trial = 0; trial < 200; ++trial) {
      ToyLogits logits;
      for (auto& l : logits) l = 2.0 * rng.Uniform() - 1.0;
      const int size = 2 + static_cast<int>(rng.Below(12));
      std::vector<int> templates;
      std::vector<double> adv;
      for (int i = 0; i < size; ++i) {
        templates.push_back(static_cast<int>(rng.Below(kToyTemplates)));
        adv.push_back(2.0 * rng.Uniform() - 1.0);
      }
      const ToyLogits g = ToySurrogateGradient(logits, templates, adv);
      const double h = 1e-5;
      for (std::size_t j = 0; j < logits.size(); ++j) {
        ToyLogits up = logits, down = logits;
        up[j] += h;
        down[j] -= h;
        const double fd =
            (ToySurrogate(up, templates, adv) - ToySurrogate(down, templates, adv)) / (2 * h);
        REQUIRE(std::abs(fd - g[j]) <= 1e-5 * std::max(std::abs(g[j]), 1e-3));
      }
    }
  }
  SUBCASE("softmax stays normalized") {
    ToyProposer proposer;
    proposer.learning_rate = 5.0;
    ToySolver solver;
    Rng rng(11);
    for (int step = 0; step < 100; ++step) {
      ToyProposerStep(proposer, solver, 32, 5, rng);
      double sum = 0.0;
      for (double p : proposer.Policy()) sum += p;
      REQUIRE(std::abs(sum - 1.0) <= 1e-9);
    }
  }
  SUBCASE("frozen solver: moving average of reward does not fall") {
    ToyProposer proposer;
    proposer.learning_rate = 0.3;
    const ToySolver solver;
    Rng rng(7);
    std::vector<double> rewards;
    for (int step = 0; step < 200; ++step) {
      rewards.push_back(ToyProposerStep(proposer, solver, 4096, 5, rng).mean_reward);
    }
    double prev = -1.0;
    for (std::size_t end = 50; end <= rewards.size(); ++end) {
      double avg = 0.0;
      for (std::size_t i = end - 50; i < end; ++i) avg += rewards[i];
      avg /= 50.0;
      REQUIRE(avg >= prev);
      prev = avg;
    }
  }
  SUBCASE("batch size floor") {
    ToyProposer proposer;
    ToySolver solver;
    Rng rng(1);
    CHECK_THROWS_AS(ToyProposerStep(proposer, solver, 4, 5, rng), Error);
  }
}

TEST_CASE("toyco: solver updates") {
  ToySolver solver;
  solver.learning_rate = 0.1;
  SUBCASE("saturated questions change nothing") {
    const std::vector<ToyTemplate> qs = {{1, 3}, {2, 5}, {4, 1}};
    const std::vector<int> ks = {5, 5, 0};
    ToySolverStep(solver, qs, ks, 5);
    for (double s : solver.skill) CHECK(s == 0.0);
  }
  SUBCASE("one informative hard question") {
    const std::vector<ToyTemplate> qs = {{2, 5}};
    const std::vector<int> ks = {1};
    ToySolverStep(solver, qs, ks, 5);
    CHECK(solver.skill[1] == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(solver.skill[0] == 0.0);
  }
  SUBCASE("only informative hops move") {
    const std::vector<ToyTemplate> qs = {{1, 2}, {3, 1}, {3, 5}, {4, 4}};
    const std::vector<int> ks = {5, 2, 0, 3};
    ToySolverStep(solver, qs, ks, 5);
    CHECK(solver.skill[0] == 0.0);
    CHECK(solver.skill[1] == 0.0);
    CHECK(solver.skill[2] == doctest::Approx(0.02));
    CHECK(solver.skill[3] == doctest::Approx(0.08));
  }
  SUBCASE("length mismatch") {
    const std::vector<ToyTemplate> qs = {{1, 1}};
    const std::vector<int> ks = {1, 2};
    try {
      ToySolverStep(solver, qs, ks, 5);
      FAIL("expected LengthMismatch");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kLengthMismatch);
    }
  }
}

TEST_CASE("toyco: co-evolution run") {
  const ToyConfig cfg;
  const ToyReport r = RunToyCoevolution(cfg);
  CHECK(r.steps.size() == 300);
  CHECK(r.episodes == 300u * 256u);
  const auto p1 = Summary(r, 1, Phase::kProposer);
  const auto p2 = Summary(r, 2, Phase::kProposer);
  const auto p3 = Summary(r, 3, Phase::kProposer);
  CHECK(p1.end_reward > p1.start_reward);
  CHECK(p2.start_reward < p1.end_reward);
  CHECK(p3.start_reward < p2.end_reward);
  CHECK(p3.end_difficulty > p1.end_difficulty);
  CHECK(r.Csv() == RunToyCoevolution(cfg).Csv());

  ToyConfig other = cfg;
  other.seed = 8;
  other.iterations = 1;
  CHECK(RunToyCoevolution(other).Csv() != r.Csv());
  other.batch_size = 4;
  CHECK_THROWS_AS(RunToyCoevolution(other), Error);
}

TEST_CASE("toyco: hop grouping lowers update variance") {
  ToyProposer proposer;
  ToySolver solver;
  solver.skill = {6.0, 2.0, -2.0, -6.0};
  int wins = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto v = CompareUpdateVariance(proposer, solver, 64, 5, 100, MixSeed({12345, s}));
    if (v.hop_grouped < v.global) ++wins;
  }
  CHECK(wins == 100);
  CHECK(SignTestPValue(wins, 100) < 0.01);
  CHECK(SignTestPValue(50, 100) > 0.5);
  CHECK(SignTestPValue(0, 10) == doctest::Approx(1.0));
  CHECK(SignTestPValue(10, 10) == doctest::Approx(1.0 / 1024));
}

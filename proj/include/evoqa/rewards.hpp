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

// Proposer and solver rewards: the difficulty term computed from the number
// of correct solver samples, the four-part format bonus, and exact match.

#ifndef EVOQA_REWARDS_HPP_
#define EVOQA_REWARDS_HPP_

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "evoqa/protocol.hpp"

namespace evoqa {

struct MatchConfig {
  bool lowercase = true;
  bool strip_articles = true;
  bool strip_punct = true;
  bool collapse_ws = true;

  // Byte equality after no transformation at all.
  static MatchConfig Strict() { return {false, false, false, false}; }
  bool operator==(const MatchConfig&) const = default;
};

inline constexpr double kFormatComponentWeight = 0.125;

// Order of the format components: think, tool, question, answer.
using FormatComponents = std::array<double, 4>;

struct RewardBreakdown {
  double difficulty = 0.0;
  FormatComponents format_components{};
  double format_total = 0.0;
  double total = 0.0;
  int k = 0;
  int n = 0;
};

// Lowercase, drop punctuation, drop the articles a/an/the, collapse
// whitespace; each step individually switchable. Idempotent.
std::string NormalizeAnswer(std::string_view text, const MatchConfig& cfg = {});

int ExactMatch(std::string_view pred, std::string_view gold,
               const MatchConfig& cfg = {});

// 1(0<k<n) * (n-k)/(n-1). Throws Error(kDomainError) when n < 2 or k is
// outside 0..n.
double DifficultyReward(int k, int n);

struct FormatReward {
  FormatComponents components{};
  double total = 0.0;
};

FormatReward ComputeFormatReward(const FormatReport& report);

// k counts predictions matching qa->answer after normalization. With no
// extractable QA pair the difficulty term is 0; n is still validated.
RewardBreakdown ProposerReward(const std::optional<QAPair>& qa,
                               std::span<const std::string> predictions,
                               const FormatReport& report,
                               const MatchConfig& cfg = {});

// Outcome reward of one solver sample.
inline int SolverReward(std::string_view pred, std::string_view gold,
                        const MatchConfig& cfg = {}) {
  return ExactMatch(pred, gold, cfg);
}

}  // namespace evoqa

#endif  // EVOQA_REWARDS_HPP_

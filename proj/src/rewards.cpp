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

#include "evoqa/rewards.hpp"

#include "evoqa/error.hpp"
#include "evoqa/text.hpp"

namespace evoqa {
namespace {

bool IsSpace(char32_t cp) {
  switch (cp) {
    case U' ':
    case U'\t':
    case U'\n':
    case U'\r':
    case U'\f':
    case U'\v':
    case 0x85:
    case 0xA0:
    case 0x1680:
    case 0x2028:
    case 0x2029:
    case 0x202F:
    case 0x205F:
    case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

bool IsArticle(std::u32string_view word) {
  return word == U"a" || word == U"an" || word == U"the";
}

std::u32string StripArticles(const std::u32string& in) {
  std::u32string out;
  out.reserve(in.size());
  std::size_t i = 0;
  while (i < in.size()) {
    if (!text::IsWordCodePoint(in[i])) {
      out.push_back(in[i++]);
      continue;
    }
    std::size_t j = i;
    while (j < in.size() && text::IsWordCodePoint(in[j])) ++j;
    std::u32string_view word(in.data() + i, j - i);
    if (IsArticle(word)) {
      out.push_back(U' ');
    } else {
      out.append(word);
    }
    i = j;
  }
  return out;
}

std::u32string CollapseWhitespace(const std::u32string& in) {
  std::u32string out;
  out.reserve(in.size());
  bool pending = false;
  for (char32_t cp : in) {
    if (IsSpace(cp)) {
      pending = !out.empty();
      continue;
    }
    if (pending) out.push_back(U' ');
    pending = false;
    out.push_back(cp);
  }
  return out;
}

}  // namespace

std::string NormalizeAnswer(std::string_view text, const MatchConfig& cfg) {
  std::u32string s = text::Decode(text);
  if (cfg.lowercase) {
    for (auto& cp : s) cp = text::FoldCase(cp);
  }
  if (cfg.strip_punct) {
    std::u32string kept;
    kept.reserve(s.size());
    for (char32_t cp : s) {
      if (text::IsWordCodePoint(cp) || IsSpace(cp)) kept.push_back(cp);
    }
    s = std::move(kept);
  }
  if (cfg.strip_articles) s = StripArticles(s);
  if (cfg.collapse_ws) s = CollapseWhitespace(s);
  return text::Encode(s);
}

int ExactMatch(std::string_view pred, std::string_view gold,
               const MatchConfig& cfg) {
  return NormalizeAnswer(pred, cfg) == NormalizeAnswer(gold, cfg) ? 1 : 0;
}

double DifficultyReward(int k, int n) {
  if (n < 2) {
    throw Error(ErrorCode::kDomainError,
                "difficulty reward needs n >= 2, got " + std::to_string(n));
  }
  if (k < 0 || k > n) {
    throw Error(ErrorCode::kDomainError, "k=" + std::to_string(k) +
                                             " outside 0.." + std::to_string(n));
  }
  if (k == 0 || k == n) return 0.0;
  return static_cast<double>(n - k) / static_cast<double>(n - 1);
}

FormatReward ComputeFormatReward(const FormatReport& report) {
  FormatReward out;
  const bool flags[4] = {report.think_ok, report.tool_ok, report.question_ok,
                         report.answer_ok};
  for (int i = 0; i < 4; ++i) {
    out.components[i] = flags[i] ? kFormatComponentWeight : 0.0;
    out.total += out.components[i];
  }
  return out;
}

RewardBreakdown ProposerReward(const std::optional<QAPair>& qa,
                               std::span<const std::string> predictions,
                               const FormatReport& report,
                               const MatchConfig& cfg) {
  RewardBreakdown r;
  r.n = static_cast<int>(predictions.size());
  if (qa.has_value()) {
    const std::string gold = NormalizeAnswer(qa->answer, cfg);
    for (const auto& p : predictions) r.k += NormalizeAnswer(p, cfg) == gold;
  }
  r.difficulty = DifficultyReward(r.k, r.n);
  const FormatReward f = ComputeFormatReward(report);
  r.format_components = f.components;
  r.format_total = f.total;
  r.total = r.difficulty + r.format_total;
  return r;
}

}  // namespace evoqa

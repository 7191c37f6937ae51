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

#ifndef EVOQA_TESTS_ORACLES_HPP_
#define EVOQA_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "evoqa/rng.hpp"
#include "evoqa/search.hpp"

namespace evoqa::testing {

// ASCII tokenizer written independently of the engine.
inline std::vector<std::string> AsciiTokens(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// Exhaustive scorer: every document, every query term, no postings.
inline std::vector<std::pair<std::string, double>> BruteForce(const Corpus& corpus,
                                                       const std::string& query, int top_k,
                                                       double k1 = 1.2, double b = 0.75) {
  const auto& docs = corpus.documents();
  std::vector<std::vector<std::string>> toks;
  double total = 0.0;
  for (const auto& d : docs) {
    toks.push_back(AsciiTokens(d.title + " " + d.text));
    total += static_cast<double>(toks.back().size());
  }
  const double avgdl = total / static_cast<double>(docs.size());
  const auto q = AsciiTokens(query);
  const std::set<std::string> terms(q.begin(), q.end());
  std::vector<std::pair<std::string, double>> scored;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    double score = 0.0;
    bool hit = false;
    for (const auto& term : terms) {
      const double tf = static_cast<double>(std::count(toks[i].begin(), toks[i].end(), term));
      if (tf == 0.0) continue;
      double df = 0.0;
      for (const auto& t : toks) df += std::find(t.begin(), t.end(), term) != t.end();
      const double idf = std::log(1.0 + (static_cast<double>(docs.size()) - df + 0.5) / (df + 0.5));
      const double dl = static_cast<double>(toks[i].size());
      score += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * dl / avgdl));
      hit = true;
    }
    if (hit) scored.emplace_back(docs[i].doc_id, score);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& x, const auto& y) {
    if (x.second != y.second) return x.second > y.second;
    return x.first < y.first;
  });
  if (scored.size() > static_cast<std::size_t>(top_k)) scored.resize(static_cast<std::size_t>(top_k));
  return scored;
}

inline const char* kVocab[] = {"river", "castle", "king", "queen", "harbor", "mountain", "forest",
                        "battle", "treaty", "empire", "poet",  "novel", "bridge",  "island",
                        "north",  "south",  "church", "school", "army",  "music"};

inline Corpus RandomCorpus(Rng& rng, int docs) {
  std::vector<Document> out;
  for (int i = 0; i < docs; ++i) {
    std::string text;
    const int len = 3 + static_cast<int>(rng.Below(25));
    for (int w = 0; w < len; ++w) text += std::string(kVocab[rng.Below(20)]) + " ";
    out.push_back({"doc" + std::to_string(1000 + i), std::string(kVocab[rng.Below(20)]), text});
  }
  return Corpus::FromDocuments(std::move(out));
}

inline std::string RandomQuery(Rng& rng) {
  std::string q;
  const int len = 1 + static_cast<int>(rng.Below(4));
  for (int w = 0; w < len; ++w) q += std::string(kVocab[rng.Below(20)]) + (rng.Bernoulli(0.3) ? "? " : " ");
  if (rng.Bernoulli(0.1)) q += "zzz";
  return q;
}

}  // namespace evoqa::testing

#endif  // EVOQA_TESTS_ORACLES_HPP_

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

// Exact-match evaluation of a solver policy over benchmark QA files.

#ifndef EVOQA_BENCH_EVAL_HPP_
#define EVOQA_BENCH_EVAL_HPP_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evoqa/policy.hpp"
#include "evoqa/rewards.hpp"
#include "evoqa/search.hpp"

namespace evoqa {

struct BenchItem {
  std::string qid;
  std::string question;
  std::vector<std::string> gold_answers;
  std::string dataset;

  bool operator==(const BenchItem&) const = default;
};

// Line-delimited {qid, question, golds, dataset}; blank lines are skipped.
// Throws LineError(kParseError) for malformed records or empty golds and
// LineError(kDuplicateQid) for a repeated qid.
std::vector<BenchItem> ParseBenchmark(std::string_view ndjson);
std::vector<BenchItem> LoadBenchmark(const std::string& path);

struct ItemResult {
  std::string qid;
  std::string dataset;
  std::string prediction;
  int em = 0;
  bool failed = false;
  std::string error;
};

struct DatasetScore {
  std::string dataset;
  std::size_t n_items = 0;
  double em_mean = 0.0;
};

struct EvalReport {
  std::vector<DatasetScore> per_dataset;  // sorted by dataset
  double overall_mean = 0.0;              // unweighted mean of per-dataset means
  std::vector<ItemResult> items;          // sorted by (dataset, qid)
  MatchConfig match;

  // dataset,n_items,em_mean rows followed by an "average" row.
  std::string Csv() const;
  std::string Table() const;
};

// Max over gold answers.
int BestExactMatch(std::string_view prediction, std::span<const std::string> golds,
                   const MatchConfig& cfg = {});

EvalReport Aggregate(std::vector<ItemResult> items, const MatchConfig& match = {});

// One greedy episode per item (cfg.temperature is forced to 0). Items whose
// episode fails on the backend score 0 and stay in the report. Throws
// Error(kInvalidArgument) for an empty item list.
EvalReport Evaluate(std::span<const BenchItem> items, const PolicyBackend& solver,
                    RolloutConfig cfg, const SearchIndex* index,
                    const MatchConfig& match = {}, int parallelism = 1,
                    std::uint64_t seed = 0);

}  // namespace evoqa

#endif  // EVOQA_BENCH_EVAL_HPP_

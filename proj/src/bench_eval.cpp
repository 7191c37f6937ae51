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

#include "evoqa/bench_eval.hpp"

#include <algorithm>
#include <map>
#include <unordered_set>

#include <fmt/format.h>

#include "evoqa/error.hpp"
#include "evoqa/prompts.hpp"
#include "log_internal.hpp"
#include "parallel.hpp"
#include "wire.hpp"

namespace evoqa {
namespace {

BenchItem ParseItem(const wire::json& rec, std::size_t line) {
  try {
    if (!rec.is_object()) throw Error(ErrorCode::kParseError, "record is not an object");
    BenchItem item;
    item.qid = wire::GetString(rec, "qid");
    item.question = wire::GetString(rec, "question");
    item.gold_answers = wire::GetStrings(rec, "golds");
    item.dataset = wire::GetString(rec, "dataset");
    if (item.qid.empty() || item.question.empty() || item.dataset.empty()) {
      throw Error(ErrorCode::kParseError, "qid, question and dataset must be non-empty");
    }
    if (item.gold_answers.empty()) throw Error(ErrorCode::kParseError, "golds is empty");
    return item;
  } catch (const LineError&) {
    throw;
  } catch (const Error& e) {
    throw LineError(ErrorCode::kParseError, line, e.what());
  }
}

}  // namespace

std::vector<BenchItem> ParseBenchmark(std::string_view ndjson) {
  std::vector<BenchItem> items;
  std::unordered_set<std::string> seen;
  std::size_t pos = 0, line = 0;
  while (pos < ndjson.size()) {
    std::size_t end = ndjson.find('\n', pos);
    if (end == std::string_view::npos) end = ndjson.size();
    const std::string_view text = ndjson.substr(pos, end - pos);
    pos = end + 1;
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    wire::json rec;
    try {
      rec = wire::json::parse(text);
    } catch (const wire::json::parse_error& e) {
      throw LineError(ErrorCode::kParseError, line, e.what());
    }
    BenchItem item = ParseItem(rec, line);
    if (!seen.insert(item.qid).second) {
      throw LineError(ErrorCode::kDuplicateQid, line, "duplicate qid '" + item.qid + "'");
    }
    items.push_back(std::move(item));
  }
  return items;
}

std::vector<BenchItem> LoadBenchmark(const std::string& path) {
  return ParseBenchmark(wire::ReadFile(path));
}

int BestExactMatch(std::string_view prediction, std::span<const std::string> golds,
                   const MatchConfig& cfg) {
  for (const auto& g : golds) {
    if (ExactMatch(prediction, g, cfg) == 1) return 1;
  }
  return 0;
}

EvalReport Aggregate(std::vector<ItemResult> items, const MatchConfig& match) {
  EvalReport report;
  report.match = match;
  std::sort(items.begin(), items.end(), [](const ItemResult& a, const ItemResult& b) {
    return std::tie(a.dataset, a.qid) < std::tie(b.dataset, b.qid);
  });
  std::map<std::string, std::pair<std::size_t, double>> sums;
  for (const auto& it : items) {
    auto& [n, em] = sums[it.dataset];
    ++n;
    em += it.em;
  }
  double total = 0.0;
  for (const auto& [name, s] : sums) {
    const double mean = s.second / static_cast<double>(s.first);
    report.per_dataset.push_back({name, s.first, mean});
    total += mean;
  }
  if (!sums.empty()) report.overall_mean = total / static_cast<double>(sums.size());
  report.items = std::move(items);
  return report;
}

std::string EvalReport::Csv() const {
  std::string out = "dataset,n_items,em_mean\n";
  std::size_t n = 0;
  for (const auto& d : per_dataset) {
    out += fmt::format("{},{},{:.6f}\n", d.dataset, d.n_items, d.em_mean);
    n += d.n_items;
  }
  out += fmt::format("average,{},{:.6f}\n", n, overall_mean);
  return out;
}

std::string EvalReport::Table() const {
  std::size_t width = 7;
  for (const auto& d : per_dataset) width = std::max(width, d.dataset.size());
  std::string out = fmt::format("{:<{}}  {:>7}  {:>7}\n", "dataset", width, "items", "EM");
  out += std::string(width + 18, '-') + "\n";
  std::size_t n = 0;
  for (const auto& d : per_dataset) {
    out += fmt::format("{:<{}}  {:>7}  {:>7.4f}\n", d.dataset, width, d.n_items, d.em_mean);
    n += d.n_items;
  }
  out += std::string(width + 18, '-') + "\n";
  out += fmt::format("{:<{}}  {:>7}  {:>7.4f}\n", "average", width, n, overall_mean);
  return out;
}

EvalReport Evaluate(std::span<const BenchItem> items, const PolicyBackend& solver,
                    RolloutConfig cfg, const SearchIndex* index, const MatchConfig& match,
                    int parallelism, std::uint64_t seed) {
  if (items.empty()) throw Error(ErrorCode::kInvalidArgument, "no benchmark items");
  cfg.temperature = 0.0;
  Validate(cfg);
  std::vector<ItemResult> results(items.size());
  ParallelFor(items.size(), parallelism, [&](std::size_t i) {
    const BenchItem& item = items[i];
    ItemResult& r = results[i];
    r.qid = item.qid;
    r.dataset = item.dataset;
    try {
      const EpisodeRecord rec =
          RunEpisode(solver, prompts::SolverPrompt(item.question), cfg, index, seed);
      r.prediction = FinalAnswer(rec.trajectory);
      r.em = BestExactMatch(r.prediction, item.gold_answers, match);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kBackendUnavailable &&
          e.code() != ErrorCode::kContractViolation) {
        throw;
      }
      r.failed = true;
      r.error = e.what();
      Log().warn("eval item {} failed: {}", item.qid, e.what());
    }
  });
  return Aggregate(std::move(results), match);
}

}  // namespace evoqa

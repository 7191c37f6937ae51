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

#include "evoqa/advantage.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "evoqa/error.hpp"

namespace evoqa {

std::string_view VarianceModeName(VarianceMode mode) {
  return mode == VarianceMode::kSample ? "sample" : "population";
}

VarianceMode ParseVarianceMode(std::string_view name) {
  if (name == "population") return VarianceMode::kPopulation;
  if (name == "sample") return VarianceMode::kSample;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown variance mode '" + std::string(name) + "'");
}

void Validate(const PgConfig& pg) {
  if (!(pg.epsilon_clip > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "epsilon_clip must be positive");
  }
  if (!(pg.beta >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "beta must be non-negative");
  }
  if (pg.group_size < 1) {
    throw Error(ErrorCode::kInvalidArgument, "group_size must be positive");
  }
}

std::string HopGroupKey(int hop) { return "hop" + std::to_string(hop); }

std::vector<double> Standardize(std::span<const double> rewards, double delta,
                                VarianceMode mode) {
  if (!(delta >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "delta must be non-negative");
  }
  const std::size_t n = rewards.size();
  std::vector<double> out(n, 0.0);
  if (n < 2) return out;
  // Identical rewards carry no signal; skip the rounding in the mean.
  if (std::all_of(rewards.begin(), rewards.end(), [&](double r) { return r == rewards[0]; })) {
    return out;
  }
  double sum = 0.0;
  for (double r : rewards) sum += r;
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (double r : rewards) ss += (r - mean) * (r - mean);
  const double denom_n =
      mode == VarianceMode::kSample ? static_cast<double>(n - 1) : static_cast<double>(n);
  const double scale = std::sqrt(ss / denom_n) + delta;
  if (scale == 0.0) return out;
  for (std::size_t i = 0; i < n; ++i) out[i] = (rewards[i] - mean) / scale;
  return out;
}

AdvantageBatch HrpoAdvantages(std::span<const HopGroup> groups, double delta,
                              VarianceMode mode) {
  AdvantageBatch batch;
  batch.delta = delta;
  batch.variance_mode = mode;
  std::set<int> hops;
  std::set<std::string_view> ids;
  for (const auto& g : groups) {
    if (g.member_ids.empty()) {
      throw Error(ErrorCode::kEmptyGroup,
                  "hop group " + std::to_string(g.hop) + " is empty");
    }
    if (g.member_ids.size() != g.rewards.size()) {
      throw Error(ErrorCode::kLengthMismatch,
                  "hop group " + std::to_string(g.hop) +
                      ": member_ids and rewards differ in length");
    }
    if (!hops.insert(g.hop).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate hop group " + std::to_string(g.hop));
    }
    for (const auto& id : g.member_ids) {
      if (!ids.insert(id).second) {
        throw Error(ErrorCode::kInvalidArgument, "duplicate episode id '" + id + "'");
      }
    }
    const std::vector<double> adv = Standardize(g.rewards, delta, mode);
    const std::string key = HopGroupKey(g.hop);
    for (std::size_t i = 0; i < adv.size(); ++i) {
      batch.entries.push_back({g.member_ids[i], adv[i], key, g.rewards[i]});
    }
  }
  std::sort(batch.entries.begin(), batch.entries.end(),
            [](const AdvantageEntry& a, const AdvantageEntry& b) {
              return a.episode_id < b.episode_id;
            });
  return batch;
}

std::vector<double> GrpoAdvantages(std::span<const double> rewards, double delta,
                                   VarianceMode mode) {
  if (rewards.size() < 2) {
    throw Error(ErrorCode::kDomainError, "GRPO needs at least two rewards");
  }
  return Standardize(rewards, delta, mode);
}

std::vector<double> GlobalBaselineAdvantages(std::span<const double> rewards,
                                             double delta, VarianceMode mode) {
  if (rewards.size() < 2) {
    throw Error(ErrorCode::kDomainError,
                "global baseline needs at least two rewards");
  }
  return Standardize(rewards, delta, mode);
}

double KlPenalty(std::span<const double> logp, std::span<const double> logp_ref,
                 double beta) {
  if (logp.size() != logp_ref.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "logp and logp_ref differ in length");
  }
  if (beta == 0.0 || logp.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < logp.size(); ++i) sum += logp[i] - logp_ref[i];
  return beta * (sum / static_cast<double>(logp.size()));
}

std::int64_t RolloutBudget(RolloutScheme scheme, int m, int n) {
  if (n < 1) {
    throw Error(ErrorCode::kDomainError, "n must be positive");
  }
  if (scheme == RolloutScheme::kHrpo) return 1 + static_cast<std::int64_t>(n);
  if (m < 1) {
    throw Error(ErrorCode::kDomainError, "m must be positive");
  }
  return (static_cast<std::int64_t>(m) + 1) * n;
}

}  // namespace evoqa

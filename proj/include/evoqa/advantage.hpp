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

// Advantage estimators: hop-grouped standardization for the proposer,
// per-question group standardization for the solver, and a whole-batch
// baseline kept for comparison. Also the KL penalty scalar and rollout
// budget accounting.

#ifndef EVOQA_ADVANTAGE_HPP_
#define EVOQA_ADVANTAGE_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace evoqa {

enum class VarianceMode { kPopulation, kSample };

std::string_view VarianceModeName(VarianceMode mode);
VarianceMode ParseVarianceMode(std::string_view name);

inline constexpr double kDefaultDelta = 1e-6;

struct HopGroup {
  int hop = 1;
  std::vector<std::string> member_ids;
  std::vector<double> rewards;  // parallel to member_ids
};

struct AdvantageEntry {
  std::string episode_id;
  double advantage = 0.0;
  std::string group_key;
  double reward = 0.0;
};

struct AdvantageBatch {
  std::vector<AdvantageEntry> entries;  // sorted by episode_id
  double delta = kDefaultDelta;
  VarianceMode variance_mode = VarianceMode::kPopulation;
};

// Policy-gradient metadata relayed to the external trainer. Clipping is
// never applied here.
struct PgConfig {
  double beta = 0.0;
  double epsilon_clip = 0.2;
  int group_size = 5;

  static PgConfig Proposer() { return {0.0, 0.2, 1}; }
  static PgConfig Solver() { return {0.0, 0.2, 5}; }
};

// Throws Error(kInvalidArgument) unless epsilon_clip > 0 and beta >= 0.
void Validate(const PgConfig& pg);

std::string HopGroupKey(int hop);

// (r - mean) / (sqrt(var) + delta) over one set of rewards; a single reward
// yields 0. delta must be >= 0; with delta = 0 a zero-variance set yields 0.
std::vector<double> Standardize(std::span<const double> rewards, double delta,
                                VarianceMode mode);

// Standardizes each hop group on its own. Throws Error(kEmptyGroup) for an
// empty group, Error(kLengthMismatch) when ids and rewards differ in length,
// Error(kInvalidArgument) on duplicate hops, duplicate ids or delta < 0.
AdvantageBatch HrpoAdvantages(std::span<const HopGroup> groups,
                              double delta = kDefaultDelta,
                              VarianceMode mode = VarianceMode::kPopulation);

// Throws Error(kDomainError) when fewer than two rewards are given.
std::vector<double> GrpoAdvantages(std::span<const double> rewards,
                                   double delta = kDefaultDelta,
                                   VarianceMode mode = VarianceMode::kPopulation);

// Standardization over the whole batch, ignoring hop structure.
std::vector<double> GlobalBaselineAdvantages(
    std::span<const double> rewards, double delta = kDefaultDelta,
    VarianceMode mode = VarianceMode::kPopulation);

// beta * mean(logp - logp_ref). Throws Error(kLengthMismatch).
double KlPenalty(std::span<const double> logp,
                 std::span<const double> logp_ref, double beta);

enum class RolloutScheme { kGrpoNested, kHrpo };

// Episodes per training prompt: (m+1)*n for nested GRPO, 1+n for HRPO (one
// proposal plus n solver samples). Throws Error(kDomainError) on
// non-positive inputs.
std::int64_t RolloutBudget(RolloutScheme scheme, int m, int n);

}  // namespace evoqa

#endif  // EVOQA_ADVANTAGE_HPP_

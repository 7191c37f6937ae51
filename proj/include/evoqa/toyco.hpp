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

// Closed-form toy co-evolution: a softmax proposer over 20 (hop, difficulty)
// templates and a logistic solver with one skill per hop, trained with real
// policy-gradient updates through the same reward and advantage code as the
// full pipeline.

#ifndef EVOQA_TOYCO_HPP_
#define EVOQA_TOYCO_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evoqa/evolve.hpp"
#include "evoqa/rng.hpp"

namespace evoqa {

inline constexpr int kToyHops = 4;
inline constexpr int kToyLevels = 5;
inline constexpr int kToyTemplates = kToyHops * kToyLevels;

struct ToyTemplate {
  int hop = 1;
  int difficulty = 1;
};

// Index (hop-1)*5 + (difficulty-1).
ToyTemplate TemplateAt(int index);
int TemplateIndex(int hop, int difficulty);

using ToyLogits = std::array<double, kToyTemplates>;

struct ToyProposer {
  ToyLogits logits{};
  double learning_rate = 2.0;

  ToyLogits Policy() const;
  double ExpectedDifficulty() const;
  double ExpectedHop() const;
};

struct ToySolver {
  std::array<double, kToyHops> skill{};
  double learning_rate = 0.001;
  double a = 1.0;
  double b = 0.8;
  double c = 1.5;

  // logistic(a * skill[hop] - b * difficulty + c)
  double PassProbability(int hop, int difficulty) const;
};

struct ToyEpisode {
  int template_index = 0;
  int k = 0;
  double reward = 0.0;
};

// Template from the proposer, k ~ Binomial(n, pass probability), reward =
// difficulty reward of (k, n). Throws Error(kDomainError) when n < 2.
ToyEpisode SampleToyEpisode(const ToyProposer& proposer, const ToySolver& solver, int n,
                            Rng& rng);
ToyEpisode SampleToyEpisode(const ToyProposer& proposer, const ToySolver& solver, int n,
                            std::uint64_t seed);

enum class ToyEstimator { kHopGrouped, kGlobal };

// Advantages for a batch: standardized within template hop groups, or over
// the whole batch.
std::vector<double> ToyAdvantages(std::span<const ToyEpisode> batch, ToyEstimator estimator,
                                  double delta = kDefaultDelta);

// (1/N) sum_i A_i log softmax(logits)[t_i] with the advantages held fixed.
double ToySurrogate(const ToyLogits& logits, std::span<const int> templates,
                    std::span<const double> advantages);
// Its exact gradient (1/N) sum_i A_i (e_{t_i} - softmax(logits)).
ToyLogits ToySurrogateGradient(const ToyLogits& logits, std::span<const int> templates,
                               std::span<const double> advantages);

struct ToyProposerStepResult {
  double mean_reward = 0.0;
  std::vector<ToyEpisode> batch;
  ToyLogits update{};  // learning_rate * gradient, already applied
};

// Samples batch_size episodes and ascends the surrogate. Throws
// Error(kInvalidArgument) when batch_size < 8.
ToyProposerStepResult ToyProposerStep(ToyProposer& proposer, const ToySolver& solver,
                                      int batch_size, int n, Rng& rng,
                                      ToyEstimator estimator = ToyEstimator::kHopGrouped);

// For each question with 0 < k < n: skill[hop] += learning_rate * d / 5.
// Throws Error(kLengthMismatch) when the lists differ in length.
void ToySolverStep(ToySolver& solver, std::span<const ToyTemplate> questions,
                   std::span<const int> k_values, int n);

struct ToyConfig {
  int iterations = 3;
  int proposer_steps = 50;
  int solver_steps = 50;
  int batch_size = 256;
  int n = 5;
  std::uint64_t seed = 7;
  double proposer_lr = 2.0;
  double solver_lr = 0.001;
  double a = 1.0;
  double b = 0.8;
  double c = 1.5;
  double delta = kDefaultDelta;
  // Phase start/end values average this many boundary steps.
  int boundary_window = 5;
};

// Throws Error(kInvalidArgument) unless counts and rates are positive,
// batch_size >= 8 and n >= 2.
void Validate(const ToyConfig& cfg);

struct ToyStepRecord {
  int step = 0;  // 1-based over the whole run
  Phase phase = Phase::kProposer;
  int iteration = 1;
  double mean_reward = 0.0;  // proposer: difficulty reward; solver: accuracy k/n
  double expected_difficulty = 0.0;
  double expected_hop = 0.0;
  std::array<std::optional<double>, kToyHops> per_hop_reward;
};

struct ToyPhaseSummary {
  int iteration = 1;
  Phase phase = Phase::kProposer;
  double start_reward = 0.0;
  double end_reward = 0.0;
  double start_difficulty = 0.0;
  double end_difficulty = 0.0;
};

struct ToyReport {
  std::vector<ToyStepRecord> steps;
  std::vector<ToyPhaseSummary> phases;
  ToyProposer proposer;
  ToySolver solver;
  std::size_t episodes = 0;

  // step,phase,iteration,mean_reward,E_d,E_h,reward_h1..reward_h4
  std::string Csv() const;
};

// Bit-reproducible from (cfg, seed); single-threaded.
ToyReport RunToyCoevolution(const ToyConfig& cfg);

struct ToyVarianceComparison {
  double hop_grouped = 0.0;  // trace of the update covariance
  double global = 0.0;
};

// Draws `reruns` batches from the same (proposer, solver) state and measures
// the spread of the proposer update under both estimators, which see the
// same batches.
ToyVarianceComparison CompareUpdateVariance(const ToyProposer& proposer,
                                            const ToySolver& solver, int batch_size, int n,
                                            int reruns, std::uint64_t seed);

// P[X >= successes] for X ~ Binomial(trials, 1/2).
double SignTestPValue(int successes, int trials);

}  // namespace evoqa

#endif  // EVOQA_TOYCO_HPP_

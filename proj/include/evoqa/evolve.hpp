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

// The alternating self-evolution scheduler. Each iteration runs a proposer
// phase (hop-grouped advantages) and then a solver phase (per-question
// groups) over QA pairs harvested from the proposer, exporting every step's
// trajectories, rewards and advantages for an external trainer.

#ifndef EVOQA_EVOLVE_HPP_
#define EVOQA_EVOLVE_HPP_

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evoqa/advantage.hpp"
#include "evoqa/policy.hpp"
#include "evoqa/protocol.hpp"
#include "evoqa/rewards.hpp"
#include "evoqa/search.hpp"

namespace evoqa {

enum class Phase { kProposer, kSolver };

std::string_view PhaseName(Phase phase);

using HopCounts = std::array<int, 4>;

struct PhaseConfig {
  Phase phase = Phase::kProposer;
  int steps = 50;
  int batch_size = 256;
  HopCounts hop_ratio = {4, 3, 2, 1};
  int n_solver_samples = 5;
  PgConfig pg = PgConfig::Proposer();
  VarianceMode variance_mode = VarianceMode::kPopulation;

  static PhaseConfig Proposer() { return {}; }
  static PhaseConfig Solver() {
    PhaseConfig c;
    c.phase = Phase::kSolver;
    c.pg = PgConfig::Solver();
    c.variance_mode = VarianceMode::kSample;
    return c;
  }
};

// Throws Error(kInvalidArgument) on non-positive steps, batch size or sample
// count, or a negative ratio entry; Error(kDomainError) on an all-zero ratio.
void Validate(const PhaseConfig& cfg);

// Largest-remainder split of batch_size by ratio; ties go to the lower hop.
// Throws Error(kDomainError) for an all-zero ratio and
// Error(kInvalidArgument) for batch_size < 1 or negative entries.
HopCounts ApportionHops(int batch_size, const HopCounts& ratio);

struct StepMetrics {
  int iteration = 1;
  Phase phase = Phase::kProposer;
  int step = 1;
  double mean_reward = 0.0;
  std::array<std::optional<double>, 4> per_hop_mean_reward;
  double advantage_variance = 0.0;
  std::size_t episodes_issued = 0;
  std::size_t qa_valid = 0;
  std::size_t backend_failures = 0;
};

struct IterationState {
  int iteration = 1;
  Phase phase = Phase::kProposer;
  int step = 0;  // last completed step of `phase`
  std::vector<QAPair> harvested_qa;
  std::vector<StepMetrics> metrics;
};

// Everything a step needs besides its inputs.
struct StepContext {
  const PolicyBackend* proposer = nullptr;
  const PolicyBackend* solver = nullptr;
  const SearchIndex* index = nullptr;
  PhaseConfig phase;
  RolloutConfig proposer_rollout = RolloutConfig::Proposer();
  RolloutConfig solver_rollout = RolloutConfig::Solver();
  MatchConfig match;
  double delta = kDefaultDelta;
  int parallelism = 1;
  std::uint64_t seed = 0;
};

struct ProposerRewardRecord {
  std::string episode_id;
  int hop = 1;
  RewardBreakdown reward;
  bool qa_valid = false;
  bool backend_failed = false;
};

struct SolverRewardRecord {
  std::string episode_id;
  std::string group_key;
  int hop = 0;
  double reward = 0.0;
  bool backend_failed = false;
};

struct ProposerStepResult {
  AdvantageBatch advantages;
  std::vector<EpisodeRecord> episodes;  // each proposal followed by its solver samples
  std::vector<ProposerRewardRecord> rewards;
  std::vector<QAPair> qa;
  StepMetrics metrics;
};

struct SolverStepResult {
  std::vector<std::vector<double>> advantages;  // per question
  AdvantageBatch batch;                         // the same values, flattened
  std::vector<EpisodeRecord> episodes;
  std::vector<SolverRewardRecord> rewards;
  StepMetrics metrics;
};

// One proposer episode per prompt, hops apportioned by ctx.phase.hop_ratio
// over the first batch_size seed documents; each extracted QA pair gets
// n_solver_samples solver episodes. Advantages are grouped by requested hop.
// Episodes that fail on the backend keep a zero reward in their group; the
// step throws only when every proposer episode failed. Appends valid QA
// pairs to state.harvested_qa and the step's metrics to state.metrics.
ProposerStepResult RunProposerStep(const StepContext& ctx, IterationState& state,
                                   std::span<const Document> seed_docs);

// ctx.phase.pg.group_size solver episodes per question with binary
// exact-match rewards, standardized per question. Throws
// Error(kInvalidArgument) for an empty batch or group_size < 2.
SolverStepResult RunSolverStep(const StepContext& ctx, IterationState& state,
                               std::span<const QAPair> qa_batch);

enum class HarvestMode { kRegenerate, kCumulative };

struct ExportedBatch {
  std::string run_id;
  int iteration = 1;
  Phase phase = Phase::kProposer;
  int step = 1;
  std::string directory;
};

struct EvolveConfig {
  std::string run_id = "run";
  std::string output_dir = "runs";
  int iterations = 3;
  PhaseConfig proposer = PhaseConfig::Proposer();
  PhaseConfig solver = PhaseConfig::Solver();
  RolloutConfig proposer_rollout = RolloutConfig::Proposer();
  RolloutConfig solver_rollout = RolloutConfig::Solver();
  MatchConfig match;
  double delta = kDefaultDelta;
  int parallelism = 1;
  std::uint64_t seed = 0;
  HarvestMode harvest = HarvestMode::kRegenerate;
  int harvest_prompts = 0;  // 0 means proposer.batch_size
  // Stop after this many phase-steps in one invocation; 0 runs to the end.
  int stop_after_steps = 0;
  // POSTed {run_id, iteration, phase, step, directory} after each export.
  std::string callback_url;
};

void Validate(const EvolveConfig& cfg);

struct RunReport {
  std::string run_id;
  std::string status;  // "completed", "interrupted" or "empty_curriculum"
  int iterations = 0;
  int phase_steps_completed = 0;
  std::optional<ExportedBatch> last_completed;
  std::size_t episodes_issued = 0;
  std::vector<std::size_t> harvest_sizes;  // per iteration reached
  std::string directory;
};

using TrainerHook = std::function<void(const ExportedBatch&)>;

// Runs or resumes runs/<run_id>. Writes config.json, state.json, report.json
// and iter<k>/<phase>/step<j>/{trajectories,rewards,advantages,qa}.ndjson
// plus metrics.json per step and metrics.csv per phase. An existing
// state.json resumes after its last completed step. A solver phase with no
// harvested QA ends the run with status "empty_curriculum".
RunReport RunSelfEvolution(const EvolveConfig& cfg, const PolicyBackend& proposer,
                           const PolicyBackend& solver, const SearchIndex& index,
                           const TrainerHook& hook = {});

}  // namespace evoqa

#endif  // EVOQA_EVOLVE_HPP_

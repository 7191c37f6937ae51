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

#include "evoqa/toyco.hpp"

#include <cmath>

#include <fmt/format.h>

#include "evoqa/advantage.hpp"
#include "evoqa/error.hpp"
#include "evoqa/rewards.hpp"

namespace evoqa {
namespace {

void CheckTemplates(std::span<const int> templates, std::span<const double> advantages) {
  if (templates.size() != advantages.size()) {
    throw Error(ErrorCode::kLengthMismatch, "templates and advantages differ in length");
  }
  if (templates.empty()) throw Error(ErrorCode::kInvalidArgument, "empty batch");
  for (int t : templates) {
    if (t < 0 || t >= kToyTemplates) {
      throw Error(ErrorCode::kInvalidArgument, "template index out of range");
    }
  }
}

ToyLogits Softmax(const ToyLogits& logits) {
  double mx = logits[0];
  for (double l : logits) mx = std::max(mx, l);
  ToyLogits p{};
  double z = 0.0;
  for (int i = 0; i < kToyTemplates; ++i) z += p[i] = std::exp(logits[i] - mx);
  for (double& x : p) x /= z;
  return p;
}

std::string Cell(std::optional<double> v) {
  return v ? fmt::format("{:.10g}", *v) : std::string();
}

}  // namespace

ToyTemplate TemplateAt(int index) {
  if (index < 0 || index >= kToyTemplates) {
    throw Error(ErrorCode::kInvalidArgument, "template index out of range");
  }
  return {index / kToyLevels + 1, index % kToyLevels + 1};
}

int TemplateIndex(int hop, int difficulty) {
  if (hop < 1 || hop > kToyHops || difficulty < 1 || difficulty > kToyLevels) {
    throw Error(ErrorCode::kInvalidArgument, "template outside the 4x5 grid");
  }
  return (hop - 1) * kToyLevels + (difficulty - 1);
}

ToyLogits ToyProposer::Policy() const { return Softmax(logits); }

double ToyProposer::ExpectedDifficulty() const {
  const ToyLogits p = Policy();
  double e = 0.0;
  for (int i = 0; i < kToyTemplates; ++i) e += p[i] * TemplateAt(i).difficulty;
  return e;
}

double ToyProposer::ExpectedHop() const {
  const ToyLogits p = Policy();
  double e = 0.0;
  for (int i = 0; i < kToyTemplates; ++i) e += p[i] * TemplateAt(i).hop;
  return e;
}

double ToySolver::PassProbability(int hop, int difficulty) const {
  const double z = a * skill.at(static_cast<std::size_t>(hop - 1)) - b * difficulty + c;
  return 1.0 / (1.0 + std::exp(-z));
}

ToyEpisode SampleToyEpisode(const ToyProposer& proposer, const ToySolver& solver, int n,
                            Rng& rng) {
  if (n < 2) throw Error(ErrorCode::kDomainError, "toy episodes need n >= 2");
  const ToyLogits p = proposer.Policy();
  ToyEpisode ep;
  ep.template_index = static_cast<int>(rng.Categorical(p));
  const ToyTemplate t = TemplateAt(ep.template_index);
  ep.k = rng.Binomial(n, solver.PassProbability(t.hop, t.difficulty));
  ep.reward = DifficultyReward(ep.k, n);
  return ep;
}

ToyEpisode SampleToyEpisode(const ToyProposer& proposer, const ToySolver& solver, int n,
                            std::uint64_t seed) {
  Rng rng(seed);
  return SampleToyEpisode(proposer, solver, n, rng);
}

std::vector<double> ToyAdvantages(std::span<const ToyEpisode> batch, ToyEstimator estimator,
                                  double delta) {
  std::vector<double> rewards;
  for (const auto& e : batch) rewards.push_back(e.reward);
  if (estimator == ToyEstimator::kGlobal) return GlobalBaselineAdvantages(rewards, delta);

  std::vector<HopGroup> groups;
  for (int h = 1; h <= kToyHops; ++h) {
    HopGroup g;
    g.hop = h;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      if (TemplateAt(batch[i].template_index).hop != h) continue;
      g.member_ids.push_back(fmt::format("e{:06}", i));
      g.rewards.push_back(batch[i].reward);
    }
    if (!g.member_ids.empty()) groups.push_back(std::move(g));
  }
  const AdvantageBatch adv = HrpoAdvantages(groups, delta);
  std::vector<double> out;
  out.reserve(batch.size());
  for (const auto& e : adv.entries) out.push_back(e.advantage);
  return out;
}

double ToySurrogate(const ToyLogits& logits, std::span<const int> templates,
                    std::span<const double> advantages) {
  CheckTemplates(templates, advantages);
  double mx = logits[0];
  for (double l : logits) mx = std::max(mx, l);
  double z = 0.0;
  for (double l : logits) z += std::exp(l - mx);
  const double log_z = mx + std::log(z);
  double sum = 0.0;
  for (std::size_t i = 0; i < templates.size(); ++i) {
    sum += advantages[i] * (logits[templates[i]] - log_z);
  }
  return sum / static_cast<double>(templates.size());
}

ToyLogits ToySurrogateGradient(const ToyLogits& logits, std::span<const int> templates,
                               std::span<const double> advantages) {
  CheckTemplates(templates, advantages);
  const ToyLogits p = Softmax(logits);
  ToyLogits g{};
  double total = 0.0;
  for (std::size_t i = 0; i < templates.size(); ++i) {
    g[templates[i]] += advantages[i];
    total += advantages[i];
  }
  const double inv_n = 1.0 / static_cast<double>(templates.size());
  for (int j = 0; j < kToyTemplates; ++j) g[j] = (g[j] - total * p[j]) * inv_n;
  return g;
}

ToyProposerStepResult ToyProposerStep(ToyProposer& proposer, const ToySolver& solver,
                                      int batch_size, int n, Rng& rng,
                                      ToyEstimator estimator) {
  if (batch_size < 8) throw Error(ErrorCode::kInvalidArgument, "toy batch_size must be >= 8");
  ToyProposerStepResult out;
  double total = 0.0;
  for (int i = 0; i < batch_size; ++i) {
    out.batch.push_back(SampleToyEpisode(proposer, solver, n, rng));
    total += out.batch.back().reward;
  }
  out.mean_reward = total / batch_size;
  const std::vector<double> adv = ToyAdvantages(out.batch, estimator);
  std::vector<int> templates;
  for (const auto& e : out.batch) templates.push_back(e.template_index);
  const ToyLogits grad = ToySurrogateGradient(proposer.logits, templates, adv);
  for (int j = 0; j < kToyTemplates; ++j) {
    out.update[j] = proposer.learning_rate * grad[j];
    proposer.logits[j] += out.update[j];
  }
  return out;
}

void ToySolverStep(ToySolver& solver, std::span<const ToyTemplate> questions,
                   std::span<const int> k_values, int n) {
  if (questions.size() != k_values.size()) {
    throw Error(ErrorCode::kLengthMismatch, "questions and k_values differ in length");
  }
  for (std::size_t i = 0; i < questions.size(); ++i) {
    const int k = k_values[i];
    if (k <= 0 || k >= n) continue;
    const ToyTemplate& t = questions[i];
    TemplateIndex(t.hop, t.difficulty);
    solver.skill[t.hop - 1] +=
        solver.learning_rate * t.difficulty / static_cast<double>(kToyLevels);
  }
}

void Validate(const ToyConfig& cfg) {
  if (cfg.iterations < 1 || cfg.proposer_steps < 1 || cfg.solver_steps < 1) {
    throw Error(ErrorCode::kInvalidArgument, "iterations and step counts must be >= 1");
  }
  if (cfg.batch_size < 8) throw Error(ErrorCode::kInvalidArgument, "batch_size must be >= 8");
  if (cfg.n < 2) throw Error(ErrorCode::kInvalidArgument, "n must be >= 2");
  if (!(cfg.proposer_lr > 0) || !(cfg.solver_lr > 0)) {
    throw Error(ErrorCode::kInvalidArgument, "learning rates must be positive");
  }
  if (cfg.boundary_window < 1) {
    throw Error(ErrorCode::kInvalidArgument, "boundary_window must be >= 1");
  }
  if (!(cfg.delta >= 0)) throw Error(ErrorCode::kInvalidArgument, "delta must be >= 0");
}

std::string ToyReport::Csv() const {
  std::string out =
      "step,phase,iteration,mean_reward,E_d,E_h,reward_h1,reward_h2,reward_h3,reward_h4\n";
  for (const auto& s : steps) {
    out += fmt::format("{},{},{},{:.10g},{:.10g},{:.10g},{},{},{},{}\n", s.step,
                       PhaseName(s.phase), s.iteration, s.mean_reward,
                       s.expected_difficulty, s.expected_hop, Cell(s.per_hop_reward[0]),
                       Cell(s.per_hop_reward[1]), Cell(s.per_hop_reward[2]),
                       Cell(s.per_hop_reward[3]));
  }
  return out;
}

ToyReport RunToyCoevolution(const ToyConfig& cfg) {
  Validate(cfg);
  ToyReport report;
  report.proposer.learning_rate = cfg.proposer_lr;
  report.solver = {{}, cfg.solver_lr, cfg.a, cfg.b, cfg.c};
  ToyProposer& proposer = report.proposer;
  ToySolver& solver = report.solver;
  Rng rng(cfg.seed);
  int step = 0;

  const auto record = [&](Phase phase, int it, std::span<const ToyEpisode> batch,
                          double mean, double e_d, double e_h) {
    ToyStepRecord r;
    r.step = ++step;
    r.phase = phase;
    r.iteration = it;
    r.mean_reward = mean;
    r.expected_difficulty = e_d;
    r.expected_hop = e_h;
    std::array<double, kToyHops> sum{};
    std::array<int, kToyHops> count{};
    for (const auto& e : batch) {
      const int h = TemplateAt(e.template_index).hop - 1;
      sum[h] += phase == Phase::kProposer ? e.reward : double(e.k) / cfg.n;
      ++count[h];
    }
    for (int h = 0; h < kToyHops; ++h) {
      if (count[h] > 0) r.per_hop_reward[h] = sum[h] / count[h];
    }
    report.steps.push_back(r);
    report.episodes += batch.size();
  };

  const auto summarize = [&](Phase phase, int it, std::size_t first) {
    const std::size_t last = report.steps.size();
    const std::size_t w =
        std::min<std::size_t>(static_cast<std::size_t>(cfg.boundary_window), last - first);
    ToyPhaseSummary s;
    s.iteration = it;
    s.phase = phase;
    for (std::size_t i = 0; i < w; ++i) {
      s.start_reward += report.steps[first + i].mean_reward / w;
      s.start_difficulty += report.steps[first + i].expected_difficulty / w;
      s.end_reward += report.steps[last - w + i].mean_reward / w;
      s.end_difficulty += report.steps[last - w + i].expected_difficulty / w;
    }
    report.phases.push_back(s);
  };

  for (int it = 1; it <= cfg.iterations; ++it) {
    std::size_t first = report.steps.size();
    for (int s = 0; s < cfg.proposer_steps; ++s) {
      const double e_d = proposer.ExpectedDifficulty();
      const double e_h = proposer.ExpectedHop();
      const ToyProposerStepResult r =
          ToyProposerStep(proposer, solver, cfg.batch_size, cfg.n, rng);
      record(Phase::kProposer, it, r.batch, r.mean_reward, e_d, e_h);
    }
    summarize(Phase::kProposer, it, first);

    first = report.steps.size();
    for (int s = 0; s < cfg.solver_steps; ++s) {
      const double e_d = proposer.ExpectedDifficulty();
      const double e_h = proposer.ExpectedHop();
      std::vector<ToyEpisode> batch;
      std::vector<ToyTemplate> questions;
      std::vector<int> ks;
      double correct = 0.0;
      for (int i = 0; i < cfg.batch_size; ++i) {
        batch.push_back(SampleToyEpisode(proposer, solver, cfg.n, rng));
        questions.push_back(TemplateAt(batch.back().template_index));
        ks.push_back(batch.back().k);
        correct += batch.back().k;
      }
      ToySolverStep(solver, questions, ks, cfg.n);
      record(Phase::kSolver, it, batch, correct / (double(cfg.batch_size) * cfg.n), e_d, e_h);
    }
    summarize(Phase::kSolver, it, first);
  }
  return report;
}

ToyVarianceComparison CompareUpdateVariance(const ToyProposer& proposer,
                                            const ToySolver& solver, int batch_size, int n,
                                            int reruns, std::uint64_t seed) {
  if (reruns < 2) throw Error(ErrorCode::kInvalidArgument, "need at least two reruns");
  std::array<std::vector<ToyLogits>, 2> updates;
  for (int r = 0; r < reruns; ++r) {
    Rng rng(MixSeed({seed, std::uint64_t(r)}));
    std::vector<ToyEpisode> batch;
    for (int i = 0; i < batch_size; ++i) batch.push_back(SampleToyEpisode(proposer, solver, n, rng));
    std::vector<int> templates;
    for (const auto& e : batch) templates.push_back(e.template_index);
    const ToyEstimator kinds[2] = {ToyEstimator::kHopGrouped, ToyEstimator::kGlobal};
    for (int k = 0; k < 2; ++k) {
      updates[k].push_back(
          ToySurrogateGradient(proposer.logits, templates, ToyAdvantages(batch, kinds[k])));
    }
  }
  const auto trace = [&](const std::vector<ToyLogits>& u) {
    double tr = 0.0;
    for (int j = 0; j < kToyTemplates; ++j) {
      double mean = 0.0;
      for (const auto& x : u) mean += x[j];
      mean /= static_cast<double>(u.size());
      double ss = 0.0;
      for (const auto& x : u) ss += (x[j] - mean) * (x[j] - mean);
      tr += ss / static_cast<double>(u.size() - 1);
    }
    return tr * proposer.learning_rate * proposer.learning_rate;
  };
  return {trace(updates[0]), trace(updates[1])};
}

double SignTestPValue(int successes, int trials) {
  if (trials < 0 || successes < 0 || successes > trials) {
    throw Error(ErrorCode::kInvalidArgument, "successes outside 0..trials");
  }
  double p = 0.0;
  for (int x = successes; x <= trials; ++x) {
    p += std::exp(std::lgamma(trials + 1.0) - std::lgamma(x + 1.0) -
                  std::lgamma(trials - x + 1.0) - trials * std::log(2.0));
  }
  return std::min(p, 1.0);
}

}  // namespace evoqa

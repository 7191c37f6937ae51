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

#include "evoqa/evolve.hpp"

#include <filesystem>
#include <mutex>
#include <numeric>

#include <fmt/format.h>

#include "evoqa/error.hpp"
#include "evoqa/prompts.hpp"
#include "evoqa/rng.hpp"
#include "http_client.hpp"
#include "log_internal.hpp"
#include "parallel.hpp"
#include "wire.hpp"

namespace evoqa {
namespace {

namespace fs = std::filesystem;
using wire::json;

enum : std::uint64_t { kSeedProposer = 1, kSeedSolver = 2, kSeedHarvest = 3 };

bool IsBackendFailure(const Error& e) {
  return e.code() == ErrorCode::kBackendUnavailable ||
         e.code() == ErrorCode::kContractViolation;
}

// Position `p` of an endless sequence of seeded permutations of [0, n).
class Shuffler {
 public:
  Shuffler(std::size_t n, std::uint64_t seed) : n_(n), seed_(seed) {}

  std::size_t At(std::size_t p) {
    const std::size_t epoch = p / n_;
    if (epoch != epoch_ || perm_.empty()) {
      perm_.resize(n_);
      std::iota(perm_.begin(), perm_.end(), std::size_t{0});
      Rng rng(MixSeed({seed_, epoch}));
      for (std::size_t i = n_; i > 1; --i) std::swap(perm_[i - 1], perm_[rng.Below(i)]);
      epoch_ = epoch;
    }
    return perm_[p % n_];
  }

 private:
  std::size_t n_;
  std::uint64_t seed_;
  std::size_t epoch_ = 0;
  std::vector<std::size_t> perm_;
};

std::vector<int> HopsFor(int batch_size, const HopCounts& ratio) {
  const HopCounts counts = ApportionHops(batch_size, ratio);
  std::vector<int> hops;
  for (int h = 0; h < 4; ++h) hops.insert(hops.end(), counts[h], h + 1);
  return hops;
}

double PopulationVariance(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(xs.size());
}

void FillMeans(StepMetrics& m, const std::vector<int>& hops, const std::vector<double>& rewards) {
  std::array<double, 4> sum{};
  std::array<int, 4> count{};
  double total = 0.0;
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    total += rewards[i];
    if (hops[i] >= 1 && hops[i] <= 4) {
      sum[hops[i] - 1] += rewards[i];
      ++count[hops[i] - 1];
    }
  }
  m.mean_reward = rewards.empty() ? 0.0 : total / static_cast<double>(rewards.size());
  for (int h = 0; h < 4; ++h) {
    if (count[h] > 0) m.per_hop_mean_reward[h] = sum[h] / count[h];
  }
}

void RequireAgents(const StepContext& ctx, bool need_proposer) {
  if ((need_proposer && ctx.proposer == nullptr) || ctx.solver == nullptr ||
      ctx.index == nullptr) {
    throw Error(ErrorCode::kInvalidArgument, "step context is missing a backend or index");
  }
}

EpisodeRecord FailedEpisode(std::string id) {
  EpisodeRecord rec;
  rec.episode_id = std::move(id);
  rec.meta.stop_reason = "backend_error";
  return rec;
}

}  // namespace

std::string_view PhaseName(Phase phase) {
  return phase == Phase::kSolver ? "solver" : "proposer";
}

HopCounts ApportionHops(int batch_size, const HopCounts& ratio) {
  if (batch_size < 1) throw Error(ErrorCode::kInvalidArgument, "batch_size must be >= 1");
  std::int64_t total = 0;
  for (int r : ratio) {
    if (r < 0) throw Error(ErrorCode::kInvalidArgument, "hop ratio entries must be >= 0");
    total += r;
  }
  if (total == 0) throw Error(ErrorCode::kDomainError, "hop ratio is all zero");
  HopCounts counts{};
  std::array<std::int64_t, 4> rem{};
  int assigned = 0;
  for (int h = 0; h < 4; ++h) {
    const std::int64_t scaled = std::int64_t{batch_size} * ratio[h];
    counts[h] = static_cast<int>(scaled / total);
    rem[h] = scaled % total;
    assigned += counts[h];
  }
  std::array<int, 4> order = {0, 1, 2, 3};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return rem[a] > rem[b]; });
  for (int i = 0; assigned < batch_size; ++i, ++assigned) ++counts[order[i]];
  return counts;
}

void Validate(const PhaseConfig& cfg) {
  if (cfg.steps < 1 || cfg.batch_size < 1) {
    throw Error(ErrorCode::kInvalidArgument, "steps and batch_size must be >= 1");
  }
  if (cfg.n_solver_samples < 2) {
    throw Error(ErrorCode::kInvalidArgument, "n_solver_samples must be >= 2");
  }
  ApportionHops(1, cfg.hop_ratio);
  Validate(cfg.pg);
  if (cfg.phase == Phase::kSolver && cfg.pg.group_size < 2) {
    throw Error(ErrorCode::kInvalidArgument, "solver group_size must be >= 2");
  }
}

ProposerStepResult RunProposerStep(const StepContext& ctx, IterationState& state,
                                   std::span<const Document> seed_docs) {
  Validate(ctx.phase);
  RequireAgents(ctx, true);
  const int batch = ctx.phase.batch_size;
  const int n = ctx.phase.n_solver_samples;
  if (seed_docs.size() < static_cast<std::size_t>(batch)) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("{} seed documents for a batch of {}", seed_docs.size(), batch));
  }
  const std::vector<int> hops = HopsFor(batch, ctx.phase.hop_ratio);
  const int step = state.step + 1;
  const int it = state.iteration;

  struct Slot {
    std::vector<EpisodeRecord> episodes;
    ProposerRewardRecord reward;
    std::optional<QAPair> qa;
    std::size_t failures = 0;
  };
  std::vector<Slot> slots(static_cast<std::size_t>(batch));

  ParallelFor(slots.size(), ctx.parallelism, [&](std::size_t i) {
    Slot& slot = slots[i];
    const int hop = hops[i];
    const Document& doc = seed_docs[i];
    const std::string id = fmt::format("it{}-proposer-s{:03}-p{:04}", it, step, i);
    const std::uint64_t seed = MixSeed({ctx.seed, std::uint64_t(it), kSeedProposer,
                                        std::uint64_t(step), i});
    EpisodeRecord rec;
    bool failed = false;
    try {
      rec = RunEpisode(*ctx.proposer, prompts::ProposerPrompt(hop, doc), ctx.proposer_rollout,
                       ctx.index, seed);
    } catch (const Error& e) {
      if (!IsBackendFailure(e)) throw;
      Log().warn("{}: proposer backend failed: {}", id, e.what());
      rec = FailedEpisode(id);
      failed = true;
    }
    rec.episode_id = id;
    rec.meta.hop = hop;
    rec.meta.phase = "proposer";
    rec.meta.iteration = it;
    rec.meta.source_doc_id = doc.doc_id;

    FormatReport report;
    std::vector<std::string> predictions(static_cast<std::size_t>(n));
    if (!failed) {
      report = ValidateFormat(rec.trajectory, hop);
      slot.qa = ExtractQa(rec.trajectory, hop, doc.doc_id);
    }
    slot.episodes.push_back(std::move(rec));
    if (slot.qa) {
      try {
        SolverSamples s = SampleSolverEpisodes(*ctx.solver, slot.qa->question, n,
                                               ctx.solver_rollout, ctx.index,
                                               MixSeed({seed, kSeedSolver}), true);
        predictions = std::move(s.answers);
        for (std::size_t a = 0; a < s.episodes.size(); ++a) {
          EpisodeRecord& sample = s.episodes[a];
          sample.episode_id = fmt::format("{}-a{}", id, a);
          sample.meta.hop = hop;
          sample.meta.phase = "proposer";
          sample.meta.iteration = it;
          sample.meta.source_doc_id = doc.doc_id;
          slot.failures += s.failed[a];
          slot.episodes.push_back(std::move(sample));
        }
      } catch (const Error& e) {
        if (!IsBackendFailure(e)) throw;
        Log().warn("{}: every solver sample failed: {}", id, e.what());
        for (int a = 0; a < n; ++a) slot.episodes.push_back(FailedEpisode(fmt::format("{}-a{}", id, a)));
        slot.failures += static_cast<std::size_t>(n);
      }
    }
    slot.failures += failed;
    slot.reward.episode_id = id;
    slot.reward.hop = hop;
    slot.reward.qa_valid = slot.qa.has_value();
    slot.reward.backend_failed = failed;
    slot.reward.reward = failed ? RewardBreakdown{0, {}, 0, 0, 0, n}
                                : ProposerReward(slot.qa, predictions, report, ctx.match);
  });

  const bool all_failed = std::all_of(slots.begin(), slots.end(),
                                      [](const Slot& s) { return s.reward.backend_failed; });
  if (all_failed) {
    throw Error(ErrorCode::kBackendUnavailable,
                fmt::format("every proposer episode of step {} failed", step));
  }

  ProposerStepResult out;
  std::vector<HopGroup> groups;
  std::vector<double> totals;
  for (int h = 1; h <= 4; ++h) {
    HopGroup g;
    g.hop = h;
    for (std::size_t i = 0; i < slots.size(); ++i) {
      if (hops[i] != h) continue;
      g.member_ids.push_back(slots[i].reward.episode_id);
      g.rewards.push_back(slots[i].reward.reward.total);
    }
    if (!g.member_ids.empty()) groups.push_back(std::move(g));
  }
  out.advantages = HrpoAdvantages(groups, ctx.delta, ctx.phase.variance_mode);

  StepMetrics& m = out.metrics;
  m.iteration = it;
  m.phase = Phase::kProposer;
  m.step = step;
  for (auto& slot : slots) {
    totals.push_back(slot.reward.reward.total);
    m.episodes_issued += slot.episodes.size();
    m.backend_failures += slot.failures;
    if (slot.qa) {
      ++m.qa_valid;
      out.qa.push_back(*slot.qa);
    }
    for (auto& e : slot.episodes) out.episodes.push_back(std::move(e));
    out.rewards.push_back(slot.reward);
  }
  FillMeans(m, hops, totals);
  std::vector<double> adv;
  for (const auto& e : out.advantages.entries) adv.push_back(e.advantage);
  m.advantage_variance = PopulationVariance(adv);

  state.phase = Phase::kProposer;
  state.step = step;
  state.harvested_qa.insert(state.harvested_qa.end(), out.qa.begin(), out.qa.end());
  state.metrics.push_back(m);
  return out;
}

SolverStepResult RunSolverStep(const StepContext& ctx, IterationState& state,
                               std::span<const QAPair> qa_batch) {
  RequireAgents(ctx, false);
  Validate(ctx.phase.pg);
  const int group = ctx.phase.pg.group_size;
  if (group < 2) throw Error(ErrorCode::kInvalidArgument, "solver group_size must be >= 2");
  if (qa_batch.empty()) throw Error(ErrorCode::kInvalidArgument, "empty QA batch");
  const int step = (state.phase == Phase::kSolver ? state.step : 0) + 1;
  const int it = state.iteration;

  struct Slot {
    std::vector<EpisodeRecord> episodes;
    std::vector<double> rewards;
    std::vector<bool> failed;
    bool all_failed = false;
  };
  std::vector<Slot> slots(qa_batch.size());
  ParallelFor(slots.size(), ctx.parallelism, [&](std::size_t j) {
    Slot& slot = slots[j];
    const QAPair& qa = qa_batch[j];
    const std::string prefix = fmt::format("it{}-solver-s{:03}-q{:04}", it, step, j);
    const std::uint64_t seed = MixSeed({ctx.seed, std::uint64_t(it), kSeedSolver,
                                        std::uint64_t(step), j});
    try {
      SolverSamples s = SampleSolverEpisodes(*ctx.solver, qa.question, group,
                                             ctx.solver_rollout, ctx.index, seed, true);
      for (std::size_t a = 0; a < s.episodes.size(); ++a) {
        slot.rewards.push_back(s.failed[a] ? 0.0
                                           : SolverReward(s.answers[a], qa.answer, ctx.match));
        slot.failed.push_back(s.failed[a]);
        slot.episodes.push_back(std::move(s.episodes[a]));
      }
    } catch (const Error& e) {
      if (!IsBackendFailure(e)) throw;
      Log().warn("{}: every solver sample failed: {}", prefix, e.what());
      slot.all_failed = true;
      for (int a = 0; a < group; ++a) {
        slot.episodes.push_back(FailedEpisode({}));
        slot.rewards.push_back(0.0);
        slot.failed.push_back(true);
      }
    }
    for (std::size_t a = 0; a < slot.episodes.size(); ++a) {
      EpisodeRecord& rec = slot.episodes[a];
      rec.episode_id = fmt::format("{}-a{}", prefix, a);
      rec.meta.hop = qa.hop;
      rec.meta.phase = "solver";
      rec.meta.iteration = it;
      rec.meta.source_doc_id = qa.source_doc_id;
    }
  });
  if (std::all_of(slots.begin(), slots.end(), [](const Slot& s) { return s.all_failed; })) {
    throw Error(ErrorCode::kBackendUnavailable,
                fmt::format("every solver episode of step {} failed", step));
  }

  SolverStepResult out;
  out.batch.delta = ctx.delta;
  out.batch.variance_mode = ctx.phase.variance_mode;
  StepMetrics& m = out.metrics;
  m.iteration = it;
  m.phase = Phase::kSolver;
  m.step = step;
  std::vector<int> hops;
  std::vector<double> rewards, all_adv;
  for (std::size_t j = 0; j < slots.size(); ++j) {
    Slot& slot = slots[j];
    const std::string key = fmt::format("s{:03}-q{:04}", step, j);
    std::vector<double> adv = GrpoAdvantages(slot.rewards, ctx.delta, ctx.phase.variance_mode);
    double correct = 0.0;
    for (std::size_t a = 0; a < slot.episodes.size(); ++a) {
      const std::string& id = slot.episodes[a].episode_id;
      out.batch.entries.push_back({id, adv[a], key, slot.rewards[a]});
      out.rewards.push_back({id, key, qa_batch[j].hop, slot.rewards[a], bool(slot.failed[a])});
      m.backend_failures += slot.failed[a];
      correct += slot.rewards[a];
      all_adv.push_back(adv[a]);
    }
    hops.push_back(qa_batch[j].hop);
    rewards.push_back(correct / static_cast<double>(slot.rewards.size()));
    m.episodes_issued += slot.episodes.size();
    out.advantages.push_back(std::move(adv));
    for (auto& e : slot.episodes) out.episodes.push_back(std::move(e));
  }
  FillMeans(m, hops, rewards);
  m.advantage_variance = PopulationVariance(all_adv);
  m.qa_valid = qa_batch.size();

  state.phase = Phase::kSolver;
  state.step = step;
  state.metrics.push_back(m);
  return out;
}

void Validate(const EvolveConfig& cfg) {
  if (cfg.run_id.empty() || cfg.run_id.find('/') != std::string::npos ||
      cfg.run_id == "." || cfg.run_id == "..") {
    throw Error(ErrorCode::kInvalidArgument, "run_id must be a plain non-empty name");
  }
  if (cfg.iterations < 1) throw Error(ErrorCode::kInvalidArgument, "iterations must be >= 1");
  if (cfg.proposer.phase != Phase::kProposer || cfg.solver.phase != Phase::kSolver) {
    throw Error(ErrorCode::kInvalidArgument, "phase configs are swapped");
  }
  Validate(cfg.proposer);
  Validate(cfg.solver);
  Validate(cfg.proposer_rollout);
  Validate(cfg.solver_rollout);
  if (cfg.delta < 0) throw Error(ErrorCode::kInvalidArgument, "delta must be >= 0");
  if (cfg.parallelism < 1) throw Error(ErrorCode::kInvalidArgument, "parallelism must be >= 1");
  if (cfg.harvest_prompts < 0 || cfg.stop_after_steps < 0) {
    throw Error(ErrorCode::kInvalidArgument, "harvest_prompts and stop_after_steps must be >= 0");
  }
}

namespace {

json MetricsJson(const StepMetrics& m) {
  json hops = json::array();
  for (const auto& h : m.per_hop_mean_reward) hops.push_back(h ? json(*h) : json(nullptr));
  return {{"iteration", m.iteration},
          {"phase", PhaseName(m.phase)},
          {"step", m.step},
          {"mean_reward", m.mean_reward},
          {"per_hop_mean_reward", std::move(hops)},
          {"advantage_variance", m.advantage_variance},
          {"episodes_issued", m.episodes_issued},
          {"qa_valid", m.qa_valid},
          {"backend_failures", m.backend_failures}};
}

std::string CsvNumber(const json& v) { return v.is_null() ? std::string() : v.dump(); }

template <typename T, typename F>
std::string Ndjson(const std::vector<T>& items, F&& to_json) {
  std::string out;
  for (const auto& item : items) out += to_json(item).dump() + "\n";
  return out;
}

json ProposerRewardJson(const ProposerRewardRecord& r) {
  json j = wire::ToJson(r.reward);
  j["episode_id"] = r.episode_id;
  j["hop"] = r.hop;
  j["group_key"] = HopGroupKey(r.hop);
  j["qa_valid"] = r.qa_valid;
  j["backend_failed"] = r.backend_failed;
  return j;
}

json SolverRewardJson(const SolverRewardRecord& r) {
  return {{"episode_id", r.episode_id},
          {"group_key", r.group_key},
          {"hop", r.hop},
          {"reward", r.reward},
          {"backend_failed", r.backend_failed}};
}

class Run {
 public:
  Run(const EvolveConfig& cfg, const PolicyBackend& proposer, const PolicyBackend& solver,
      const SearchIndex& index, const TrainerHook& hook)
      : cfg_(cfg), proposer_(proposer), solver_(solver), index_(index), hook_(hook),
        dir_(fs::path(cfg.output_dir) / cfg.run_id) {}

  RunReport Execute();

 private:
  int StepsPerIteration() const { return cfg_.proposer.steps + cfg_.solver.steps; }
  fs::path PhaseDir(int it, Phase phase) const {
    return dir_ / fmt::format("iter{}", it) / std::string(PhaseName(phase));
  }
  StepContext Context(const PhaseConfig& phase) const;
  std::vector<Document> SeedDocs(int it, std::uint64_t stream, int first, int count) const;
  void ProposerStep(IterationState& state);
  void SolverStep(IterationState& state, const std::vector<QAPair>& harvest);
  std::vector<QAPair> Harvest(int it);
  std::vector<QAPair> LoadHarvest(int it) const;
  void WriteMetricsCsv(int it, Phase phase, int upto) const;
  void Exported(int it, Phase phase, int step);
  void SaveState(const std::string& status) const;
  RunReport Report(const std::string& status) const;

  const EvolveConfig& cfg_;
  const PolicyBackend& proposer_;
  const PolicyBackend& solver_;
  const SearchIndex& index_;
  const TrainerHook& hook_;
  fs::path dir_;

  int completed_ = 0;
  std::size_t episodes_ = 0;
  std::vector<std::size_t> harvest_sizes_;
};

StepContext Run::Context(const PhaseConfig& phase) const {
  StepContext ctx;
  ctx.proposer = &proposer_;
  ctx.solver = &solver_;
  ctx.index = &index_;
  ctx.phase = phase;
  ctx.proposer_rollout = cfg_.proposer_rollout;
  ctx.solver_rollout = cfg_.solver_rollout;
  ctx.match = cfg_.match;
  ctx.delta = cfg_.delta;
  ctx.parallelism = cfg_.parallelism;
  ctx.seed = cfg_.seed;
  return ctx;
}

std::vector<Document> Run::SeedDocs(int it, std::uint64_t stream, int first, int count) const {
  const auto& docs = index_.corpus().documents();
  if (docs.empty()) throw Error(ErrorCode::kInvalidArgument, "corpus is empty");
  Shuffler shuffler(docs.size(), MixSeed({cfg_.seed, std::uint64_t(it), stream}));
  std::vector<Document> out;
  for (int i = 0; i < count; ++i) out.push_back(docs[shuffler.At(std::size_t(first + i))]);
  return out;
}

void Run::ProposerStep(IterationState& state) {
  const int step = state.step + 1;
  const auto docs = SeedDocs(state.iteration, kSeedProposer,
                             (step - 1) * cfg_.proposer.batch_size, cfg_.proposer.batch_size);
  ProposerStepResult r = RunProposerStep(Context(cfg_.proposer), state, docs);
  const fs::path d = PhaseDir(state.iteration, Phase::kProposer) / fmt::format("step{}", step);
  wire::WriteFileAtomic(d / "trajectories.ndjson",
                        Ndjson(r.episodes, [](const EpisodeRecord& e) { return wire::ToJson(e); }));
  wire::WriteFileAtomic(d / "rewards.ndjson", Ndjson(r.rewards, ProposerRewardJson));
  const PgConfig pg = cfg_.proposer.pg;
  wire::WriteFileAtomic(d / "advantages.ndjson",
                        Ndjson(r.advantages.entries, [&](const AdvantageEntry& e) {
                          return wire::ToJson(e, r.advantages, pg);
                        }));
  wire::WriteFileAtomic(d / "qa.ndjson",
                        Ndjson(r.qa, [](const QAPair& q) { return wire::ToJson(q); }));
  wire::WriteFileAtomic(d / "metrics.json", MetricsJson(r.metrics).dump(2) + "\n");
  episodes_ += r.metrics.episodes_issued;
  WriteMetricsCsv(state.iteration, Phase::kProposer, step);
  Log().info("iter {} proposer step {}/{}: mean reward {:.4f}, {} QA, {} episodes",
             state.iteration, step, cfg_.proposer.steps, r.metrics.mean_reward,
             r.metrics.qa_valid, r.metrics.episodes_issued);
}

void Run::SolverStep(IterationState& state, const std::vector<QAPair>& harvest) {
  const int step = state.step + 1;
  Shuffler shuffler(harvest.size(), MixSeed({cfg_.seed, std::uint64_t(state.iteration),
                                             kSeedSolver}));
  std::vector<QAPair> batch;
  const int size = cfg_.solver.batch_size;
  for (int i = 0; i < size; ++i) {
    batch.push_back(harvest[shuffler.At(std::size_t((step - 1) * size + i))]);
  }
  SolverStepResult r = RunSolverStep(Context(cfg_.solver), state, batch);
  const fs::path d = PhaseDir(state.iteration, Phase::kSolver) / fmt::format("step{}", step);
  wire::WriteFileAtomic(d / "trajectories.ndjson",
                        Ndjson(r.episodes, [](const EpisodeRecord& e) { return wire::ToJson(e); }));
  wire::WriteFileAtomic(d / "rewards.ndjson", Ndjson(r.rewards, SolverRewardJson));
  const PgConfig pg = cfg_.solver.pg;
  wire::WriteFileAtomic(d / "advantages.ndjson",
                        Ndjson(r.batch.entries, [&](const AdvantageEntry& e) {
                          return wire::ToJson(e, r.batch, pg);
                        }));
  wire::WriteFileAtomic(d / "qa.ndjson",
                        Ndjson(batch, [](const QAPair& q) { return wire::ToJson(q); }));
  wire::WriteFileAtomic(d / "metrics.json", MetricsJson(r.metrics).dump(2) + "\n");
  episodes_ += r.metrics.episodes_issued;
  WriteMetricsCsv(state.iteration, Phase::kSolver, step);
  Log().info("iter {} solver step {}/{}: mean accuracy {:.4f}, {} episodes", state.iteration,
             step, cfg_.solver.steps, r.metrics.mean_reward, r.metrics.episodes_issued);
}

std::vector<QAPair> Run::Harvest(int it) {
  std::vector<QAPair> qa;
  if (cfg_.harvest == HarvestMode::kCumulative) {
    for (int s = 1; s <= cfg_.proposer.steps; ++s) {
      const fs::path f = PhaseDir(it, Phase::kProposer) / fmt::format("step{}", s) / "qa.ndjson";
      for (const auto& j : wire::ParseLines(wire::ReadFile(f))) qa.push_back(wire::QaFromJson(j));
    }
  } else {
    const int prompts = cfg_.harvest_prompts > 0 ? cfg_.harvest_prompts : cfg_.proposer.batch_size;
    const std::vector<int> hops = HopsFor(prompts, cfg_.proposer.hop_ratio);
    const auto docs = SeedDocs(it, kSeedHarvest, 0, prompts);
    std::vector<std::optional<QAPair>> found(docs.size());
    ParallelFor(docs.size(), cfg_.parallelism, [&](std::size_t i) {
      const std::uint64_t seed = MixSeed({cfg_.seed, std::uint64_t(it), kSeedHarvest, i});
      try {
        EpisodeRecord rec = RunEpisode(proposer_, prompts::ProposerPrompt(hops[i], docs[i]),
                                       cfg_.proposer_rollout, &index_, seed);
        found[i] = ExtractQa(rec.trajectory, hops[i], docs[i].doc_id);
      } catch (const Error& e) {
        if (!IsBackendFailure(e)) throw;
        Log().warn("harvest prompt {} failed: {}", i, e.what());
      }
    });
    episodes_ += docs.size();
    for (auto& q : found) {
      if (q) qa.push_back(std::move(*q));
    }
  }
  wire::WriteFileAtomic(PhaseDir(it, Phase::kProposer) / "harvest.ndjson",
                        Ndjson(qa, [](const QAPair& q) { return wire::ToJson(q); }));
  Log().info("iter {}: harvested {} QA pairs", it, qa.size());
  return qa;
}

std::vector<QAPair> Run::LoadHarvest(int it) const {
  std::vector<QAPair> qa;
  const fs::path f = PhaseDir(it, Phase::kProposer) / "harvest.ndjson";
  for (const auto& j : wire::ParseLines(wire::ReadFile(f))) qa.push_back(wire::QaFromJson(j));
  return qa;
}

void Run::WriteMetricsCsv(int it, Phase phase, int upto) const {
  std::string csv =
      "iteration,phase,step,mean_reward,reward_h1,reward_h2,reward_h3,reward_h4,"
      "advantage_variance,episodes_issued,qa_valid,backend_failures\n";
  for (int s = 1; s <= upto; ++s) {
    const json m = wire::Parse(
        wire::ReadFile(PhaseDir(it, phase) / fmt::format("step{}", s) / "metrics.json"));
    const auto& hops = m["per_hop_mean_reward"];
    csv += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", it, PhaseName(phase), s,
                       CsvNumber(m["mean_reward"]), CsvNumber(hops[0]), CsvNumber(hops[1]),
                       CsvNumber(hops[2]), CsvNumber(hops[3]),
                       CsvNumber(m["advantage_variance"]), CsvNumber(m["episodes_issued"]),
                       CsvNumber(m["qa_valid"]), CsvNumber(m["backend_failures"]));
  }
  wire::WriteFileAtomic(PhaseDir(it, phase) / "metrics.csv", csv);
}

void Run::Exported(int it, Phase phase, int step) {
  ++completed_;
  const ExportedBatch batch{cfg_.run_id, it, phase, step,
                            (PhaseDir(it, phase) / fmt::format("step{}", step)).string()};
  SaveState("running");
  if (hook_) hook_(batch);
  if (!cfg_.callback_url.empty()) {
    http::PostOptions opts;
    opts.timeout_ms = 5000;
    opts.max_retries = 0;
    try {
      http::PostJson(cfg_.callback_url,
                     {{"run_id", batch.run_id},
                      {"iteration", it},
                      {"phase", PhaseName(phase)},
                      {"step", step},
                      {"directory", batch.directory}},
                     opts);
    } catch (const Error& e) {
      Log().warn("trainer callback failed: {}", e.what());
    }
  }
}

void Run::SaveState(const std::string& status) const {
  const json state = {{"status", status},
                      {"phase_steps_completed", completed_},
                      {"episodes_issued", episodes_},
                      {"harvest_sizes", harvest_sizes_}};
  wire::WriteFileAtomic(dir_ / "state.json", state.dump(2) + "\n");
}

RunReport Run::Report(const std::string& status) const {
  RunReport r;
  r.run_id = cfg_.run_id;
  r.status = status;
  r.iterations = cfg_.iterations;
  r.phase_steps_completed = completed_;
  r.episodes_issued = episodes_;
  r.harvest_sizes = harvest_sizes_;
  r.directory = dir_.string();
  if (completed_ > 0) {
    const int per = StepsPerIteration();
    const int it = (completed_ - 1) / per + 1;
    const int within = (completed_ - 1) % per + 1;
    const Phase phase = within <= cfg_.proposer.steps ? Phase::kProposer : Phase::kSolver;
    const int step = phase == Phase::kProposer ? within : within - cfg_.proposer.steps;
    r.last_completed = ExportedBatch{cfg_.run_id, it, phase, step,
                                     (PhaseDir(it, phase) / fmt::format("step{}", step)).string()};
  }
  json last = nullptr;
  if (r.last_completed) {
    last = {{"iteration", r.last_completed->iteration},
            {"phase", PhaseName(r.last_completed->phase)},
            {"step", r.last_completed->step}};
  }
  const json report = {{"run_id", r.run_id},
                       {"status", status},
                       {"iterations", r.iterations},
                       {"phase_steps_completed", completed_},
                       {"phase_steps_total", cfg_.iterations * StepsPerIteration()},
                       {"last_completed", last},
                       {"episodes_issued", episodes_},
                       {"harvest_sizes", harvest_sizes_}};
  wire::WriteFileAtomic(dir_ / "report.json", report.dump(2) + "\n");
  return r;
}

RunReport Run::Execute() {
  const std::string config = wire::ToJson(cfg_).dump(2) + "\n";
  const fs::path state_file = dir_ / "state.json";
  if (fs::exists(state_file)) {
    if (wire::ReadFile(dir_ / "config.json") != config) {
      throw Error(ErrorCode::kInvalidArgument,
                  "run '" + cfg_.run_id + "' exists with a different configuration");
    }
    const json state = wire::Parse(wire::ReadFile(state_file));
    const std::string status = wire::GetString(state, "status");
    completed_ = wire::GetInt(state, "phase_steps_completed");
    episodes_ = wire::Require(state, "episodes_issued").get<std::size_t>();
    harvest_sizes_ = wire::Require(state, "harvest_sizes").get<std::vector<std::size_t>>();
    if (status == "completed" || status == "empty_curriculum") return Report(status);
    Log().info("resuming run {} after {} phase-steps", cfg_.run_id, completed_);
  } else {
    wire::WriteFileAtomic(dir_ / "config.json", config);
    SaveState("running");
  }

  const int per = StepsPerIteration();
  const int total = cfg_.iterations * per;
  int budget = cfg_.stop_after_steps;
  std::vector<QAPair> harvest;
  while (completed_ < total) {
    if (cfg_.stop_after_steps > 0 && budget-- == 0) {
      SaveState("interrupted");
      return Report("interrupted");
    }
    const int it = completed_ / per + 1;
    const int within = completed_ % per;
    IterationState state;
    state.iteration = it;
    if (within < cfg_.proposer.steps) {
      state.phase = Phase::kProposer;
      state.step = within;
      ProposerStep(state);
      if (state.step == cfg_.proposer.steps) {
        harvest = Harvest(it);
        harvest_sizes_.push_back(harvest.size());
      }
      Exported(it, Phase::kProposer, state.step);
      continue;
    }
    state.phase = Phase::kSolver;
    state.step = within - cfg_.proposer.steps;
    if (state.step == 0 || harvest.empty()) harvest = LoadHarvest(it);
    if (harvest.empty()) {
      Log().error("iter {}: no harvested QA for the solver phase", it);
      SaveState("empty_curriculum");
      return Report("empty_curriculum");
    }
    SolverStep(state, harvest);
    Exported(it, Phase::kSolver, state.step);
  }
  SaveState("completed");
  return Report("completed");
}

}  // namespace

RunReport RunSelfEvolution(const EvolveConfig& cfg, const PolicyBackend& proposer,
                           const PolicyBackend& solver, const SearchIndex& index,
                           const TrainerHook& hook) {
  Validate(cfg);
  return Run(cfg, proposer, solver, index, hook).Execute();
}

}  // namespace evoqa

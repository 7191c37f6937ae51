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

#include "evoqa/policy.hpp"

#include <algorithm>
#include <exception>

#include "evoqa/error.hpp"
#include "evoqa/prompts.hpp"
#include "evoqa/text.hpp"
#include "http_client.hpp"
#include "scripts.hpp"

namespace evoqa {
namespace {

// Cuts after the earliest stop tag.
std::string ApplyStops(std::string text, const std::vector<std::string>& stops) {
  std::size_t cut = std::string::npos;
  for (const auto& stop : stops) {
    const std::size_t at = text.find(stop);
    if (at != std::string::npos) cut = std::min(cut, at + stop.size());
  }
  if (cut != std::string::npos) text.resize(cut);
  return text;
}

// Servers that strip the matched stop sequence leave its block open.
std::string RestoreStop(std::string text, const std::vector<std::string>& stops) {
  for (const auto& stop : stops) {
    if (stop.size() < 4 || !stop.starts_with("</") || stop.back() != '>') continue;
    const std::string tag = stop.substr(2, stop.size() - 3);
    if (ScanTag(text, tag).unclosed) {
      while (!text.empty() && (text.back() == ' ' || text.back() == '\n')) text.pop_back();
      text += (text.ends_with(">") ? "\n" : " ") + stop;
      break;
    }
  }
  return text;
}

void CheckRequest(const GenRequest& req) {
  if (req.sample_count < 1) {
    throw Error(ErrorCode::kInvalidArgument, "sample_count must be >= 1");
  }
  if (req.messages.empty()) throw Error(ErrorCode::kInvalidArgument, "no messages");
}

class ScriptedBackend final : public PolicyBackend {
 public:
  ScriptedBackend(scripts::ScriptSpec spec, scripts::ScriptFn fn)
      : spec_(std::move(spec)), fn_(fn) {}

  std::vector<Completion> Generate(const GenRequest& req) const override {
    CheckRequest(req);
    std::vector<Completion> out;
    for (int j = 0; j < req.sample_count; ++j) {
      const scripts::ScriptCall call{spec_, req.messages, req.seed,
                                     req.sample_index + static_cast<std::uint32_t>(j)};
      std::string text = ApplyStops(fn_(call), req.stop_tags);
      const std::size_t limit =
          static_cast<std::size_t>(std::max(req.max_new_tokens, 0)) * kCharsPerToken;
      if (text.size() > limit) text.resize(limit);
      out.push_back({std::move(text), std::nullopt, std::nullopt});
    }
    return out;
  }

 private:
  scripts::ScriptSpec spec_;
  scripts::ScriptFn fn_;
};

class HttpBackend final : public PolicyBackend {
 public:
  explicit HttpBackend(PolicyHandle handle) : handle_(std::move(handle)) {}

  std::vector<Completion> Generate(const GenRequest& req) const override {
    CheckRequest(req);
    nlohmann::json msgs = nlohmann::json::array();
    for (const auto& m : req.messages) {
      msgs.push_back({{"role", RoleName(m.role)}, {"content", m.text}});
    }
    const nlohmann::json body = {{"messages", msgs},
                                 {"n", req.sample_count},
                                 {"temperature", req.temperature},
                                 {"stop", req.stop_tags},
                                 {"max_tokens", req.max_new_tokens},
                                 {"seed", req.seed},
                                 {"sample_index", req.sample_index}};
    http::PostOptions opts;
    opts.timeout_ms = handle_.timeout_ms;
    opts.max_retries = handle_.max_retries;
    opts.bearer_token = handle_.auth_token;
    const nlohmann::json reply = http::PostJson(handle_.endpoint, body, opts);

    const auto bad = [](const std::string& why) {
      return Error(ErrorCode::kContractViolation, "policy reply: " + why);
    };
    if (!reply.is_object() || !reply.contains("choices") || !reply["choices"].is_array()) {
      throw bad("missing choices array");
    }
    const auto& choices = reply["choices"];
    if (choices.size() != static_cast<std::size_t>(req.sample_count)) {
      throw bad("expected " + std::to_string(req.sample_count) + " choices, got " +
                std::to_string(choices.size()));
    }
    std::vector<Completion> out;
    for (const auto& c : choices) {
      if (!c.is_object() || !c.contains("text") || !c["text"].is_string()) {
        throw bad("choice without text");
      }
      Completion comp;
      comp.text = RestoreStop(c["text"].get<std::string>(), req.stop_tags);
      if (c.contains("logprobs") && c["logprobs"].is_array()) {
        std::vector<double> lp;
        for (const auto& v : c["logprobs"]) {
          if (!v.is_number()) throw bad("non-numeric logprob");
          lp.push_back(v.get<double>());
        }
        comp.token_logprobs = std::move(lp);
      }
      if (c.contains("token_count")) {
        if (!c["token_count"].is_number_unsigned()) throw bad("bad token_count");
        comp.token_count = c["token_count"].get<std::size_t>();
      }
      out.push_back(std::move(comp));
    }
    return out;
  }

 private:
  PolicyHandle handle_;
};

}  // namespace

PolicyHandle PolicyHandle::Scripted(std::string script_id) {
  PolicyHandle h;
  h.kind = BackendKind::kScripted;
  h.script_id = std::move(script_id);
  return h;
}

PolicyHandle PolicyHandle::Http(std::string endpoint, std::string auth_token) {
  PolicyHandle h;
  h.kind = BackendKind::kHttp;
  h.endpoint = std::move(endpoint);
  h.auth_token = std::move(auth_token);
  return h;
}

void Validate(const PolicyHandle& handle) {
  const bool http = handle.kind == BackendKind::kHttp;
  if (http && (handle.endpoint.empty() || !handle.script_id.empty())) {
    throw Error(ErrorCode::kInvalidArgument, "http policy needs an endpoint and no script_id");
  }
  if (!http && (handle.script_id.empty() || !handle.endpoint.empty())) {
    throw Error(ErrorCode::kInvalidArgument,
                "scripted policy needs a script_id and no endpoint");
  }
  if (handle.max_retries < 0 || handle.timeout_ms <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "retries must be >= 0 and timeout > 0");
  }
  if (http) http::ParseUrl(handle.endpoint);
}

std::shared_ptr<const PolicyBackend> MakeBackend(const PolicyHandle& handle) {
  Validate(handle);
  if (handle.kind == BackendKind::kHttp) return std::make_shared<HttpBackend>(handle);
  auto spec = scripts::ParseScriptId(handle.script_id);
  const scripts::ScriptFn fn = scripts::FindScript(spec.name);
  if (fn == nullptr) {
    throw Error(ErrorCode::kInvalidArgument, "unknown script '" + spec.name + "'");
  }
  return std::make_shared<ScriptedBackend>(std::move(spec), fn);
}

std::vector<Completion> Generate(const PolicyHandle& handle, const GenRequest& req) {
  return MakeBackend(handle)->Generate(req);
}

std::vector<std::string> ScriptNames() { return scripts::Names(); }

void Validate(const RolloutConfig& cfg) {
  if (cfg.max_turns < 1 || cfg.max_sequence_tokens < 1 || cfg.tool_top_k < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "max_turns, max_sequence_tokens and tool_top_k must be positive");
  }
  if (cfg.temperature < 0) throw Error(ErrorCode::kInvalidArgument, "temperature < 0");
}

std::size_t ProxyTokenCount(std::string_view text) {
  return (text.size() + kCharsPerToken - 1) / kCharsPerToken;
}

EpisodeRecord RunEpisode(const PolicyBackend& backend, std::vector<Message> prompt,
                         const RolloutConfig& cfg, const SearchIndex* index,
                         std::uint64_t seed, std::uint32_t sample_index) {
  Validate(cfg);
  if (prompt.empty()) throw Error(ErrorCode::kInvalidArgument, "empty prompt");
  std::vector<Message> messages = std::move(prompt);
  const auto budget = static_cast<std::size_t>(cfg.max_sequence_tokens);
  std::size_t tokens = 0;
  for (const auto& m : messages) tokens += ProxyTokenCount(m.text);

  EpisodeMeta meta;
  bool counted = false, proxied = false;
  int assistant_turns = 0;
  while (true) {
    if (assistant_turns >= cfg.max_turns) {
      meta.stop_reason = "max_turns";
      break;
    }
    if (tokens >= budget) {
      meta.stop_reason = "token_budget";
      break;
    }
    GenRequest req;
    req.messages = messages;
    req.max_new_tokens = static_cast<int>(budget - tokens);
    req.temperature = cfg.temperature;
    req.seed = seed;
    req.sample_index = sample_index;
    auto completions = backend.Generate(req);
    if (completions.size() != 1) {
      throw Error(ErrorCode::kContractViolation, "backend returned the wrong sample count");
    }
    Completion& c = completions.front();
    if (c.token_count) {
      tokens += *c.token_count;
      counted = true;
    } else {
      tokens += ProxyTokenCount(c.text);
      proxied = true;
    }
    messages.push_back({Role::kAssistant, std::move(c.text)});
    ++assistant_turns;
    const std::string& text = messages.back().text;
    if (HasTerminalBlock(text)) {
      meta.stop_reason = "answer";
      break;
    }

    const Turn turn{Role::kAssistant, text, messages.size() - 1};
    const ToolCallExtraction calls = ExtractToolCalls(turn);
    const std::string where = "turn " + std::to_string(turn.index) + ": ";
    for (const auto& bad : calls.invalid) meta.invalid_tool_calls.push_back(where + bad.reason);
    if (calls.calls.empty() || assistant_turns >= cfg.max_turns) continue;
    if (index == nullptr) {
      meta.invalid_tool_calls.push_back(where + "no search index available");
      continue;
    }
    std::vector<std::string> queries;
    for (const auto& call : calls.calls) {
      queries.insert(queries.end(), call.query_list.begin(), call.query_list.end());
    }
    std::vector<std::vector<SearchResult>> results;
    for (const auto& q : queries) results.push_back(index->Query(q, cfg.tool_top_k));
    messages.push_back({Role::kTool, RenderToolResponse(results, queries)});
    tokens += ProxyTokenCount(messages.back().text);
  }

  meta.token_source = counted && proxied ? "mixed" : counted ? "backend" : "char_proxy";
  EpisodeRecord rec;
  rec.trajectory = ParseTrajectory(messages, cfg.max_turns, tokens);
  rec.meta = std::move(meta);
  return rec;
}

SolverSamples SampleSolverEpisodes(const PolicyBackend& solver,
                                   std::string_view question, int n,
                                   const RolloutConfig& cfg,
                                   const SearchIndex* index, std::uint64_t seed,
                                   bool tolerate_failures) {
  if (n < 2) throw Error(ErrorCode::kDomainError, "solver sample count must be >= 2");
  SolverSamples out;
  std::exception_ptr last_error;
  for (int i = 0; i < n; ++i) {
    try {
      EpisodeRecord rec = RunEpisode(solver, prompts::SolverPrompt(question), cfg, index,
                                     seed, static_cast<std::uint32_t>(i));
      out.answers.push_back(FinalAnswer(rec.trajectory));
      out.episodes.push_back(std::move(rec));
      out.failed.push_back(false);
    } catch (const Error& e) {
      if (!tolerate_failures || (e.code() != ErrorCode::kBackendUnavailable &&
                                 e.code() != ErrorCode::kContractViolation)) {
        throw;
      }
      last_error = std::current_exception();
      EpisodeRecord rec;
      rec.meta.stop_reason = "backend_error";
      out.answers.emplace_back();
      out.episodes.push_back(std::move(rec));
      out.failed.push_back(true);
    }
  }
  if (std::all_of(out.failed.begin(), out.failed.end(), [](bool f) { return f; })) {
    std::rethrow_exception(last_error);
  }
  return out;
}

std::vector<std::string> SampleSolverAnswers(const PolicyBackend& solver,
                                             std::string_view question, int n,
                                             const RolloutConfig& cfg,
                                             const SearchIndex* index,
                                             std::uint64_t seed) {
  return SampleSolverEpisodes(solver, question, n, cfg, index, seed).answers;
}

std::string FinalAnswer(const Trajectory& trajectory) {
  const Turn* last = trajectory.FinalAssistantTurn();
  if (last == nullptr) return {};
  const TagScan scan = ScanTag(last->text, "answer");
  if (scan.contents.size() != 1 || scan.nested != 0) return {};
  return std::string(text::Trim(scan.contents.front()));
}

}  // namespace evoqa

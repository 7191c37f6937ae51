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

#include "scripts.hpp"

#include <algorithm>
#include <charconv>
#include <optional>
#include <regex>
#include <set>

#include "evoqa/error.hpp"
#include "evoqa/prompts.hpp"
#include "evoqa/rng.hpp"
#include "evoqa/text.hpp"
#include "json.hpp"

namespace evoqa::scripts {
namespace {

std::size_t AssistantCount(std::span<const Message> msgs) {
  return static_cast<std::size_t>(std::count_if(
      msgs.begin(), msgs.end(), [](const Message& m) { return m.role == Role::kAssistant; }));
}

std::string UserText(std::span<const Message> msgs) {
  for (const auto& m : msgs) {
    if (m.role == Role::kUser) return m.text;
  }
  return {};
}

const Message* LastTool(std::span<const Message> msgs) {
  for (auto it = msgs.rbegin(); it != msgs.rend(); ++it) {
    if (it->role == Role::kTool) return &*it;
    if (it->role == Role::kAssistant) continue;
    break;
  }
  return nullptr;
}

std::optional<double> Param(const ScriptSpec& spec, const std::string& key) {
  auto it = spec.params.find(key);
  if (it == spec.params.end()) return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kInvalidArgument,
                "script parameter " + key + " is not a number: " + it->second);
  }
}

std::string SearchCall(const std::string& think, const std::string& query) {
  nlohmann::json call = {{"name", "search"},
                         {"arguments", {{"query_list", {query}}}}};
  return "<think> " + think + " </think>\n<tool_call>\n" + call.dump() +
         "\n</tool_call>";
}

struct Hit {
  std::string title;
  std::string snippet;
};

// Doc lines of a rendered tool response.
std::vector<Hit> ParseHits(std::string_view response) {
  static const std::regex kDoc(R"re(^Doc \d+ \(Title: "(.*?)"\) ?(.*)$)re");
  std::vector<Hit> hits;
  std::size_t pos = 0;
  while (pos < response.size()) {
    std::size_t end = response.find('\n', pos);
    if (end == std::string_view::npos) end = response.size();
    const std::string line(response.substr(pos, end - pos));
    std::smatch m;
    if (std::regex_match(line, m, kDoc)) hits.push_back({m[1], m[2]});
    pos = end + 1;
  }
  return hits;
}

std::string FirstWords(std::string_view text, std::size_t n) {
  std::string out;
  std::size_t count = 0, pos = 0;
  while (pos < text.size() && count < n) {
    while (pos < text.size() && text[pos] == ' ') ++pos;
    std::size_t end = text.find(' ', pos);
    if (end == std::string_view::npos) end = text.size();
    if (end > pos) {
      if (!out.empty()) out += ' ';
      out.append(text.substr(pos, end - pos));
      ++count;
    }
    pos = end;
  }
  while (!out.empty() && (out.back() == '.' || out.back() == ',')) out.pop_back();
  return out;
}

std::string Echo(const ScriptCall& call) {
  return call.messages.empty() ? std::string() : call.messages.back().text;
}

std::string Replay(const ScriptCall& call) {
  const std::string name = call.spec.name.substr(std::string("replay-").size());
  const auto transcript = prompts::RecordedTranscript(name);
  if (!transcript) return {};
  const std::size_t want = AssistantCount(call.messages);
  std::size_t seen = 0;
  for (const auto& m : *transcript) {
    if (m.role != Role::kAssistant) continue;
    if (seen++ == want) return m.text;
  }
  return {};
}

std::string NeverAnswer(const ScriptCall&) {
  return "<think> I still need more information. </think>";
}

std::string BadTool(const ScriptCall& call) {
  if (AssistantCount(call.messages) == 0) {
    return "<think> Let me browse. </think>\n<tool_call>\n"
           R"({"name": "browse", "arguments": {"query_list": ["anything"]}})"
           "\n</tool_call>";
  }
  return "<think> Answering without search. </think>\n<answer> unknown </answer>";
}

std::string Fixed(const ScriptCall& call) {
  auto it = call.spec.params.find("answer");
  const std::string answer = it == call.spec.params.end() ? "unknown" : it->second;
  return "<think> I know this. </think>\n<answer> " + answer + " </answer>";
}

// Walks hop-1 searches from the seed title, then asks which article the chain
// ends at. Parameter noqa=2,4 omits the question/answer for those hops.
std::string Proposer(const ScriptCall& call) {
  static const std::regex kHop(R"(n = (\d+) hops)");
  static const std::regex kSeed(R"re(\(Title: "(.*?)"\)\n)re");
  const std::string user = UserText(call.messages);
  std::smatch m;
  int hop = 1;
  if (std::regex_search(user, m, kHop)) hop = std::stoi(m[1]);
  std::string seed_title, seed_text;
  if (std::regex_search(user, m, kSeed)) {
    seed_title = m[1];
    seed_text = user.substr(static_cast<std::size_t>(m.position(0) + m.length(0)));
  }

  std::set<int> noqa;
  if (auto it = call.spec.params.find("noqa"); it != call.spec.params.end()) {
    for (const auto& tok : text::Tokenize(it->second)) noqa.insert(std::stoi(tok));
  }

  std::set<std::string> visited = {seed_title};
  // The chain so far: each tool turn contributes its first unvisited title.
  std::vector<Hit> chain;
  for (const auto& msg : call.messages) {
    if (msg.role != Role::kTool) continue;
    for (const auto& h : ParseHits(msg.text)) {
      if (visited.insert(h.title).second) {
        chain.push_back(h);
        break;
      }
    }
  }

  const std::size_t t = AssistantCount(call.messages);
  if (static_cast<int>(t) < hop - 1) {
    const std::string entity = chain.empty() ? seed_title : chain.back().title;
    return SearchCall("Reasoning step " + std::to_string(t + 1) + ": find Hop " +
                          std::to_string(t + 2) + " from " + entity + ".",
                      entity);
  }
  if (noqa.count(hop) != 0) return "<think> I could not settle on a question. </think>";

  std::string answer = seed_title, clue = seed_text;
  if (hop > 1 && !chain.empty()) {
    answer = chain.back().title;
    clue = chain.back().snippet;
  }
  const std::string question = "Following " + std::to_string(hop) +
                               (hop == 1 ? " hop" : " hops") + " from \"" + seed_title +
                               "\", which article begins: " + FirstWords(clue, 12) + "?";
  return "<think> Final reasoning step: the chain ends at " + answer +
         ". </think>\n<question> " + question + " </question>\n<answer> " + answer +
         " </answer>";
}

// Searches the question and answers with the top title when the sample is
// meant to be correct, "unknown" otherwise. k<h>=c makes samples 0..c-1 of
// hop-h questions correct; p<h>=x makes each sample correct with
// probability x. Keys without a hop digit apply to every hop.
std::string Lookup(const ScriptCall& call) {
  static const std::regex kHop(R"(Following (\d+) hops? from)");
  const std::string user = UserText(call.messages);
  const std::size_t qpos = user.rfind("Question: ");
  const std::string question =
      qpos == std::string::npos ? user : user.substr(qpos + 10);

  const Message* tool = LastTool(call.messages);
  if (tool == nullptr) {
    if (AssistantCount(call.messages) > 0) {
      return "<think> The search failed. </think>\n<answer> unknown </answer>";
    }
    return SearchCall("I need to search for the answer.", question);
  }

  std::smatch m;
  const std::string hop =
      std::regex_search(question, m, kHop) ? std::string(m[1]) : std::string();
  bool correct = true;
  if (auto k = Param(call.spec, "k" + hop); k && !hop.empty()) {
    correct = call.sample_index < *k;
  } else if (auto p = Param(call.spec, "p" + hop); p && !hop.empty()) {
    correct = Rng(MixSeed({call.seed, HashString(question), call.sample_index})).Uniform() < *p;
  } else if (auto k_all = Param(call.spec, "k")) {
    correct = call.sample_index < *k_all;
  } else if (auto p_all = Param(call.spec, "p")) {
    correct =
        Rng(MixSeed({call.seed, HashString(question), call.sample_index})).Uniform() < *p_all;
  }

  const auto hits = ParseHits(tool->text);
  if (!correct || hits.empty()) {
    return "<think> The results do not settle it. </think>\n<answer> unknown </answer>";
  }
  return "<think> The top result answers the question. </think>\n<answer> " +
         hits.front().title + " </answer>";
}

struct Entry {
  std::string_view name;
  ScriptFn fn;
};

constexpr Entry kScripts[] = {
    {"echo", Echo},         {"never-answer", NeverAnswer}, {"bad-tool", BadTool},
    {"fixed", Fixed},       {"proposer", Proposer},        {"lookup", Lookup},
};

}  // namespace

ScriptSpec ParseScriptId(std::string_view script_id) {
  ScriptSpec spec;
  const std::size_t q = script_id.find('?');
  spec.name = std::string(script_id.substr(0, q));
  if (q == std::string_view::npos) return spec;
  std::string_view rest = script_id.substr(q + 1);
  while (!rest.empty()) {
    const std::size_t amp = rest.find('&');
    const std::string_view kv = rest.substr(0, amp);
    const std::size_t eq = kv.find('=');
    if (eq == std::string_view::npos || eq == 0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "malformed script parameter '" + std::string(kv) + "'");
    }
    spec.params[std::string(kv.substr(0, eq))] = std::string(kv.substr(eq + 1));
    if (amp == std::string_view::npos) break;
    rest = rest.substr(amp + 1);
  }
  return spec;
}

ScriptFn FindScript(std::string_view name) {
  for (const auto& e : kScripts) {
    if (e.name == name) return e.fn;
  }
  if (name.starts_with("replay-") &&
      prompts::RecordedTranscript(name.substr(7)).has_value()) {
    return Replay;
  }
  return nullptr;
}

std::vector<std::string> Names() {
  std::vector<std::string> names;
  for (const auto& e : kScripts) names.emplace_back(e.name);
  for (const auto& t : prompts::RecordedTranscriptNames()) names.push_back("replay-" + t);
  return names;
}

}  // namespace evoqa::scripts

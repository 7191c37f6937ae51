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

// Built-in deterministic agents for the scripted policy backend.

#ifndef EVOQA_SRC_SCRIPTS_HPP_
#define EVOQA_SRC_SCRIPTS_HPP_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evoqa/protocol.hpp"

namespace evoqa::scripts {

// "name" or "name?key=value&key=value".
struct ScriptSpec {
  std::string name;
  std::map<std::string, std::string> params;
};

ScriptSpec ParseScriptId(std::string_view script_id);

struct ScriptCall {
  const ScriptSpec& spec;
  std::span<const Message> messages;
  std::uint64_t seed;
  std::uint32_t sample_index;
};

using ScriptFn = std::string (*)(const ScriptCall& call);

// nullptr for unknown names.
ScriptFn FindScript(std::string_view name);
std::vector<std::string> Names();

}  // namespace evoqa::scripts

#endif  // EVOQA_SRC_SCRIPTS_HPP_

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

#include <cstdlib>
#include <string>

#include <spdlog/sinks/stdout_sinks.h>

#include "evoqa/error.hpp"
#include "evoqa/log.hpp"
#include "log_internal.hpp"

namespace evoqa {
namespace {

spdlog::level::level_enum ParseLevel(std::string_view name) {
  const auto level = spdlog::level::from_str(std::string(name));
  if (level == spdlog::level::off && name != "off") {
    throw Error(ErrorCode::kInvalidArgument, "unknown log level '" + std::string(name) + "'");
  }
  return level;
}

std::shared_ptr<spdlog::logger> Make() {
  auto logger = std::make_shared<spdlog::logger>(
      "evoqa", std::make_shared<spdlog::sinks::stderr_sink_mt>());
  logger->set_pattern("[%Y-%m-%d %H:%M:%S.%e] [%l] %v");
  spdlog::level::level_enum level = spdlog::level::info;
  if (const char* env = std::getenv("EVOQA_LOG_LEVEL")) {
    try {
      level = ParseLevel(env);
    } catch (const Error&) {
    }
  }
  logger->set_level(level);
  return logger;
}

}  // namespace

spdlog::logger& Log() {
  static const std::shared_ptr<spdlog::logger> logger = Make();
  return *logger;
}

void SetLogLevel(std::string_view level) { Log().set_level(ParseLevel(level)); }

}  // namespace evoqa

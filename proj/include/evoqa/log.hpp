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

#ifndef EVOQA_LOG_HPP_
#define EVOQA_LOG_HPP_

#include <string_view>

namespace evoqa {

// "trace", "debug", "info", "warn", "error" or "off". Diagnostics go to
// stderr; the initial level comes from EVOQA_LOG_LEVEL, else "info".
// Throws Error(kInvalidArgument) for other names.
void SetLogLevel(std::string_view level);

}  // namespace evoqa

#endif  // EVOQA_LOG_HPP_

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

// Minimal JSON-over-HTTP client shared by the policy backends, the external
// embedder and the trainer callback.

#ifndef EVOQA_SRC_HTTP_CLIENT_HPP_
#define EVOQA_SRC_HTTP_CLIENT_HPP_

#include <string>

#include "json.hpp"

namespace evoqa::http {

struct Url {
  std::string scheme_host_port;  // "http://host:port"
  std::string path;              // "/v1/completions"
};

// Throws Error(kInvalidArgument) for anything but http://host[:port][/path].
Url ParseUrl(const std::string& url);

struct PostOptions {
  int timeout_ms = 60000;
  int max_retries = 3;  // attempts after the first
  int backoff_ms = 50;  // doubled after each failed attempt
  std::string bearer_token;
};

// POSTs `body` and returns the parsed JSON reply. Connection failures and 5xx
// replies are retried; after the last attempt Error(kBackendUnavailable) is
// thrown. 4xx replies and unparsable bodies throw Error(kContractViolation).
nlohmann::json PostJson(const std::string& url, const nlohmann::json& body,
                        const PostOptions& options = {});

}  // namespace evoqa::http

#endif  // EVOQA_SRC_HTTP_CLIENT_HPP_

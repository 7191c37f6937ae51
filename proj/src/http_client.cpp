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

#include "http_client.hpp"

#include <chrono>
#include <thread>

#include "evoqa/error.hpp"
#include "httplib.h"

namespace evoqa::http {

Url ParseUrl(const std::string& url) {
  constexpr std::string_view kScheme = "http://";
  if (url.rfind(kScheme, 0) != 0 || url.size() == kScheme.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "expected an http:// URL, got '" + url + "'");
  }
  const std::size_t slash = url.find('/', kScheme.size());
  Url out;
  if (slash == std::string::npos) {
    out.scheme_host_port = url;
    out.path = "/";
  } else {
    out.scheme_host_port = url.substr(0, slash);
    out.path = url.substr(slash);
  }
  return out;
}

nlohmann::json PostJson(const std::string& url, const nlohmann::json& body,
                        const PostOptions& options) {
  const Url target = ParseUrl(url);
  httplib::Client client(target.scheme_host_port);
  const auto timeout = std::chrono::milliseconds(options.timeout_ms);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  if (!options.bearer_token.empty()) {
    client.set_bearer_token_auth(options.bearer_token);
  }
  const std::string payload = body.dump();
  std::string last_error;
  int backoff = options.backoff_ms;
  for (int attempt = 0; attempt <= options.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
      backoff *= 2;
    }
    auto res = client.Post(target.path, payload, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status >= 400) {
      throw Error(ErrorCode::kContractViolation,
                  url + " answered HTTP " + std::to_string(res->status) + ": " +
                      res->body);
    }
    try {
      return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::kContractViolation,
                  url + " returned invalid JSON: " + e.what());
    }
  }
  throw Error(ErrorCode::kBackendUnavailable,
              url + " unavailable after " + std::to_string(options.max_retries + 1) +
                  " attempts: " + last_error);
}

}  // namespace evoqa::http

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

// HTTP front end: POST /search, /reward, /advantage, /rollout and GET
// /healthz over one shared read-only index.

#ifndef EVOQA_SERVICE_HPP_
#define EVOQA_SERVICE_HPP_

#include <memory>
#include <optional>
#include <string>

#include "evoqa/rewards.hpp"
#include "evoqa/search.hpp"

namespace evoqa {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::string corpus_path;
  IndexConfig index;
  MatchConfig match;
  // When set, every request must carry "Authorization: Bearer <token>".
  std::string auth_token;
  int parallelism = 4;
  // Backend for rollout requests that ask for {"kind": "http"}.
  std::string policy_endpoint;
  std::string policy_token;
};

// Throws Error(kInvalidArgument).
void Validate(const ServiceConfig& cfg);

class Service {
 public:
  // Binds and starts serving on background threads. Builds the index from
  // cfg.corpus_path unless `index` is given. Throws Error(kIoError) when the
  // address cannot be bound.
  static std::unique_ptr<Service> Start(const ServiceConfig& cfg,
                                        std::optional<SearchIndex> index = std::nullopt);

  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  int port() const;
  // Blocks until Stop() is called from another thread.
  void Wait();
  void Stop();

 private:
  struct Impl;
  explicit Service(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

}  // namespace evoqa

#endif  // EVOQA_SERVICE_HPP_

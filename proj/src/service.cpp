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

#include "evoqa/service.hpp"

#include <condition_variable>
#include <mutex>
#include <thread>

#include "api.hpp"
#include "evoqa/policy.hpp"
#include "httplib.h"
#include "log_internal.hpp"

namespace evoqa {

struct Service::Impl {
  ServiceConfig cfg;
  SearchIndex index;
  api::Context ctx;
  httplib::Server server;
  std::thread thread;
  int port = 0;
  std::mutex mu;
  std::condition_variable stopped_cv;
  bool stopped = false;

  Impl(ServiceConfig c, SearchIndex idx) : cfg(std::move(c)), index(std::move(idx)) {}

  void Reply(httplib::Response& res, int status, const api::json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  bool Authorized(const httplib::Request& req) const {
    return cfg.auth_token.empty() ||
           req.get_header_value("Authorization") == "Bearer " + cfg.auth_token;
  }

  template <typename Fn>
  void Handle(const httplib::Request& req, httplib::Response& res, Fn&& fn) {
    if (!Authorized(req)) {
      Reply(res, 401, api::ErrorBody(ErrorCode::kInvalidArgument, "missing or invalid bearer token"));
      return;
    }
    try {
      Reply(res, 200, fn());
    } catch (const Error& e) {
      Reply(res, api::HttpStatus(e.code()), api::ErrorBody(e.code(), e.what()));
    } catch (const std::exception& e) {
      Log().error("{} {}: {}", req.method, req.path, e.what());
      Reply(res, 500, api::ErrorBody(ErrorCode::kInternal, e.what()));
    }
  }

  void Route() {
    const auto post = [this](const char* path, api::json (*fn)(const api::Context&, const api::json&)) {
      server.Post(path, [this, fn](const httplib::Request& req, httplib::Response& res) {
        Handle(req, res, [&] { return fn(ctx, wire::Parse(req.body)); });
      });
    };
    post("/search", api::Search);
    post("/reward", api::Reward);
    post("/rollout", api::Rollout);
    server.Post("/advantage", [this](const httplib::Request& req, httplib::Response& res) {
      Handle(req, res, [&] { return api::Advantage(wire::Parse(req.body)); });
    });
    server.Get("/healthz", [this](const httplib::Request& req, httplib::Response& res) {
      Handle(req, res, [&] { return api::Health(ctx); });
    });
    server.set_error_handler([this](const httplib::Request&, httplib::Response& res) {
      if (res.body.empty()) {
        Reply(res, res.status,
              api::ErrorBody(ErrorCode::kInvalidArgument, "no route for this request"));
      }
    });
  }
};

void Validate(const ServiceConfig& cfg) {
  if (cfg.parallelism < 1) throw Error(ErrorCode::kInvalidArgument, "parallelism must be >= 1");
  if (cfg.port < 0 || cfg.port > 65535) throw Error(ErrorCode::kInvalidArgument, "bad port");
  if (cfg.host.empty()) throw Error(ErrorCode::kInvalidArgument, "empty bind host");
}

Service::Service(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}

std::unique_ptr<Service> Service::Start(const ServiceConfig& cfg,
                                        std::optional<SearchIndex> index) {
  Validate(cfg);
  if (!index) {
    if (cfg.corpus_path.empty()) throw Error(ErrorCode::kInvalidArgument, "no corpus path");
    index = SearchIndex::Build(Corpus::Load(cfg.corpus_path), cfg.index);
  }
  auto impl = std::make_unique<Impl>(cfg, std::move(*index));
  Impl& s = *impl;
  s.ctx.index = &s.index;
  s.ctx.match = cfg.match;
  s.ctx.allow_policy_endpoints = false;
  if (!cfg.policy_endpoint.empty()) {
    s.ctx.default_policy = PolicyHandle::Http(cfg.policy_endpoint, cfg.policy_token);
    Validate(*s.ctx.default_policy);
  }
  const std::size_t threads = static_cast<std::size_t>(cfg.parallelism);
  s.server.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
  s.server.set_payload_max_length(std::size_t{64} << 20);
  s.Route();
  if (cfg.port == 0) {
    s.port = s.server.bind_to_any_port(cfg.host);
  } else {
    s.port = s.server.bind_to_port(cfg.host, cfg.port) ? cfg.port : -1;
  }
  if (s.port <= 0) {
    throw Error(ErrorCode::kIoError,
                "cannot bind " + cfg.host + ":" + std::to_string(cfg.port));
  }
  s.thread = std::thread([&s] {
    s.server.listen_after_bind();
    std::lock_guard<std::mutex> lock(s.mu);
    s.stopped = true;
    s.stopped_cv.notify_all();
  });
  s.server.wait_until_ready();
  Log().info("serving {} documents on {}:{}", s.index.size(), cfg.host, s.port);
  return std::unique_ptr<Service>(new Service(std::move(impl)));
}

Service::~Service() { Stop(); }

int Service::port() const { return impl_->port; }

void Service::Wait() {
  std::unique_lock<std::mutex> lock(impl_->mu);
  impl_->stopped_cv.wait(lock, [this] { return impl_->stopped; });
}

void Service::Stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace evoqa

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

// Shared helpers for the test binaries.

#ifndef EVOQA_TESTS_FIXTURES_HPP_
#define EVOQA_TESTS_FIXTURES_HPP_

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cstdio>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "evoqa/protocol.hpp"
#include "evoqa/rng.hpp"
#include "evoqa/search.hpp"
#include "httplib.h"
#include "json.hpp"

namespace evoqa::testing {

// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("evoqa-" + tag + "-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline std::string Slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void Spit(const std::filesystem::path& p, const std::string& data) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << data;
}

inline std::vector<nlohmann::json> NdjsonText(const std::string& text) {
  std::vector<nlohmann::json> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(nlohmann::json::parse(line));
  }
  return out;
}

inline std::vector<nlohmann::json> NdjsonLines(const std::filesystem::path& p) {
  return NdjsonText(Slurp(p));
}

// Documents "Doc00".."DocNN", each naming its predecessor, so a title
// search returns the document itself and then its successor.
inline Corpus ChainCorpus(int n) {
  static const char* kWords[] = {"amber", "basalt", "cedar",  "delta",  "ember",
                                 "fjord", "granite", "harbor", "island", "juniper",
                                 "kelp",  "lagoon",  "meadow", "nectar", "orchard"};
  std::vector<Document> docs;
  for (int i = 0; i < n; ++i) {
    char title[16];
    std::snprintf(title, sizeof title, "Doc%02d", i);
    char prev[16];
    std::snprintf(prev, sizeof prev, "Doc%02d", (i + n - 1) % n);
    std::string text = std::string(title) + " is a";
    for (int w = 0; w < 10; ++w) text += std::string(" ") + kWords[(i * 7 + w * 3) % 15];
    text += ". It follows " + std::string(prev) + ".";
    char id[16];
    std::snprintf(id, sizeof id, "d%02d", i);
    docs.push_back({id, title, text});
  }
  return Corpus::FromDocuments(std::move(docs));
}

inline std::string CorpusNdjson(const Corpus& corpus) {
  std::string out;
  for (const auto& d : corpus.documents()) {
    out += nlohmann::json{{"doc_id", d.doc_id}, {"title", d.title}, {"text", d.text}}.dump();
    out += "\n";
  }
  return out;
}

// An httplib server on an ephemeral port running on a background thread.
class FakeServer {
 public:
  FakeServer() = default;
  ~FakeServer() { Stop(); }
  FakeServer(const FakeServer&) = delete;
  FakeServer& operator=(const FakeServer&) = delete;

  httplib::Server& server() { return server_; }

  void Start() {
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  void Stop() {
    if (thread_.joinable()) {
      server_.stop();
      thread_.join();
    }
  }
  int port() const { return port_; }
  std::string url(const std::string& path) const {
    return "http://127.0.0.1:" + std::to_string(port_) + path;
  }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

// A port with nothing listening on it.
// A port that was free a moment ago and has nothing listening on it.
inline int ClosedPort() {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr));
  socklen_t len = sizeof(addr);
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  ::close(fd);
  return ntohs(addr.sin_port);
}

inline std::string Call(const std::string& name, const std::string& query) {
  nlohmann::json j = {{"name", name}, {"arguments", {{"query_list", {query}}}}};
  return "<tool_call>\n" + j.dump() + "\n</tool_call>";
}

inline std::string ToolResponse() { return "<tool_response>\nDoc 1 (Title: \"T\") x\n</tool_response>"; }

// Random transcripts that obey the turn grammar.
inline std::vector<Message> RandomTranscript(Rng& rng) {
  static const char* kPieces[] = {
      "<think> plan </think>", "<answer> 42 </answer>", "<question> why? </question>",
      "plain words", "", "<think> unclosed", "naïve café ünïcode", "<tool_call>{}</tool_call>",
      "  padded  \n\n"};
  std::vector<Message> out;
  if (rng.Bernoulli(0.5)) out.push_back({Role::kSystem, "sys " + std::to_string(rng.Below(100))});
  out.push_back({Role::kUser, "Question: q" + std::to_string(rng.Below(1000))});
  const int assistants = 1 + static_cast<int>(rng.Below(5));
  for (int a = 0; a < assistants; ++a) {
    std::string text;
    const int parts = static_cast<int>(rng.Below(4));
    for (int p = 0; p < parts; ++p) text += kPieces[rng.Below(std::size(kPieces))];
    out.push_back({Role::kAssistant, text});
    if (a + 1 < assistants && rng.Bernoulli(0.7)) out.push_back({Role::kTool, ToolResponse()});
  }
  return out;
}

}  // namespace evoqa::testing

#endif  // EVOQA_TESTS_FIXTURES_HPP_

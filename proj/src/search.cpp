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

#include "evoqa/search.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include "evoqa/error.hpp"
#include "evoqa/text.hpp"
#include "http_client.hpp"
#include "json.hpp"

namespace evoqa {
namespace {

struct Posting {
  std::uint32_t doc = 0;
  std::uint32_t tf = 0;
};

class Fnv1a {
 public:
  void Add(std::string_view s) {
    for (unsigned char c : s) {
      hash_ ^= c;
      hash_ *= 0x100000001b3ULL;
    }
    hash_ ^= 0xff;  // field separator
    hash_ *= 0x100000001b3ULL;
  }
  void Add(std::uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    Add(std::string_view(buf, 8));
  }
  void Add(double v) { Add(std::bit_cast<std::uint64_t>(v)); }
  std::string Hex() const {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(hash_));
    return buf;
  }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

class HttpEmbedder : public Embedder {
 public:
  HttpEmbedder(std::string endpoint, int timeout_ms)
      : endpoint_(std::move(endpoint)), timeout_ms_(timeout_ms) {}

  std::vector<std::vector<double>> Embed(
      std::span<const std::string> inputs) const override {
    nlohmann::json body = {{"inputs", inputs}};
    http::PostOptions opts;
    opts.timeout_ms = timeout_ms_;
    nlohmann::json reply = http::PostJson(endpoint_, body, opts);
    auto it = reply.find("embeddings");
    if (it == reply.end() || !it->is_array() || it->size() != inputs.size()) {
      throw Error(ErrorCode::kContractViolation,
                  "embedder reply must hold one embedding per input");
    }
    try {
      return it->get<std::vector<std::vector<double>>>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kContractViolation,
                  std::string("malformed embeddings: ") + e.what());
    }
  }

 private:
  std::string endpoint_;
  int timeout_ms_;
};

double Cosine(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kContractViolation, "embedding dimensions differ");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::string DocumentText(const Document& d) { return d.title + " " + d.text; }

Document ParseDocument(const nlohmann::json& rec, std::size_t line) {
  if (!rec.is_object()) {
    throw LineError(ErrorCode::kParseError, line, "record is not an object");
  }
  Document d;
  for (auto [field, dest] : {std::pair{"doc_id", &d.doc_id},
                             std::pair{"title", &d.title},
                             std::pair{"text", &d.text}}) {
    auto it = rec.find(field);
    if (it == rec.end() || !it->is_string()) {
      throw LineError(ErrorCode::kParseError, line,
                      std::string("missing string field '") + field + "'");
    }
    *dest = it->get<std::string>();
  }
  if (d.doc_id.empty() || d.title.empty() || d.text.empty()) {
    throw LineError(ErrorCode::kParseError, line,
                    "doc_id, title and text must be non-empty");
  }
  return d;
}

}  // namespace

std::string_view ScorerName(Scorer scorer) {
  return scorer == Scorer::kExternalEmbedding ? "external_embedding" : "lexical";
}

Scorer ParseScorer(std::string_view name) {
  if (name == "lexical") return Scorer::kLexical;
  if (name == "external_embedding") return Scorer::kExternalEmbedding;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown scorer '" + std::string(name) + "'");
}

std::shared_ptr<const Embedder> MakeHttpEmbedder(const std::string& endpoint,
                                                 int timeout_ms) {
  return std::make_shared<HttpEmbedder>(endpoint, timeout_ms);
}

Corpus::Corpus() : docs_(std::make_shared<const std::vector<Document>>()) {}

Corpus Corpus::Parse(std::string_view ndjson) {
  std::vector<Document> docs;
  std::unordered_set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= ndjson.size()) {
    std::size_t end = ndjson.find('\n', pos);
    if (end == std::string_view::npos) end = ndjson.size();
    std::string_view line = ndjson.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (text::Trim(line).empty()) {
      if (end == ndjson.size()) break;
      continue;
    }
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw LineError(ErrorCode::kParseError, line_no, e.what());
    }
    Document d = ParseDocument(rec, line_no);
    if (!seen.insert(d.doc_id).second) {
      throw LineError(ErrorCode::kDuplicateDocId, line_no,
                      "duplicate doc_id '" + d.doc_id + "'");
    }
    docs.push_back(std::move(d));
    if (end == ndjson.size()) break;
  }
  return Corpus(std::make_shared<const std::vector<Document>>(std::move(docs)));
}

Corpus Corpus::Load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open corpus '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return Parse(buf.str());
}

Corpus Corpus::FromDocuments(std::vector<Document> docs) {
  std::unordered_set<std::string> seen;
  for (const auto& d : docs) {
    if (d.doc_id.empty() || d.title.empty() || d.text.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "doc_id, title and text must be non-empty");
    }
    if (!seen.insert(d.doc_id).second) {
      throw Error(ErrorCode::kDuplicateDocId, "duplicate doc_id '" + d.doc_id + "'");
    }
  }
  return Corpus(std::make_shared<const std::vector<Document>>(std::move(docs)));
}

std::string MakeSnippet(std::string_view raw) {
  std::string flat(raw);
  std::replace(flat.begin(), flat.end(), '\n', ' ');
  std::replace(flat.begin(), flat.end(), '\r', ' ');
  std::u32string cps = text::Decode(flat);
  if (cps.size() <= kSnippetChars) return flat;
  std::size_t cut = kSnippetChars;
  // Cut back to the last space if the limit falls inside a word.
  if (cps[cut] != U' ') {
    std::size_t space = cps.rfind(U' ', cut);
    if (space != std::u32string::npos && space > 0) cut = space;
  }
  while (cut > 0 && cps[cut - 1] == U' ') --cut;
  return text::Encode(std::u32string_view(cps).substr(0, cut)) + "...";
}

struct SearchIndex::Impl {
  Corpus corpus;
  IndexConfig cfg;
  std::vector<std::string> snippets;
  std::map<std::string, std::vector<Posting>, std::less<>> postings;
  std::vector<std::uint32_t> doc_len;
  double avgdl = 0.0;
  std::shared_ptr<const Embedder> embedder;
  std::vector<std::vector<double>> doc_vecs;
  std::string digest;
};

SearchIndex SearchIndex::Build(const Corpus& corpus, const IndexConfig& cfg,
                               std::shared_ptr<const Embedder> embedder) {
  if (cfg.top_k < 1) {
    throw Error(ErrorCode::kInvalidArgument, "top_k must be at least 1");
  }
  auto impl = std::make_shared<Impl>();
  impl->corpus = corpus;
  impl->cfg = cfg;
  const auto& docs = corpus.documents();
  impl->snippets.reserve(docs.size());
  for (const auto& d : docs) impl->snippets.push_back(MakeSnippet(d.text));

  Fnv1a digest;
  digest.Add(cfg.k1);
  digest.Add(cfg.b);
  digest.Add(static_cast<std::uint64_t>(cfg.top_k));
  digest.Add(ScorerName(cfg.scorer));
  for (const auto& d : docs) {
    digest.Add(d.doc_id);
    digest.Add(d.title);
    digest.Add(d.text);
  }

  if (cfg.scorer == Scorer::kLexical) {
    std::uint64_t total_len = 0;
    for (std::uint32_t i = 0; i < docs.size(); ++i) {
      std::map<std::string, std::uint32_t> tf;
      const auto tokens = text::Tokenize(DocumentText(docs[i]));
      for (const auto& tok : tokens) ++tf[tok];
      impl->doc_len.push_back(static_cast<std::uint32_t>(tokens.size()));
      total_len += tokens.size();
      for (const auto& [term, count] : tf) {
        impl->postings[term].push_back({i, count});
      }
    }
    if (!docs.empty()) {
      impl->avgdl = static_cast<double>(total_len) / static_cast<double>(docs.size());
    }
    for (const auto& [term, list] : impl->postings) {
      digest.Add(term);
      for (const auto& p : list) {
        digest.Add(static_cast<std::uint64_t>(p.doc));
        digest.Add(static_cast<std::uint64_t>(p.tf));
      }
    }
  } else {
    if (!embedder) {
      if (cfg.embedder_endpoint.empty()) {
        throw Error(ErrorCode::kInvalidArgument,
                    "external_embedding scorer needs an embedder endpoint");
      }
      embedder = MakeHttpEmbedder(cfg.embedder_endpoint);
    }
    impl->embedder = embedder;
    if (!docs.empty()) {
      std::vector<std::string> inputs;
      inputs.reserve(docs.size());
      for (const auto& d : docs) inputs.push_back(DocumentText(d));
      impl->doc_vecs = embedder->Embed(inputs);
      if (impl->doc_vecs.size() != docs.size()) {
        throw Error(ErrorCode::kContractViolation,
                    "embedder returned a wrong number of vectors");
      }
    }
    for (const auto& v : impl->doc_vecs) {
      for (double x : v) digest.Add(x);
    }
  }
  impl->digest = digest.Hex();
  return SearchIndex(std::move(impl));
}

std::vector<SearchResult> SearchIndex::Query(std::string_view query) const {
  return Query(query, impl_->cfg.top_k);
}

std::vector<SearchResult> SearchIndex::Query(std::string_view query,
                                             int top_k) const {
  if (top_k < 1) {
    throw Error(ErrorCode::kInvalidArgument, "top_k must be at least 1");
  }
  const Impl& ix = *impl_;
  const auto& docs = ix.corpus.documents();
  std::vector<std::pair<std::uint32_t, double>> scored;
  if (docs.empty()) return {};

  if (ix.cfg.scorer == Scorer::kLexical) {
    const auto tokens = text::Tokenize(query);
    const std::set<std::string> terms(tokens.begin(), tokens.end());
    std::vector<double> acc(docs.size(), 0.0);
    std::vector<char> hit(docs.size(), 0);
    const double n_docs = static_cast<double>(docs.size());
    const double k1 = ix.cfg.k1;
    const double b = ix.cfg.b;
    for (const auto& term : terms) {
      auto it = ix.postings.find(term);
      if (it == ix.postings.end()) continue;
      const double df = static_cast<double>(it->second.size());
      const double idf = std::log(1.0 + (n_docs - df + 0.5) / (df + 0.5));
      for (const Posting& p : it->second) {
        const double tf = static_cast<double>(p.tf);
        const double dl = static_cast<double>(ix.doc_len[p.doc]);
        const double norm = k1 * (1.0 - b + b * dl / ix.avgdl);
        acc[p.doc] += idf * (tf * (k1 + 1.0)) / (tf + norm);
        hit[p.doc] = 1;
      }
    }
    for (std::uint32_t i = 0; i < docs.size(); ++i) {
      if (hit[i]) scored.emplace_back(i, acc[i]);
    }
  } else {
    const std::string q(query);
    const auto qv = ix.embedder->Embed(std::span<const std::string>(&q, 1));
    if (qv.size() != 1) {
      throw Error(ErrorCode::kContractViolation, "embedder returned no vector");
    }
    for (std::uint32_t i = 0; i < docs.size(); ++i) {
      scored.emplace_back(i, Cosine(qv.front(), ix.doc_vecs[i]));
    }
  }

  auto better = [&](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return docs[a.first].doc_id < docs[b.first].doc_id;
  };
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(top_k),
                                              scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k),
                    scored.end(), better);
  std::vector<SearchResult> out;
  out.reserve(k);
  for (std::size_t r = 0; r < k; ++r) {
    const auto& d = docs[scored[r].first];
    out.push_back({d.doc_id, d.title, ix.snippets[scored[r].first],
                   scored[r].second, static_cast<int>(r + 1)});
  }
  return out;
}

const std::string& SearchIndex::Digest() const { return impl_->digest; }
const IndexConfig& SearchIndex::config() const { return impl_->cfg; }
const Corpus& SearchIndex::corpus() const { return impl_->corpus; }
std::size_t SearchIndex::size() const { return impl_->corpus.size(); }

std::string RenderToolResponse(std::span<const std::vector<SearchResult>> results,
                               std::span<const std::string> queries) {
  if (results.size() != queries.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "results must be parallel to queries");
  }
  std::string out = "<tool_response>\n";
  for (std::size_t q = 0; q < queries.size(); ++q) {
    out += "Query: \"" + queries[q] + "\"\n";
    if (results[q].empty()) {
      out += "No results found.\n";
      continue;
    }
    for (const auto& r : results[q]) {
      out += "Doc " + std::to_string(r.rank) + " (Title: \"" + r.title + "\") " +
             r.snippet + "\n";
    }
  }
  out += "</tool_response>";
  return out;
}

}  // namespace evoqa

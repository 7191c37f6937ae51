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

// Local retrieval over a line-delimited corpus. The default scorer is a
// lexical BM25 ranking over an inverted index; an external embedding service
// can be plugged in instead.

#ifndef EVOQA_SEARCH_HPP_
#define EVOQA_SEARCH_HPP_

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace evoqa {

struct Document {
  std::string doc_id;
  std::string title;
  std::string text;

  bool operator==(const Document&) const = default;
};

// Immutable, cheaply copyable document collection.
class Corpus {
 public:
  Corpus();

  // Line-delimited {doc_id, title, text} records; blank lines are skipped.
  // Throws LineError(kParseError | kDuplicateDocId) or Error(kIoError).
  static Corpus Load(const std::string& path);
  static Corpus Parse(std::string_view ndjson);
  // Throws Error(kDuplicateDocId) or Error(kInvalidArgument) for empty
  // fields.
  static Corpus FromDocuments(std::vector<Document> docs);

  std::size_t size() const { return docs_->size(); }
  bool empty() const { return docs_->empty(); }
  const std::vector<Document>& documents() const { return *docs_; }
  const Document& operator[](std::size_t i) const { return (*docs_)[i]; }

 private:
  explicit Corpus(std::shared_ptr<const std::vector<Document>> docs)
      : docs_(std::move(docs)) {}

  std::shared_ptr<const std::vector<Document>> docs_;
};

enum class Scorer { kLexical, kExternalEmbedding };

std::string_view ScorerName(Scorer scorer);
Scorer ParseScorer(std::string_view name);

struct IndexConfig {
  double k1 = 1.2;
  double b = 0.75;
  int top_k = 3;
  Scorer scorer = Scorer::kLexical;
  // POST {"inputs": [...]} -> {"embeddings": [[...], ...]}; external mode only.
  std::string embedder_endpoint;
};

struct SearchResult {
  std::string doc_id;
  std::string title;
  std::string snippet;
  double score = 0.0;
  int rank = 1;

  bool operator==(const SearchResult&) const = default;
};

// Embedding backend for the external scorer.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::vector<std::vector<double>> Embed(
      std::span<const std::string> inputs) const = 0;
};

std::shared_ptr<const Embedder> MakeHttpEmbedder(const std::string& endpoint,
                                                 int timeout_ms = 30000);

inline constexpr std::size_t kSnippetChars = 320;

// First kSnippetChars code points cut back to a word boundary, with "..."
// appended when the text was shortened.
std::string MakeSnippet(std::string_view text);

// Immutable after Build; safe for any number of concurrent readers.
class SearchIndex {
 public:
  // For Scorer::kExternalEmbedding, `embedder` overrides the HTTP embedder
  // named in cfg.embedder_endpoint.
  static SearchIndex Build(const Corpus& corpus, const IndexConfig& cfg,
                           std::shared_ptr<const Embedder> embedder = nullptr);

  // At most top_k results ranked by score, ties by ascending doc_id. The
  // lexical scorer only returns documents sharing a term with the query.
  // Throws Error(kInvalidArgument) when top_k < 1.
  std::vector<SearchResult> Query(std::string_view query, int top_k) const;
  std::vector<SearchResult> Query(std::string_view query) const;

  // Hex digest of config, documents and index contents.
  const std::string& Digest() const;
  const IndexConfig& config() const;
  const Corpus& corpus() const;
  std::size_t size() const;

 private:
  struct Impl;
  explicit SearchIndex(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

  std::shared_ptr<const Impl> impl_;
};

// One <tool_response> block. Each query gets a `Query: "..."` header line
// followed by `Doc i (Title: "...") snippet` lines in rank order, or
// `No results found.` when it has none. `results` is parallel to `queries`.
std::string RenderToolResponse(std::span<const std::vector<SearchResult>> results,
                               std::span<const std::string> queries);

}  // namespace evoqa

#endif  // EVOQA_SEARCH_HPP_

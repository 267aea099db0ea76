// Copyright 2026 The Corrner Authors.
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

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace corrner {

inline constexpr std::string_view kAnalyzerVersion = "corrner-standard-1";

// Each CJK code point is a term; maximal ASCII alphanumeric runs become one
// lowercased term; everything else separates.
std::vector<std::string> analyze(std::string_view text);

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;

  void validate() const;
  friend bool operator==(const Bm25Params&, const Bm25Params&) = default;
};

struct IndexOptions {
  Bm25Params params;
  std::size_t max_doc_length = 512;  // code points; longer docs truncated
  bool collapse_duplicates = false;  // exact-duplicate texts indexed once
};

struct Posting {
  std::uint32_t doc = 0;
  std::uint32_t tf = 0;

  friend bool operator==(const Posting&, const Posting&) = default;
};

// Immutable in-memory inverted index. Doc ids are dense, in insertion order.
class Index {
 public:
  Index() = default;

  std::size_t doc_count() const { return doc_lens_.size(); }
  double avg_doc_len() const { return avg_doc_len_; }
  const Bm25Params& params() const { return options_.params; }
  const IndexOptions& options() const { return options_; }
  const std::string& analyzer_version() const { return analyzer_version_; }

  std::size_t term_count() const { return postings_.size(); }
  std::span<const Posting> postings(std::string_view term) const;
  std::size_t df(std::string_view term) const { return postings(term).size(); }
  std::uint32_t doc_len(std::uint32_t doc) const { return doc_lens_.at(doc); }
  const std::string& doc_text(std::uint32_t doc) const { return docs_.at(doc); }

  // ln(1 + (N - df + 0.5) / (df + 0.5)); never negative.
  double idf(std::size_t df) const;
  // One term's contribution for a document of length doc_len.
  double term_score(double idf, std::uint32_t tf, std::uint32_t doc_len) const;

  friend bool operator==(const Index& a, const Index& b);

 private:
  friend class IndexBuilder;
  friend Index load_index(const std::string& dir);
  friend void save_index(const Index& index, const std::string& dir,
                         const std::string& config_hash);

  IndexOptions options_;
  std::string analyzer_version_{kAnalyzerVersion};
  std::unordered_map<std::string, std::uint32_t> term_ids_;
  std::vector<std::string> terms_;
  std::vector<std::vector<Posting>> postings_;
  std::vector<std::uint32_t> doc_lens_;
  std::vector<std::string> docs_;
  double avg_doc_len_ = 0.0;
};

// Streaming construction; add() texts then finish().
class IndexBuilder {
 public:
  explicit IndexBuilder(IndexOptions options = {});
  void add(std::string_view text);
  Index finish() &&;

 private:
  Index index_;
  std::unordered_map<std::string, std::uint32_t> seen_texts_;
  std::uint64_t total_len_ = 0;
};

Index build_index(std::span<const std::string> texts,
                  const IndexOptions& options = {});
// Builds from a pool file, one raw text per line.
Index build_index_from_file(const std::string& path,
                            const IndexOptions& options = {});

// BM25 over unique query terms (first occurrence order).
double bm25_score(const Index& index, std::span<const std::string> query_terms,
                  std::uint32_t doc_id);

struct ScoredDoc {
  std::uint32_t doc_id = 0;
  double score = 0.0;
  std::string text;
};

struct RetrievalResult {
  std::string query_id;
  std::vector<ScoredDoc> hits;  // score descending, ties by ascending doc id
};

struct RetrieveOptions {
  std::string query_id;
  // Skip pool documents whose stored text equals the query text.
  bool exclude_verbatim_query = false;
};

RetrievalResult retrieve_topk(const Index& index, std::string_view query_text,
                              std::size_t k, const RetrieveOptions& options = {});

// meta.json + postings.bin + docs.txt. `config_hash` is recorded in meta.
void save_index(const Index& index, const std::string& dir,
                const std::string& config_hash = "");
Index load_index(const std::string& dir);

}  // namespace corrner

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

#include "corrner/retriever.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <queue>

#include "corrner/config.hpp"
#include "corrner/error.hpp"
#include "corrner/utf8.hpp"

namespace corrner {

std::vector<std::string> analyze(std::string_view text) {
  std::vector<std::string> terms;
  std::string run;
  for (char32_t cp : utf8::decode(text)) {
    if (utf8::is_ascii_alnum(cp)) {
      run.push_back(static_cast<char>(cp >= 'A' && cp <= 'Z' ? cp + 32 : cp));
      continue;
    }
    if (!run.empty()) terms.push_back(std::move(run));
    run.clear();
    if (utf8::is_cjk(cp)) {
      std::string term;
      utf8::append(term, cp);
      terms.push_back(std::move(term));
    }
  }
  if (!run.empty()) terms.push_back(std::move(run));
  return terms;
}

void Bm25Params::validate() const {
  if (!(k1 >= 0.0) || !std::isfinite(k1)) {
    throw ConfigError("bm25 k1 must be a finite value >= 0");
  }
  if (!(b >= 0.0 && b <= 1.0)) throw ConfigError("bm25 b must lie in [0, 1]");
}

std::span<const Posting> Index::postings(std::string_view term) const {
  auto it = term_ids_.find(std::string(term));
  if (it == term_ids_.end()) return {};
  return postings_[it->second];
}

double Index::idf(std::size_t df) const {
  const double n = static_cast<double>(doc_count());
  const double d = static_cast<double>(df);
  return std::log(1.0 + (n - d + 0.5) / (d + 0.5));
}

double Index::term_score(double idf, std::uint32_t tf,
                         std::uint32_t doc_len) const {
  const double k1 = options_.params.k1;
  const double b = options_.params.b;
  const double f = static_cast<double>(tf);
  const double norm = k1 * (1.0 - b + b * static_cast<double>(doc_len) / avg_doc_len_);
  return idf * f * (k1 + 1.0) / (f + norm);
}

bool operator==(const Index& a, const Index& b) {
  if (a.options_.params != b.options_.params ||
      a.options_.max_doc_length != b.options_.max_doc_length ||
      a.options_.collapse_duplicates != b.options_.collapse_duplicates ||
      a.analyzer_version_ != b.analyzer_version_ || a.doc_lens_ != b.doc_lens_ ||
      a.docs_ != b.docs_ || a.avg_doc_len_ != b.avg_doc_len_ ||
      a.terms_.size() != b.terms_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.terms_.size(); ++i) {
    auto other = b.postings(a.terms_[i]);
    const auto& mine = a.postings_[i];
    if (!std::equal(mine.begin(), mine.end(), other.begin(), other.end())) {
      return false;
    }
  }
  return true;
}

IndexBuilder::IndexBuilder(IndexOptions options) {
  options.params.validate();
  index_.options_ = options;
}

void IndexBuilder::add(std::string_view raw) {
  std::string text = utf8::truncate(raw, index_.options_.max_doc_length);
  std::replace(text.begin(), text.end(), '\n', ' ');
  std::replace(text.begin(), text.end(), '\r', ' ');
  if (index_.options_.collapse_duplicates) {
    if (!seen_texts_.emplace(text, 0).second) return;
  }
  if (index_.docs_.size() >= UINT32_MAX) throw DataError("index full");
  const auto doc = static_cast<std::uint32_t>(index_.docs_.size());
  const auto terms = analyze(text);

  // Per-document term frequencies in first-occurrence order.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> counts;
  for (const auto& term : terms) {
    auto [it, inserted] = index_.term_ids_.try_emplace(
        term, static_cast<std::uint32_t>(index_.terms_.size()));
    if (inserted) {
      index_.terms_.push_back(term);
      index_.postings_.emplace_back();
    }
    auto c = std::find_if(counts.begin(), counts.end(),
                          [&](const auto& p) { return p.first == it->second; });
    if (c == counts.end()) {
      counts.emplace_back(it->second, 1);
    } else {
      ++c->second;
    }
  }
  for (const auto& [term, tf] : counts) {
    index_.postings_[term].push_back({doc, tf});
  }
  index_.doc_lens_.push_back(static_cast<std::uint32_t>(terms.size()));
  index_.docs_.push_back(std::move(text));
  total_len_ += terms.size();
}

Index IndexBuilder::finish() && {
  const std::size_t n = index_.docs_.size();
  index_.avg_doc_len_ =
      n == 0 ? 0.0 : static_cast<double>(total_len_) / static_cast<double>(n);
  return std::move(index_);
}

Index build_index(std::span<const std::string> texts,
                  const IndexOptions& options) {
  IndexBuilder builder(options);
  for (const auto& t : texts) builder.add(t);
  return std::move(builder).finish();
}

Index build_index_from_file(const std::string& path,
                            const IndexOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open pool " + path);
  IndexBuilder builder(options);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    builder.add(line);
  }
  if (in.bad()) throw DataError("read failed: " + path);
  return std::move(builder).finish();
}

namespace {

std::vector<std::string> unique_terms(std::span<const std::string> terms) {
  std::vector<std::string> out;
  for (const auto& t : terms) {
    if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
  }
  return out;
}

}  // namespace

double bm25_score(const Index& index, std::span<const std::string> query_terms,
                  std::uint32_t doc_id) {
  if (doc_id >= index.doc_count()) {
    throw DataError("unknown doc id " + std::to_string(doc_id));
  }
  double score = 0.0;
  for (const auto& term : unique_terms(query_terms)) {
    const auto plist = index.postings(term);
    auto it = std::lower_bound(
        plist.begin(), plist.end(), doc_id,
        [](const Posting& p, std::uint32_t d) { return p.doc < d; });
    if (it == plist.end() || it->doc != doc_id) continue;
    score += index.term_score(index.idf(plist.size()), it->tf,
                              index.doc_len(doc_id));
  }
  return score;
}

RetrievalResult retrieve_topk(const Index& index, std::string_view query_text,
                              std::size_t k, const RetrieveOptions& options) {
  if (index.analyzer_version() != kAnalyzerVersion) {
    throw VersionMismatchError("index analyzer '" + index.analyzer_version() +
                               "' does not match '" +
                               std::string(kAnalyzerVersion) + "'");
  }
  RetrievalResult result;
  result.query_id = options.query_id;
  if (k == 0 || index.doc_count() == 0) return result;

  struct Cursor {
    std::span<const Posting> list;
    std::size_t pos = 0;
    double idf = 0.0;
  };
  std::vector<Cursor> cursors;
  for (const auto& term : unique_terms(analyze(query_text))) {
    auto plist = index.postings(term);
    if (plist.empty()) continue;
    cursors.push_back({plist, 0, index.idf(plist.size())});
  }

  struct Entry {
    double score;
    std::uint32_t doc;
  };
  // Ranking order: higher score first, then lower doc id. Used as the heap
  // comparator it keeps the weakest kept entry on top.
  auto stronger = [](const Entry& a, const Entry& b) {
    return a.score > b.score || (a.score == b.score && a.doc < b.doc);
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(stronger)> heap(stronger);

  constexpr std::uint32_t kDone = UINT32_MAX;
  for (;;) {
    std::uint32_t doc = kDone;
    for (const auto& c : cursors) {
      if (c.pos < c.list.size()) doc = std::min(doc, c.list[c.pos].doc);
    }
    if (doc == kDone) break;
    double score = 0.0;
    const std::uint32_t len = index.doc_len(doc);
    for (auto& c : cursors) {
      if (c.pos < c.list.size() && c.list[c.pos].doc == doc) {
        score += index.term_score(c.idf, c.list[c.pos].tf, len);
        ++c.pos;
      }
    }
    if (!(score > 0.0)) continue;
    const Entry e{score, doc};
    if (heap.size() == k && !stronger(e, heap.top())) continue;
    if (options.exclude_verbatim_query && index.doc_text(doc) == query_text) {
      continue;
    }
    heap.push(e);
    if (heap.size() > k) heap.pop();
  }

  std::vector<Entry> kept;
  kept.reserve(heap.size());
  while (!heap.empty()) {
    kept.push_back(heap.top());
    heap.pop();
  }
  std::reverse(kept.begin(), kept.end());
  result.hits.reserve(kept.size());
  for (const auto& e : kept) {
    result.hits.push_back({e.doc, e.score, index.doc_text(e.doc)});
  }
  return result;
}

namespace {

constexpr char kPostingsMagic[8] = {'C', 'R', 'N', 'R', 'P', 'O', 'S', 'T'};
constexpr std::uint32_t kPostingsVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  Reader(std::string data, std::string path)
      : data_(std::move(data)), path_(std::move(path)) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i]))
           << (8 * i);
    }
    pos_ += 4;
    return v;
  }

  std::string bytes(std::size_t n) {
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool at_end() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > data_.size()) throw IndexLoadError(path_ + ": truncated");
  }

  std::string data_;
  std::string path_;
  std::size_t pos_ = 0;
};

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IndexLoadError("missing index file " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

void save_index(const Index& index, const std::string& dir,
                const std::string& config_hash) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  std::string bin(kPostingsMagic, sizeof(kPostingsMagic));
  put_u32(bin, kPostingsVersion);
  put_u32(bin, static_cast<std::uint32_t>(index.doc_count()));
  for (std::uint32_t d = 0; d < index.doc_count(); ++d) put_u32(bin, index.doc_len(d));

  Json meta;
  meta["format"] = "corrner-index";
  meta["analyzer_version"] = index.analyzer_version();
  meta["doc_count"] = index.doc_count();
  meta["avg_doc_len"] = index.avg_doc_len();
  meta["params"] = {{"k1", index.params().k1}, {"b", index.params().b}};
  meta["max_doc_length"] = index.options().max_doc_length;
  meta["collapse_duplicates"] = index.options().collapse_duplicates;
  meta["term_count"] = index.term_count();
  stamp(meta, config_hash);

  {
    std::ofstream docs(fs::path(dir) / "docs.txt", std::ios::binary);
    for (std::uint32_t d = 0; d < index.doc_count(); ++d) {
      docs << index.doc_text(d) << '\n';
    }
    if (!docs) throw DataError("cannot write " + dir + "/docs.txt");
  }

  std::vector<std::string> all_terms = index.terms_;
  // Sorted for a byte-stable layout independent of insertion order.
  std::sort(all_terms.begin(), all_terms.end());
  put_u32(bin, static_cast<std::uint32_t>(all_terms.size()));
  for (const auto& t : all_terms) {
    put_u32(bin, static_cast<std::uint32_t>(t.size()));
    bin += t;
    const auto plist = index.postings(t);
    put_u32(bin, static_cast<std::uint32_t>(plist.size()));
    for (const auto& p : plist) {
      put_u32(bin, p.doc);
      put_u32(bin, p.tf);
    }
  }
  {
    std::ofstream out(fs::path(dir) / "postings.bin", std::ios::binary);
    out.write(bin.data(), static_cast<std::streamsize>(bin.size()));
    if (!out) throw DataError("cannot write " + dir + "/postings.bin");
  }
  write_json(meta, (fs::path(dir) / "meta.json").string());
}

Index load_index(const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  if (!fs::is_directory(root)) throw IndexLoadError("no index directory " + dir);
  for (const char* f : {"meta.json", "postings.bin", "docs.txt"}) {
    if (!fs::exists(root / f)) {
      throw IndexLoadError("index " + dir + " is missing " + f);
    }
  }

  Json meta;
  try {
    meta = Json::parse(slurp(root / "meta.json"));
  } catch (const nlohmann::json::exception& e) {
    throw IndexLoadError(dir + "/meta.json: " + e.what());
  }

  Index index;
  try {
    index.analyzer_version_ = meta.at("analyzer_version").get<std::string>();
    index.options_.params.k1 = meta.at("params").at("k1").get<double>();
    index.options_.params.b = meta.at("params").at("b").get<double>();
    index.options_.max_doc_length = meta.at("max_doc_length").get<std::size_t>();
    index.options_.collapse_duplicates = meta.at("collapse_duplicates").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw IndexLoadError(dir + "/meta.json: " + e.what());
  }
  const auto doc_count = meta.value("doc_count", std::size_t{0});

  Reader bin(slurp(root / "postings.bin"), (root / "postings.bin").string());
  if (bin.bytes(8) != std::string(kPostingsMagic, 8)) {
    throw IndexLoadError(dir + "/postings.bin: bad magic");
  }
  if (bin.u32() != kPostingsVersion) {
    throw IndexLoadError(dir + "/postings.bin: unsupported version");
  }
  const std::uint32_t n = bin.u32();
  if (n != doc_count) {
    throw IndexLoadError(dir + ": doc count differs between meta.json and postings.bin");
  }
  std::uint64_t total = 0;
  index.doc_lens_.resize(n);
  for (auto& len : index.doc_lens_) {
    len = bin.u32();
    total += len;
  }
  const std::uint32_t terms = bin.u32();
  index.terms_.reserve(terms);
  index.postings_.reserve(terms);
  for (std::uint32_t t = 0; t < terms; ++t) {
    std::string term = bin.bytes(bin.u32());
    const std::uint32_t count = bin.u32();
    std::vector<Posting> plist(count);
    for (auto& p : plist) {
      p.doc = bin.u32();
      p.tf = bin.u32();
      if (p.doc >= n) throw IndexLoadError(dir + "/postings.bin: doc id out of range");
    }
    index.term_ids_.emplace(term, static_cast<std::uint32_t>(index.terms_.size()));
    index.terms_.push_back(std::move(term));
    index.postings_.push_back(std::move(plist));
  }
  if (!bin.at_end()) throw IndexLoadError(dir + "/postings.bin: trailing bytes");

  std::ifstream docs(root / "docs.txt", std::ios::binary);
  std::string line;
  while (std::getline(docs, line)) index.docs_.push_back(std::move(line));
  if (index.docs_.size() != n) {
    throw IndexLoadError(dir + "/docs.txt: expected " + std::to_string(n) +
                         " documents, found " + std::to_string(index.docs_.size()));
  }
  index.avg_doc_len_ = n == 0 ? 0.0 : static_cast<double>(total) / n;
  return index;
}

}  // namespace corrner

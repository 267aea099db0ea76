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

#include "corrner/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <limits>
#include <numeric>
#include <random>

#include "corrner/error.hpp"
#include "corrner/parallel.hpp"
#include "corrner/pool_tagger.hpp"

namespace corrner {
namespace {

constexpr std::size_t kWholePool = std::numeric_limits<std::size_t>::max();
constexpr std::uint64_t kPoolShuffleSeed = 0x5eed0f9001ULL;

std::uint64_t mix(std::uint64_t seed, double fraction) {
  std::uint64_t bits = 0;
  static_assert(sizeof(bits) == sizeof(fraction));
  std::memcpy(&bits, &fraction, sizeof(bits));
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(bits), static_cast<std::uint32_t>(bits >> 32)};
  std::uint64_t out[1];
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  out[0] = (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
  return out[0];
}

RetrievalResult head(const RetrievalResult& r, std::size_t k) {
  RetrievalResult out;
  out.query_id = r.query_id;
  out.hits.assign(r.hits.begin(), r.hits.begin() + std::min(k, r.hits.size()));
  return out;
}

}  // namespace

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kBaseline: return "baseline";
    case Method::kVoting: return "voting";
    case Method::kCorrelator: return "correlator";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  if (name == "baseline" || name == "crf") return Method::kBaseline;
  if (name == "voting" || name == "entity-voting") return Method::kVoting;
  if (name == "correlator" || name == "correlated") return Method::kCorrelator;
  throw ConfigError("unknown method '" + std::string(name) + "'");
}

Json index_options_to_json(const IndexOptions& o) {
  return {{"k1", o.params.k1},
          {"b", o.params.b},
          {"max_doc_length", o.max_doc_length},
          {"collapse_duplicates", o.collapse_duplicates}};
}

IndexOptions index_options_from_json(const Json& j) {
  check_keys(j, {"k1", "b", "max_doc_length", "collapse_duplicates"}, "index");
  IndexOptions o;
  o.params.k1 = get_or(j, "k1", o.params.k1);
  o.params.b = get_or(j, "b", o.params.b);
  o.max_doc_length = get_or(j, "max_doc_length", o.max_doc_length);
  o.collapse_duplicates = get_or(j, "collapse_duplicates", o.collapse_duplicates);
  o.params.validate();
  return o;
}

BenchmarkData load_benchmark(const std::string& dir) {
  const std::filesystem::path root(dir);
  BenchmarkData d{LabelSet({}, TagScheme::kBIO), {}, {}, {}, {}};
  d.train = read_conll((root / "train.conll").string());
  d.dev = read_conll((root / "dev.conll").string());
  d.test = read_conll((root / "test.conll").string());
  d.pool = read_lines((root / "pool.txt").string());
  std::vector<LabeledSentence> all = d.train;
  all.insert(all.end(), d.dev.begin(), d.dev.end());
  all.insert(all.end(), d.test.begin(), d.test.end());
  d.labels = LabelSet::infer(all, detect_scheme(all));
  return d;
}

std::vector<FeatureTemplate> ExperimentConfig::feature_templates() const {
  if (templates.empty()) return default_templates();
  std::vector<FeatureTemplate> out;
  for (const auto& name : templates) out.push_back(FeatureTemplate::parse(name));
  return out;
}

void ExperimentConfig::validate() const {
  train.validate();
  correlator.validate();
  vote.validate();
  index.params.validate();
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  std::vector<std::uint64_t> sorted = seeds;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ConfigError("seeds must be distinct");
  }
  for (const auto& t : feature_templates()) {
    if (t.kind == TemplateKind::kCorrelation) {
      throw ConfigError("correlation templates are added by the correlator, not listed");
    }
  }
}

Json ExperimentConfig::to_json() const {
  Json ms = Json::array();
  for (Method m : methods) ms.push_back(to_string(m));
  Json ts = Json::array();
  for (const auto& t : feature_templates()) ts.push_back(t.name());
  return {{"train", train.to_json()},         {"correlator", correlator.to_json()},
          {"vote", vote.to_json()},           {"index", index_options_to_json(index)},
          {"templates", ts},                  {"seeds", seeds},
          {"methods", ms}};
}

ExperimentConfig ExperimentConfig::from_json(const Json& j) {
  check_keys(j, {"train", "correlator", "vote", "index", "templates", "seeds", "methods"},
             "experiment");
  ExperimentConfig c = benchmark_defaults();
  if (j.contains("train")) c.train = TrainConfig::from_json(j.at("train"));
  if (j.contains("correlator")) c.correlator = CorrelatorConfig::from_json(j.at("correlator"));
  if (j.contains("vote")) c.vote = VotePolicy::from_json(j.at("vote"));
  if (j.contains("index")) c.index = index_options_from_json(j.at("index"));
  c.templates = get_or(j, "templates", c.templates);
  c.seeds = get_or(j, "seeds", c.seeds);
  if (j.contains("methods")) {
    c.methods.clear();
    for (const auto& m : get_or(j, "methods", std::vector<std::string>{})) {
      c.methods.push_back(parse_method(m));
    }
  }
  c.validate();
  return c;
}

ExperimentConfig benchmark_defaults() {
  ExperimentConfig c;
  c.train.learning_rate = 0.02;
  c.vote.match = SurfaceMatch::kPrefixExtension;
  c.correlator.vote_match = SurfaceMatch::kPrefixExtension;
  return c;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Runner::Runner(BenchmarkData data, ExperimentConfig config)
    : data_(std::move(data)), config_(std::move(config)) {
  config_.validate();
  if (data_.train.empty()) throw ConfigError("benchmark has no training sentences");
  hash_ = corrner::config_hash(config_.to_json());
  for (const auto& s : data_.test) {
    test_sentences_.push_back(s.sentence);
    test_gold_.push_back(gold_spans(s));
  }
}

std::vector<EntitySpan> Runner::gold_spans(const LabeledSentence& s) const {
  return decode_spans(s.sentence.tokens, s.tags, data_.labels.scheme(), DecodeMode::kStrict);
}

EvalReport Runner::score(const std::vector<std::vector<EntitySpan>>& pred) const {
  return entity_prf(test_gold_, pred);
}

std::vector<std::size_t> Runner::subsample(double fraction, std::uint64_t seed) const {
  const std::size_t n = data_.train.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (!(fraction > 0.0)) throw ConfigError("train fraction must be positive");
  if (fraction >= 1.0) return idx;
  const auto count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  if (count < 1) {
    throw ConfigError("train fraction " + std::to_string(fraction) + " of " +
                      std::to_string(n) + " sentences leaves no sentence");
  }
  std::mt19937_64 rng(mix(seed, fraction));
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  return idx;
}

Runner::PoolEntry& Runner::pool_entry(std::optional<std::size_t> pool_size) {
  const std::size_t key =
      pool_size && *pool_size < data_.pool.size() ? *pool_size : kWholePool;
  auto it = pools_.find(key);
  if (it != pools_.end()) return it->second;
  std::vector<std::string> texts;
  if (key == kWholePool) {
    texts = data_.pool;
  } else {
    // Nested subsamples: a prefix of one fixed shuffle of the pool.
    std::vector<std::size_t> order(data_.pool.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(kPoolShuffleSeed);
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[static_cast<std::size_t>(rng() % i)]);
    }
    order.resize(key);
    std::sort(order.begin(), order.end());
    for (std::size_t i : order) texts.push_back(data_.pool[i]);
  }
  PoolEntry entry;
  entry.index = std::make_shared<const Index>(build_index(texts, config_.index));
  return pools_.emplace(key, std::move(entry)).first->second;
}

std::shared_ptr<const Index> Runner::index(std::optional<std::size_t> pool_size) {
  return pool_entry(pool_size).index;
}

const std::vector<RetrievalResult>& Runner::retrievals(PoolEntry& entry, Split split,
                                                       std::size_t depth) {
  auto& cached = entry.retrievals[split];
  if (entry.depth[split] >= depth && !cached.empty()) return cached;
  const auto& source = split == kTrain ? data_.train : (split == kDev ? data_.dev : data_.test);
  cached.assign(source.size(), {});
  const Index& index = *entry.index;
  parallel_for(source.size(), [&](std::size_t i) {
    RetrieveOptions options;
    options.query_id = source[i].sentence.id;
    options.exclude_verbatim_query = true;
    cached[i] = retrieve_topk(index, source[i].sentence.text(), depth, options);
  });
  entry.depth[split] = depth;
  return cached;
}

std::shared_ptr<const CrfModel> Runner::baseline(double fraction, std::uint64_t seed) {
  if (baseline_ && baseline_key_ && baseline_key_->first == fraction &&
      baseline_key_->second == seed) {
    return baseline_;
  }
  baseline_.reset();
  std::vector<LabeledSentence> subset;
  for (std::size_t i : subsample(fraction, seed)) subset.push_back(data_.train[i]);
  TrainConfig tc = config_.train;
  tc.seed = seed;
  baseline_ = std::make_shared<const CrfModel>(
      train({subset, {}}, {data_.dev, {}}, tc, data_.labels, config_.feature_templates()));
  baseline_key_ = {fraction, seed};
  return baseline_;
}

std::map<Method, MethodRun> Runner::run(const RunSpec& spec, std::span<const Method> methods) {
  std::map<Method, MethodRun> out;
  const std::string started = utc_timestamp();
  auto base = baseline(spec.fraction, spec.seed);
  const auto base_tagged = tag(*base, test_sentences_);
  std::vector<std::vector<EntitySpan>> base_spans;
  for (const auto& t : base_tagged) base_spans.push_back(t.spans);

  auto finish = [&](Method m, std::vector<std::vector<EntitySpan>> pred,
                    std::vector<std::vector<std::string>> tags, Json extra) {
    MethodRun r;
    r.report = score(pred);
    r.tags = std::move(tags);
    Json meta = {{"method", to_string(m)},
                 {"seed", spec.seed},
                 {"fraction", spec.fraction},
                 {"config_hash", hash_},
                 {"tool_version", kToolVersion},
                 {"started", started},
                 {"finished", utc_timestamp()}};
    if (spec.pool_size) meta["pool_size"] = *spec.pool_size;
    meta.update(extra);
    r.report.metadata = std::move(meta);
    out[m] = std::move(r);
  };

  for (Method m : methods) {
    if (m == Method::kBaseline) {
      std::vector<std::vector<std::string>> tags;
      for (const auto& t : base_tagged) tags.push_back(t.tags);
      finish(m, base_spans, std::move(tags), Json::object());
    } else if (m == Method::kVoting) {
      VotePolicy policy = config_.vote;
      if (spec.k) policy.k = *spec.k;
      PoolEntry& entry = pool_entry(spec.pool_size);
      const auto& hits = retrievals(entry, kTest, policy.k);
      const PoolTagger pool(*base, *entry.index, policy.memoize);
      std::vector<Calibrated> cal(test_sentences_.size());
      parallel_for(test_sentences_.size(), [&](std::size_t i) {
        cal[i] = calibrate(pool, test_sentences_[i], base_spans[i], head(hits[i], policy.k),
                           policy);
      });
      std::vector<std::vector<EntitySpan>> pred;
      std::vector<std::vector<std::string>> tags;
      std::size_t reassigned = 0;
      for (auto& c : cal) {
        reassigned += c.trace.reassignments.size();
        pred.push_back(std::move(c.spans));
        tags.push_back(std::move(c.tags));
      }
      finish(m, std::move(pred), std::move(tags),
             {{"k", policy.k}, {"match", to_string(policy.match)}, {"reassigned", reassigned}});
    } else {
      CorrelatorConfig cc = config_.correlator;
      if (spec.max_samples) cc.max_samples = *spec.max_samples;
      cc.validate();
      PoolEntry& entry = pool_entry(spec.pool_size);
      const auto depth = static_cast<std::size_t>(cc.max_samples);
      const PoolTagger pool(*base, *entry.index, true);
      auto featurize = [&](Split split, std::span<const std::size_t> rows) {
        const auto& hits = retrievals(entry, split, depth);
        const auto& source =
            split == kTrain ? data_.train : (split == kDev ? data_.dev : data_.test);
        std::vector<CorrelationFeatures> feats(rows.size());
        parallel_for(rows.size(), [&](std::size_t i) {
          feats[i] = correlate(source[rows[i]].sentence, hits[rows[i]], pool, cc);
        });
        return feats;
      };
      auto all_rows = [](std::size_t n) {
        std::vector<std::size_t> r(n);
        std::iota(r.begin(), r.end(), std::size_t{0});
        return r;
      };
      const auto rows = subsample(spec.fraction, spec.seed);
      std::vector<LabeledSentence> subset;
      for (std::size_t i : rows) subset.push_back(data_.train[i]);
      const auto train_feats = featurize(kTrain, rows);
      const auto dev_feats = featurize(kDev, all_rows(data_.dev.size()));
      const auto test_feats = featurize(kTest, all_rows(data_.test.size()));
      TrainConfig tc = config_.train;
      tc.seed = spec.seed;
      CrfModel model = train({subset, train_feats}, {data_.dev, dev_feats}, tc, data_.labels,
                             with_correlation(config_.feature_templates(), cc.channels));
      const auto tagged = tag(model, test_sentences_, test_feats);
      std::vector<std::vector<EntitySpan>> pred;
      std::vector<std::vector<std::string>> tags;
      for (const auto& t : tagged) {
        pred.push_back(t.spans);
        tags.push_back(t.tags);
      }
      finish(m, std::move(pred), std::move(tags), {{"max_samples", cc.max_samples}});
    }
  }
  return out;
}

}  // namespace corrner

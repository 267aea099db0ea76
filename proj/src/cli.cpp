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

#include "corrner/cli.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "corrner/calibrator.hpp"
#include "corrner/config.hpp"
#include "corrner/corpus.hpp"
#include "corrner/correlator.hpp"
#include "corrner/error.hpp"
#include "corrner/evaluator.hpp"
#include "corrner/experiment.hpp"
#include "corrner/metrics.hpp"
#include "corrner/parallel.hpp"
#include "corrner/retriever.hpp"
#include "corrner/synthgen.hpp"
#include "corrner/tagger.hpp"

namespace corrner {
namespace {

namespace fs = std::filesystem;

constexpr std::array<std::string_view, 10> kSubcommands{
    "index", "train", "tag", "calibrate", "eval", "sweep", "synth", "pipeline", "timing", "help"};

// ---------------------------------------------------------------- logging

enum class Level { kError, kWarn, kInfo, kDebug };
Level g_level = Level::kInfo;

Level parse_level(std::string_view name) {
  if (name == "error") return Level::kError;
  if (name == "warn" || name == "warning") return Level::kWarn;
  if (name == "info") return Level::kInfo;
  if (name == "debug") return Level::kDebug;
  throw ConfigError("unknown log level '" + std::string(name) + "'");
}

void log(Level level, const std::string& msg) {
  static constexpr std::array<const char*, 4> kNames{"error", "warn", "info", "debug"};
  if (level > g_level) return;
  std::cerr << "corrner: " << kNames[static_cast<int>(level)] << ": " << msg << '\n';
}

// ---------------------------------------------------------------- helpers

std::string file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Content digest of an input; directories are identified by their metadata file.
std::string input_digest(const std::string& path) {
  if (fs::is_directory(path)) {
    for (const char* name : {"manifest.json", "meta.json"}) {
      const fs::path meta = fs::path(path) / name;
      if (fs::exists(meta)) return sha256_hex(file_bytes(meta.string()));
    }
    throw DataError(path + " has neither manifest.json nor meta.json");
  }
  if (!fs::exists(path)) throw DataError("no such file " + path);
  return sha256_hex(file_bytes(path));
}

std::string step_hash(std::string_view step, const Json& config,
                      std::initializer_list<std::pair<const char*, std::string>> inputs) {
  Json in = Json::object();
  for (const auto& [name, path] : inputs) {
    if (!path.empty()) in[name] = input_digest(path);
  }
  return config_hash({{"step", step}, {"config", config}, {"inputs", in}});
}

void ensure_parent(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

bool skip_current(const std::string& out, const std::string& hash, bool force) {
  if (force || !artifact_current(out, hash)) return false;
  log(Level::kInfo, out + " is up to date (use --force to rebuild)");
  return true;
}

std::vector<Sentence> read_raw(const std::string& path) {
  std::vector<Sentence> out;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto tokens = tokenize_chars(lines[i]);
    if (tokens.empty()) continue;
    out.push_back({std::to_string(i + 1), std::move(tokens)});
  }
  return out;
}

void write_predictions(std::span<const Sentence> sentences,
                       std::span<const std::vector<std::string>> tags, const std::string& path) {
  std::vector<LabeledSentence> out;
  for (std::size_t i = 0; i < sentences.size(); ++i) out.push_back({sentences[i], tags[i]});
  ensure_parent(path);
  write_conll(out, path);
}

Json read_config_or_empty(const std::string& path) {
  return path.empty() ? Json::object() : read_json(path);
}

// ---------------------------------------------------------------- steps

struct IndexBuildArgs {
  std::string pool, out, config;
  bool force = false;
};

void index_build(const IndexBuildArgs& a) {
  const IndexOptions options = index_options_from_json(read_config_or_empty(a.config));
  const std::string hash =
      step_hash("index", index_options_to_json(options), {{"pool", a.pool}});
  if (skip_current(a.out, hash, a.force)) return;
  const Index index = build_index_from_file(a.pool, options);
  save_index(index, a.out, hash);
  log(Level::kInfo, "indexed " + std::to_string(index.doc_count()) + " documents, " +
                        std::to_string(index.term_count()) + " terms -> " + a.out);
}

struct IndexQueryArgs {
  std::string index, text;
  std::size_t k = 10;
  bool exclude_verbatim = false;
};

void index_query(const IndexQueryArgs& a) {
  const Index index = load_index(a.index);
  RetrieveOptions options;
  options.exclude_verbatim_query = a.exclude_verbatim;
  const RetrievalResult r = retrieve_topk(index, a.text, a.k, options);
  Json hits = Json::array();
  for (const auto& h : r.hits) {
    hits.push_back({{"doc_id", h.doc_id}, {"score", h.score}, {"text", h.text}});
  }
  std::cout << Json{{"query", a.text}, {"k", a.k}, {"hits", hits}}.dump(2) << '\n';
}

struct TrainArgs {
  std::string train, dev, config, corr_config, index, out;
  bool correlate = false;
  std::optional<std::uint64_t> seed;
  bool force = false;
};

void train_step(const TrainArgs& a) {
  Json cfg = read_config_or_empty(a.config);
  check_keys(cfg, {"train", "templates", "correlator"}, "train config");
  TrainConfig tc = cfg.contains("train") ? TrainConfig::from_json(cfg.at("train")) : TrainConfig{};
  if (a.seed) tc.seed = *a.seed;
  const auto names = get_or(cfg, "templates", std::vector<std::string>{});
  std::vector<FeatureTemplate> templates;
  for (const auto& n : names) templates.push_back(FeatureTemplate::parse(n));
  if (templates.empty()) templates = default_templates();
  CorrelatorConfig cc = cfg.contains("correlator")
                            ? CorrelatorConfig::from_json(cfg.at("correlator"))
                            : CorrelatorConfig{};
  if (!a.corr_config.empty()) cc = CorrelatorConfig::from_json(read_json(a.corr_config));
  if (a.correlate && a.index.empty()) throw ConfigError("--correlate needs --index");

  Json tnames = Json::array();
  for (const auto& t : templates) tnames.push_back(t.name());
  Json effective = {{"train", tc.to_json()}, {"templates", tnames}, {"correlate", a.correlate}};
  if (a.correlate) effective["correlator"] = cc.to_json();
  const std::string hash =
      step_hash("train", effective,
                {{"train", a.train}, {"dev", a.dev}, {"index", a.correlate ? a.index : ""}});
  if (skip_current(a.out, hash, a.force)) return;

  const auto train_set = read_conll(a.train);
  const auto dev_set = a.dev.empty() ? std::vector<LabeledSentence>{} : read_conll(a.dev);
  std::vector<LabeledSentence> all = train_set;
  all.insert(all.end(), dev_set.begin(), dev_set.end());
  const LabelSet labels = LabelSet::infer(all, detect_scheme(all));
  log(Level::kInfo, "training on " + std::to_string(train_set.size()) + " sentences, " +
                        std::to_string(labels.types().size()) + " types");
  std::optional<CrfModel> model;
  if (a.correlate) {
    const Index index = load_index(a.index);
    model.emplace(train_correlated(train_set, dev_set, tc, labels, index, cc, templates));
  } else {
    model.emplace(train({train_set, {}}, {dev_set, {}}, tc, labels, templates));
  }
  if (!model->training_log.empty()) {
    log(Level::kInfo, "trained " + std::to_string(model->training_log.size()) + " epochs");
  }
  ensure_parent(a.out);
  model->save(a.out, hash);
  log(Level::kInfo, "model -> " + a.out);
}

struct TagArgs {
  std::string model, in, out, index;
  bool force = false;
};

void tag_step(const TagArgs& a) {
  const std::string hash =
      step_hash("tag", Json::object(), {{"model", a.model}, {"in", a.in}, {"index", a.index}});
  if (skip_current(a.out, hash, a.force)) return;
  const CrfModel model = CrfModel::load(a.model);
  std::optional<Index> index;
  if (!a.index.empty()) index.emplace(load_index(a.index));
  const auto sentences = read_raw(a.in);
  const auto tagged = tag_with_correlation(model, index ? &*index : nullptr, sentences);
  std::vector<std::vector<std::string>> tags;
  for (const auto& t : tagged) tags.push_back(t.tags);
  write_predictions(sentences, tags, a.out);
  write_sidecar(a.out, hash, {{"sentences", sentences.size()}});
  log(Level::kInfo, "tagged " + std::to_string(sentences.size()) + " sentences -> " + a.out);
}

struct CalibrateArgs {
  std::string model, index, in, out, trace, config, match;
  std::optional<std::size_t> k;
  bool force = false;
};

void calibrate_step(const CalibrateArgs& a) {
  VotePolicy policy = a.config.empty() ? VotePolicy{} : VotePolicy::from_json(read_json(a.config));
  if (a.k) policy.k = *a.k;
  if (!a.match.empty()) policy.match = parse_surface_match(a.match);
  policy.validate();
  const std::string hash = step_hash("calibrate", policy.to_json(),
                                     {{"model", a.model}, {"index", a.index}, {"in", a.in}});
  if (skip_current(a.out, hash, a.force)) return;
  const CrfModel model = CrfModel::load(a.model);
  const Index index = load_index(a.index);
  const auto sentences = read_raw(a.in);
  const BatchCalibration batch = calibrate_batch(model, index, sentences, policy);
  for (const auto& [i, msg] : batch.errors) {
    log(Level::kWarn, "sentence " + sentences[i].id + ": " + msg);
  }
  std::vector<std::vector<std::string>> tags;
  for (const auto& item : batch.items) tags.push_back(item.tags);
  write_predictions(sentences, tags, a.out);
  if (!a.trace.empty()) {
    ensure_parent(a.trace);
    std::ofstream trace(a.trace);
    if (!trace) throw DataError("cannot write " + a.trace);
    for (std::size_t i = 0; i < batch.items.size(); ++i) {
      for (const auto& r : batch.items[i].trace.reassignments) {
        trace << to_json(r, sentences[i].id).dump() << '\n';
      }
    }
  }
  write_sidecar(a.out, hash, {{"policy", policy.to_json()}, {"stats", batch.stats_json()}});
  log(Level::kInfo, "calibrated " + std::to_string(sentences.size()) + " sentences, " +
                        std::to_string(batch.reassigned) + " of " +
                        std::to_string(batch.spans) + " spans reassigned -> " + a.out);
}

struct EvalArgs {
  std::string gold, pred, report;
  bool force = false;
};

EvalReport eval_step(const EvalArgs& a) {
  const auto gold = read_conll(a.gold);
  const auto pred = read_conll(a.pred);
  std::vector<LabeledSentence> all = gold;
  all.insert(all.end(), pred.begin(), pred.end());
  const TagScheme scheme = detect_scheme(all);
  const std::size_t n = std::min(gold.size(), pred.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (gold[i].sentence.tokens != pred[i].sentence.tokens) {
      throw LengthMismatchError(i, "sentence " + std::to_string(i) +
                                       ": gold and pred tokens differ");
    }
  }
  std::vector<std::vector<EntitySpan>> g, p;
  for (const auto& s : gold) {
    g.push_back(decode_spans(s.sentence.tokens, s.tags, scheme, DecodeMode::kStrict));
  }
  for (const auto& s : pred) {
    p.push_back(decode_spans(s.sentence.tokens, s.tags, scheme, DecodeMode::kLenient));
  }
  EvalReport report = entity_prf(g, p);
  const std::string hash = step_hash("eval", Json::object(), {{"gold", a.gold}, {"pred", a.pred}});
  report.metadata = {{"gold", a.gold}, {"pred", a.pred}, {"scheme", to_string(scheme)},
                     {"sentences", gold.size()}};
  if (!a.report.empty()) {
    Json j = to_json(report);
    stamp(j, hash);
    ensure_parent(a.report);
    write_json(j, a.report);
  }
  const Prf& m = report.micro();
  std::cout << "micro P " << m.precision << " R " << m.recall << " F1 " << m.f1 << "  macro F1 "
            << report.macro.f1 << '\n';
  return report;
}

struct SynthArgs {
  std::string config, out;
  std::optional<std::uint64_t> seed;
  bool force = false;
};

void synth_step(const SynthArgs& a) {
  GenConfig cfg = a.config.empty() ? GenConfig{} : GenConfig::from_json(read_json(a.config));
  if (a.seed) cfg.seed = *a.seed;
  cfg.validate();
  const std::string hash = config_hash(cfg.to_json());
  const fs::path manifest = fs::path(a.out) / "manifest.json";
  if (!a.force && fs::exists(manifest) &&
      read_json(manifest.string()).value("config_hash", std::string()) == hash) {
    log(Level::kInfo, a.out + " is up to date (use --force to rebuild)");
    return;
  }
  const Gazetteer gaz = generate_gazetteer(cfg);
  const SyntheticCorpus corpus = generate_corpus(gaz, cfg);
  write_synthetic(corpus, gaz, cfg, a.out);
  log(Level::kInfo, "synthetic benchmark -> " + a.out + " (" + std::to_string(corpus.train.size()) +
                        "/" + std::to_string(corpus.dev.size()) + "/" +
                        std::to_string(corpus.test.size()) + " labeled, " +
                        std::to_string(corpus.pool.size()) + " pool)");
}

struct SweepArgs {
  std::string axis, config, out;
  bool force = false;
};

std::vector<double> default_axis_values(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kFraction: return {kDefaultFractions.begin(), kDefaultFractions.end()};
    case SweepAxis::kDepth: return {1, 5, 10, 25, 50, 100};
    case SweepAxis::kPool: return {0, 1000, 10000, 100000};
    case SweepAxis::kSamples: return {0, 1, 2, 4, 6, 8, 10};
  }
  return {};
}

void sweep_step(const SweepArgs& a) {
  const SweepAxis axis = parse_axis(a.axis);
  const Json cfg = read_json(a.config);
  check_keys(cfg, {"data", "experiment", "values", "methods"}, "sweep config");
  if (!cfg.contains("data")) throw ConfigError("sweep config needs \"data\" (benchmark dir)");
  const std::string data_dir = cfg.at("data").get<std::string>();
  const ExperimentConfig exp = ExperimentConfig::from_json(cfg.value("experiment", Json::object()));
  const auto values = get_or(cfg, "values", default_axis_values(axis));
  std::vector<Method> methods = exp.methods;
  if (cfg.contains("methods")) {
    methods.clear();
    for (const auto& m : get_or(cfg, "methods", std::vector<std::string>{})) {
      methods.push_back(parse_method(m));
    }
  }
  Json mnames = Json::array();
  for (Method m : methods) mnames.push_back(to_string(m));
  const std::string hash =
      step_hash("sweep",
                {{"axis", to_string(axis)}, {"experiment", exp.to_json()}, {"values", values},
                 {"methods", mnames}},
                {{"data", data_dir}});

  std::optional<SweepResult> previous;
  if (!a.force && fs::exists(a.out)) {
    try {
      SweepResult r = SweepResult::from_json(read_json(a.out));
      if (r.config_hash == hash) previous = std::move(r);
    } catch (const Error& e) {
      log(Level::kWarn, "ignoring unreadable " + a.out + ": " + e.what());
    }
  }
  if (previous && previous->points.size() == values.size()) {
    bool done = true;
    for (std::size_t p = 0; p < previous->points.size(); ++p) done = done && previous->complete(p);
    if (done) {
      log(Level::kInfo, a.out + " is up to date (use --force to rebuild)");
      return;
    }
  }
  if (previous) log(Level::kInfo, "resuming " + a.out);

  auto save = [&](const SweepResult& r) {
    Json j = r.to_json();
    stamp(j, hash);
    ensure_parent(a.out);
    const std::string tmp = a.out + ".tmp";
    write_json(j, tmp);
    fs::rename(tmp, a.out);
  };
  SweepOptions options;
  options.config_hash = hash;
  options.resume = previous ? &*previous : nullptr;
  options.checkpoint = save;
  options.on_run = [&](double value, std::uint64_t seed, const std::map<Method, MethodRun>& runs) {
    std::ostringstream msg;
    msg << to_string(axis) << '=' << value << " seed=" << seed;
    for (const auto& [m, r] : runs) msg << ' ' << to_string(m) << '=' << r.report.micro().f1;
    log(Level::kInfo, msg.str());
  };

  Runner runner(load_benchmark(data_dir), exp);
  std::optional<SweepResult> result;
  switch (axis) {
    case SweepAxis::kFraction:
      result = low_resource_sweep(runner, values, methods, options);
      break;
    case SweepAxis::kDepth: {
      std::vector<std::size_t> ks;
      for (double v : values) ks.push_back(static_cast<std::size_t>(v));
      result = depth_sweep(runner, ks, options);
      break;
    }
    case SweepAxis::kPool: {
      std::vector<std::size_t> sizes;
      for (double v : values) sizes.push_back(static_cast<std::size_t>(v));
      result = pool_sweep(runner, sizes, methods, options);
      break;
    }
    case SweepAxis::kSamples: {
      std::vector<int> counts;
      for (double v : values) counts.push_back(static_cast<int>(v));
      result = sample_count_sweep(runner, counts, options);
      break;
    }
  }
  save(*result);
  for (std::size_t p = 0; p < result->points.size(); ++p) {
    std::cout << to_string(axis) << ' ' << result->points[p].value;
    for (const auto& m : result->methods) {
      const auto f = result->f1(p, m);
      std::cout << "  " << m << ' ' << (f.empty() ? 0.0 : mean(f));
      if (m != "baseline") std::cout << " (p " << result->versus_baseline(p, m).p << ')';
    }
    std::cout << '\n';
  }
}

struct TimingArgs {
  std::string model, correlated, index, in, out;
  std::size_t k = 50;
  std::string match;
};

void timing_step(const TimingArgs& a) {
  const CrfModel base = CrfModel::load(a.model);
  std::optional<CrfModel> corr;
  if (!a.correlated.empty()) corr.emplace(CrfModel::load(a.correlated));
  const Index index = load_index(a.index);
  const auto sentences = read_raw(a.in);
  VotePolicy policy;
  policy.k = a.k;
  if (!a.match.empty()) policy.match = parse_surface_match(a.match);
  std::vector<std::string> methods{"tag", "calibrate", "calibrate-nomemo"};
  if (corr) methods.emplace_back("correlator");
  const auto rows = timing_report(base, corr ? &*corr : nullptr, index, sentences, policy, methods);
  Json j = timing_to_json(rows);
  for (const auto& r : rows) {
    std::cout << r.method << ' ' << r.seconds << " s  " << r.per_sentence_ms << " ms/sentence\n";
  }
  if (!a.out.empty()) {
    stamp(j, step_hash("timing", policy.to_json(), {{"model", a.model}, {"index", a.index}}));
    ensure_parent(a.out);
    write_json(j, a.out);
  }
}

struct PipelineArgs {
  std::string config, out;
  bool force = false;
};

void pipeline_step(const PipelineArgs& a) {
  const Json cfg = read_config_or_empty(a.config);
  check_keys(cfg, {"synth", "experiment"}, "pipeline config");
  const GenConfig gen = GenConfig::from_json(cfg.value("synth", GenConfig{}.to_json()));
  const ExperimentConfig exp = ExperimentConfig::from_json(cfg.value("experiment", Json::object()));
  const fs::path root(a.out);
  fs::create_directories(root);
  auto path = [&](const std::string& name) { return (root / name).string(); };
  auto write_config = [&](const std::string& name, const Json& j) {
    // Rewritten only on change so downstream digests stay stable.
    const std::string p = path(name);
    if (!fs::exists(p) || read_json(p) != j) write_json(j, p);
    return p;
  };

  const std::string data = path("data");
  write_config("synth.json", gen.to_json());
  synth_step({path("synth.json"), data, std::nullopt, a.force});

  const std::string index = path("index");
  index_build({data + "/pool.txt", index, write_config("index.json", index_options_to_json(exp.index)),
               a.force});

  Json tnames = Json::array();
  for (const auto& t : exp.feature_templates()) tnames.push_back(t.name());
  const std::string train_cfg = write_config(
      "train.json",
      {{"train", exp.train.to_json()}, {"templates", tnames}, {"correlator", exp.correlator.to_json()}});
  const std::uint64_t seed = exp.seeds.front();
  train_step({data + "/train.conll", data + "/dev.conll", train_cfg, "", "", path("model.json"),
              false, seed, a.force});
  train_step({data + "/train.conll", data + "/dev.conll", train_cfg, "", index,
              path("model_correlated.json"), true, seed, a.force});

  const std::string test_raw = path("test.txt");
  {
    std::vector<std::string> lines;
    for (const auto& s : read_conll(data + "/test.conll")) lines.push_back(s.sentence.text());
    const std::string text_hash = input_digest(data + "/test.conll");
    if (a.force || !artifact_current(test_raw, text_hash)) {
      write_lines(lines, test_raw);
      write_sidecar(test_raw, text_hash);
    }
  }
  tag_step({path("model.json"), test_raw, path("pred_baseline.conll"), "", a.force});
  const std::string vote_cfg = write_config("vote.json", exp.vote.to_json());
  calibrate_step({path("model.json"), index, test_raw, path("pred_voting.conll"),
                  path("trace_voting.jsonl"), vote_cfg, "", std::nullopt, a.force});
  tag_step({path("model_correlated.json"), test_raw, path("pred_correlator.conll"), index, a.force});

  Json summary = Json::object();
  for (const char* m : {"baseline", "voting", "correlator"}) {
    std::cout << m << ": ";
    const EvalReport r = eval_step({data + "/test.conll", path(std::string("pred_") + m + ".conll"),
                                    path(std::string("report_") + m + ".json"), a.force});
    summary[m] = {{"micro_f1", r.micro().f1}, {"macro_f1", r.macro.f1}};
  }
  stamp(summary, config_hash(cfg));
  write_json(summary, path("summary.json"));
}

// ---------------------------------------------------------------- dispatch

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

int exit_code(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::kUsage: return kExitUsage;
    case ErrorKind::kData: return kExitData;
    case ErrorKind::kInternal: return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace

std::string suggest_subcommand(std::string_view typed) {
  std::string best;
  std::size_t best_d = std::max<std::size_t>(2, typed.size() / 2) + 1;
  for (auto name : kSubcommands) {
    const std::size_t d = edit_distance(typed, name);
    const bool prefix = typed.size() >= 2 && name.substr(0, typed.size()) == typed;
    if (prefix) return std::string(name);
    if (d < best_d) {
      best_d = d;
      best = name;
    }
  }
  return best;
}

int run_cli(int argc, const char* const* argv) {
  if (const char* env = std::getenv("CORRNER_LOG_LEVEL")) {
    try {
      g_level = parse_level(env);
    } catch (const Error& e) {
      std::cerr << "corrner: " << e.what() << '\n';
      return kExitUsage;
    }
  }
  // Unknown subcommands get a suggestion before CLI11 sees them.
  for (int i = 1; i < argc; ++i) {
    const std::string_view arg = argv[i];
    if (arg == "--threads" || arg == "--log-level") {
      ++i;
      continue;
    }
    if (arg.starts_with('-')) continue;
    if (std::find(kSubcommands.begin(), kSubcommands.end(), arg) == kSubcommands.end()) {
      std::cerr << "corrner: unknown subcommand '" << arg << "'";
      const std::string s = suggest_subcommand(arg);
      if (!s.empty()) std::cerr << "; did you mean '" << s << "'?";
      std::cerr << "\nRun 'corrner --help' for the list of subcommands.\n";
      return kExitUsage;
    }
    break;
  }

  CLI::App app{"corrner: retrieval-augmented named entity recognition toolkit", "corrner"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);
  app.fallthrough();
  std::size_t threads = 0;
  std::string level;
  bool force = false;
  app.add_option("--threads", threads, "Worker threads (0: all cores)");
  app.add_option("--log-level", level, "error, warn, info or debug");
  app.add_flag("--force", force, "Rebuild outputs even when up to date");

  auto* index = app.add_subcommand("index", "Build or query a BM25 index");
  index->require_subcommand(1);
  IndexBuildArgs ib;
  auto* index_build_cmd = index->add_subcommand("build", "Index a pool file (one text per line)");
  index_build_cmd->add_option("--pool", ib.pool, "Pool text file")->required();
  index_build_cmd->add_option("--out", ib.out, "Index directory")->required();
  index_build_cmd->add_option("--config", ib.config, "Index options JSON");
  IndexQueryArgs iq;
  auto* index_query_cmd = index->add_subcommand("query", "Top-K retrieval for one text");
  index_query_cmd->add_option("--index", iq.index, "Index directory")->required();
  index_query_cmd->add_option("--text", iq.text, "Query text")->required();
  index_query_cmd->add_option("--k", iq.k, "Number of hits")->capture_default_str();
  index_query_cmd->add_flag("--exclude-verbatim", iq.exclude_verbatim,
                            "Skip documents equal to the query");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train a CRF tagger");
  train_cmd->add_option("--train", tr.train, "Training CoNLL file")->required();
  train_cmd->add_option("--dev", tr.dev, "Development CoNLL file for early stopping");
  train_cmd->add_option("--config", tr.config, "JSON with train, templates, correlator");
  train_cmd->add_option("--out", tr.out, "Model file")->required();
  train_cmd->add_option("--index", tr.index, "Index for correlation features");
  train_cmd->add_flag("--correlate", tr.correlate, "Train with correlation features");
  train_cmd->add_option("--corr-config", tr.corr_config, "Correlator options JSON");
  train_cmd->add_option("--seed", tr.seed, "Training seed");

  TagArgs tg;
  auto* tag_cmd = app.add_subcommand("tag", "Tag raw text (one sentence per line)");
  tag_cmd->add_option("--model", tg.model, "Model file")->required();
  tag_cmd->add_option("--in", tg.in, "Raw text file")->required();
  tag_cmd->add_option("--out", tg.out, "Output CoNLL file")->required();
  tag_cmd->add_option("--index", tg.index, "Index (correlation-augmented models)");

  CalibrateArgs ca;
  std::size_t cal_k = 0;
  auto* cal_cmd = app.add_subcommand("calibrate", "Tag and re-type entities by pool voting");
  cal_cmd->add_option("--model", ca.model, "Model file")->required();
  cal_cmd->add_option("--index", ca.index, "Index directory")->required();
  cal_cmd->add_option("--in", ca.in, "Raw text file")->required();
  cal_cmd->add_option("--out", ca.out, "Output CoNLL file")->required();
  auto* cal_k_opt = cal_cmd->add_option("--k", cal_k, "Retrieved samples per sentence");
  cal_cmd->add_option("--match", ca.match, "exact or prefix-extension");
  cal_cmd->add_option("--trace", ca.trace, "JSONL file of reassignments");
  cal_cmd->add_option("--config", ca.config, "Vote policy JSON");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Entity-level precision, recall and F1");
  eval_cmd->add_option("--gold", ev.gold, "Gold CoNLL file")->required();
  eval_cmd->add_option("--pred", ev.pred, "Predicted CoNLL file")->required();
  eval_cmd->add_option("--report", ev.report, "Report JSON");

  SweepArgs sw;
  auto* sweep_cmd = app.add_subcommand("sweep", "Multi-seed sweep along one axis");
  sweep_cmd->add_option("--axis", sw.axis, "fraction, k, pool or samples")->required();
  sweep_cmd->add_option("--config", sw.config, "Sweep config JSON")->required();
  sweep_cmd->add_option("--out", sw.out, "Result JSON (resumed when present)")->required();

  SynthArgs sy;
  auto* synth_cmd = app.add_subcommand("synth", "Generate the synthetic benchmark");
  synth_cmd->add_option("--config", sy.config, "Generator config JSON");
  synth_cmd->add_option("--out", sy.out, "Output directory")->required();
  synth_cmd->add_option("--seed", sy.seed, "Generator seed");

  PipelineArgs pl;
  auto* pipe_cmd = app.add_subcommand("pipeline", "synth, index, train, tag, calibrate, eval");
  pipe_cmd->add_option("--config", pl.config, "JSON with synth and experiment sections");
  pipe_cmd->add_option("--out", pl.out, "Working directory")->required();

  TimingArgs ti;
  auto* timing_cmd = app.add_subcommand("timing", "Wall-clock tagging time per method");
  timing_cmd->add_option("--model", ti.model, "Plain model file")->required();
  timing_cmd->add_option("--correlated", ti.correlated, "Correlation-augmented model file");
  timing_cmd->add_option("--index", ti.index, "Index directory")->required();
  timing_cmd->add_option("--in", ti.in, "Raw text file")->required();
  timing_cmd->add_option("--k", ti.k, "Voting depth")->capture_default_str();
  timing_cmd->add_option("--match", ti.match, "exact or prefix-extension");
  timing_cmd->add_option("--out", ti.out, "Report JSON");

  std::vector<std::string> help_topic;
  auto* help_cmd = app.add_subcommand("help", "Show help for a subcommand");
  help_cmd->add_option("subcommand", help_topic);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (!level.empty()) g_level = parse_level(level);
    if (app.count("--threads")) set_thread_limit(threads);
    if (help_cmd->parsed()) {
      if (help_topic.empty()) {
        std::cout << app.help();
        return kExitOk;
      }
      CLI::App* target = &app;
      for (const auto& t : help_topic) {
        try {
          target = target->get_subcommand(t);
        } catch (const CLI::OptionNotFound&) {
          std::cerr << "corrner: no help topic '" << t << "'\n";
          return kExitUsage;
        }
      }
      std::cout << target->help();
      return kExitOk;
    }
    if (index_build_cmd->parsed()) {
      ib.force = force;
      index_build(ib);
    } else if (index_query_cmd->parsed()) {
      index_query(iq);
    } else if (train_cmd->parsed()) {
      tr.force = force;
      train_step(tr);
    } else if (tag_cmd->parsed()) {
      tg.force = force;
      tag_step(tg);
    } else if (cal_cmd->parsed()) {
      ca.force = force;
      if (cal_k_opt->count() > 0) ca.k = cal_k;
      calibrate_step(ca);
    } else if (eval_cmd->parsed()) {
      eval_step(ev);
    } else if (sweep_cmd->parsed()) {
      sw.force = force;
      sweep_step(sw);
    } else if (synth_cmd->parsed()) {
      sy.force = force;
      synth_step(sy);
    } else if (pipe_cmd->parsed()) {
      pl.force = force;
      pipeline_step(pl);
    } else if (timing_cmd->parsed()) {
      timing_step(ti);
    }
  } catch (const LengthMismatchError& e) {
    log(Level::kError, std::string(e.what()) + " (sentence index " +
                           std::to_string(e.sentence_index()) + ")");
    return kExitData;
  } catch (const Error& e) {
    log(Level::kError, e.what());
    return exit_code(e);
  } catch (const Json::exception& e) {
    log(Level::kError, std::string("malformed JSON: ") + e.what());
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    log(Level::kError, e.what());
    return kExitData;
  } catch (const std::exception& e) {
    log(Level::kError, std::string("internal error: ") + e.what());
    return kExitInternal;
  }
  return kExitOk;
}

}  // namespace corrner

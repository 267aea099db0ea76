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

#include "corrner/tagger.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "corrner/error.hpp"
#include "corrner/metrics.hpp"
#include "corrner/parallel.hpp"

namespace corrner {

void TrainConfig::validate() const {
  if (epochs <= 0 || batch_size <= 0 || patience <= 0) {
    throw ConfigError("epochs, batch_size and patience must be positive");
  }
  if (!(learning_rate > 0.0) || !(l2 >= 0.0) || !(epsilon > 0.0)) {
    throw ConfigError("learning_rate and epsilon must be positive, l2 non-negative");
  }
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
    throw ConfigError("Adam betas must lie in (0, 1)");
  }
}

Json TrainConfig::to_json() const {
  return {{"epochs", epochs},   {"batch_size", batch_size},
          {"learning_rate", learning_rate},
          {"l2", l2},           {"seed", seed},
          {"patience", patience},
          {"beta1", beta1},     {"beta2", beta2},
          {"epsilon", epsilon}};
}

TrainConfig TrainConfig::from_json(const Json& j) {
  check_keys(j, {"epochs", "batch_size", "learning_rate", "l2", "seed", "patience",
                 "beta1", "beta2", "epsilon"},
             "train");
  TrainConfig c;
  c.epochs = get_or(j, "epochs", c.epochs);
  c.batch_size = get_or(j, "batch_size", c.batch_size);
  c.learning_rate = get_or(j, "learning_rate", c.learning_rate);
  c.l2 = get_or(j, "l2", c.l2);
  c.seed = get_or(j, "seed", c.seed);
  c.patience = get_or(j, "patience", c.patience);
  c.beta1 = get_or(j, "beta1", c.beta1);
  c.beta2 = get_or(j, "beta2", c.beta2);
  c.epsilon = get_or(j, "epsilon", c.epsilon);
  c.validate();
  return c;
}

int FeatureVocabulary::find(const std::string& feature) const {
  auto it = ids_.find(feature);
  return it == ids_.end() ? -1 : it->second;
}

int FeatureVocabulary::add(const std::string& feature) {
  auto [it, inserted] = ids_.try_emplace(feature, static_cast<int>(names_.size()));
  if (inserted) names_.push_back(feature);
  return it->second;
}

CrfModel::CrfModel(LabelSet labels, std::vector<FeatureTemplate> templates)
    : labels_(std::move(labels)), templates_(std::move(templates)) {
  allocate();
}

bool CrfModel::uses_correlation() const {
  return std::any_of(templates_.begin(), templates_.end(), [](const auto& t) {
    return t.kind == TemplateKind::kCorrelation;
  });
}

void CrfModel::allocate() {
  const Eigen::Index f = static_cast<Eigen::Index>(vocabulary_.size());
  const Eigen::Index l = num_labels();
  weights_ = Eigen::VectorXd::Zero(f * l + l * l + 2 * l);
}

namespace {

struct Layout {
  Eigen::Index features;
  Eigen::Index labels;

  Eigen::Index transitions() const { return features * labels; }
  Eigen::Index start() const { return transitions() + labels * labels; }
  Eigen::Index stop() const { return start() + labels; }
};

Layout layout_of(const CrfModel& m) {
  return {static_cast<Eigen::Index>(m.vocabulary().size()), m.num_labels()};
}

}  // namespace

Eigen::Map<const CrfModel::RowMajor> CrfModel::emissions() const {
  const auto lay = layout_of(*this);
  return {weights_.data(), lay.features, lay.labels};
}

Eigen::Map<CrfModel::RowMajor> CrfModel::emissions() {
  const auto lay = layout_of(*this);
  return {weights_.data(), lay.features, lay.labels};
}

Eigen::Map<const Eigen::MatrixXd> CrfModel::transitions() const {
  const auto lay = layout_of(*this);
  return {weights_.data() + lay.transitions(), lay.labels, lay.labels};
}

Eigen::Map<Eigen::MatrixXd> CrfModel::transitions() {
  const auto lay = layout_of(*this);
  return {weights_.data() + lay.transitions(), lay.labels, lay.labels};
}

Eigen::Ref<const Eigen::VectorXd> CrfModel::start() const {
  const auto lay = layout_of(*this);
  return weights_.segment(lay.start(), lay.labels);
}

Eigen::Ref<const Eigen::VectorXd> CrfModel::stop() const {
  const auto lay = layout_of(*this);
  return weights_.segment(lay.stop(), lay.labels);
}

crf::ChainWeights<double> CrfModel::constraint_mask() const {
  const int l = num_labels();
  constexpr double kOff = crf::kNegInf<double>;
  crf::ChainWeights<double> mask{Eigen::MatrixXd::Zero(l, l), Eigen::VectorXd::Zero(l),
                                 Eigen::VectorXd::Zero(l)};
  std::vector<TagParts> parts;
  for (const auto& t : labels_.tags()) parts.push_back(*split_tag(t));
  const bool bioes = labels_.scheme() == TagScheme::kBIOES;
  for (int j = 0; j < l; ++j) {
    const char p = parts[static_cast<std::size_t>(j)].prefix;
    if (p == 'I' || p == 'E') mask.start(j) = kOff;
    if (bioes && (p == 'B' || p == 'I')) mask.stop(j) = kOff;
  }
  for (int i = 0; i < l; ++i) {
    const auto& from = parts[static_cast<std::size_t>(i)];
    const bool inside = from.prefix == 'B' || from.prefix == 'I';
    for (int j = 0; j < l; ++j) {
      const auto& to = parts[static_cast<std::size_t>(j)];
      const bool continues = to.prefix == 'I' || to.prefix == 'E';
      bool ok;
      if (continues) {
        ok = inside && from.type == to.type;
      } else {
        // O, B, S may follow anything except an open BIOES entity.
        ok = !(bioes && inside);
      }
      if (!ok) mask.transitions(i, j) = kOff;
    }
  }
  return mask;
}

crf::ChainWeights<double> CrfModel::chain(bool constrained) const {
  crf::ChainWeights<double> c{transitions(), start(), stop()};
  if (!constrained) return c;
  const auto mask = constraint_mask();
  c.transitions = (mask.transitions.array() < 0).select(mask.transitions, c.transitions);
  c.start = (mask.start.array() < 0).select(mask.start, c.start);
  c.stop = (mask.stop.array() < 0).select(mask.stop, c.stop);
  return c;
}

std::vector<std::vector<int>> CrfModel::featurize(
    std::span<const std::string> tokens, const CorrelationFeatures* correlation,
    bool grow) {
  if (!grow) return std::as_const(*this).featurize(tokens, correlation);
  std::vector<std::vector<int>> out(tokens.size());
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    for (const auto& f : extract_feature_strings(tokens, t, templates_, correlation)) {
      out[t].push_back(vocabulary_.add(f));
    }
  }
  return out;
}

std::vector<std::vector<int>> CrfModel::featurize(
    std::span<const std::string> tokens, const CorrelationFeatures* correlation) const {
  std::vector<std::vector<int>> out(tokens.size());
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    for (const auto& f : extract_feature_strings(tokens, t, templates_, correlation)) {
      const int id = vocabulary_.find(f);
      if (id >= 0) out[t].push_back(id);
    }
  }
  return out;
}

Eigen::MatrixXd CrfModel::emission_scores(
    const std::vector<std::vector<int>>& features) const {
  const auto w = emissions();
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(features.size()),
                                            num_labels());
  for (std::size_t t = 0; t < features.size(); ++t) {
    for (int f : features[t]) e.row(static_cast<Eigen::Index>(t)) += w.row(f);
  }
  return e;
}

std::vector<int> tag_indices(const LabelSet& labels, std::span<const std::string> tags) {
  std::vector<int> out;
  out.reserve(tags.size());
  for (const auto& t : tags) {
    auto idx = labels.index_of(t);
    if (!idx) throw DataError("tag '" + t + "' is not in the label set");
    out.push_back(static_cast<int>(*idx));
  }
  return out;
}

std::vector<int> extract_features(const CrfModel& model,
                                  std::span<const std::string> tokens,
                                  std::size_t position,
                                  const CorrelationFeatures* correlation) {
  std::vector<int> out;
  for (const auto& f :
       extract_feature_strings(tokens, position, model.templates(), correlation)) {
    const int id = model.vocabulary().find(f);
    if (id >= 0) out.push_back(id);
  }
  return out;
}

double log_partition(const CrfModel& model, const Sentence& sentence,
                     const CorrelationFeatures* correlation) {
  if (sentence.tokens.empty()) throw DataError("log_partition of an empty sentence");
  const auto e = model.emission_scores(model.featurize(sentence.tokens, correlation));
  return crf::log_partition(e, model.chain(false));
}

namespace {

// Adds one example's (expected - empirical) counts into `grad` and returns
// its negative log-likelihood.
double accumulate(const CrfModel& model, const crf::ChainWeights<double>& chain,
                  const Example& ex, Eigen::VectorXd& grad) {
  if (ex.gold.empty()) return 0.0;
  const Layout lay = layout_of(model);
  const Eigen::MatrixXd e = model.emission_scores(ex.features);
  const auto m = crf::marginals(e, chain);
  const double gold = crf::path_score<double>(e, chain, ex.gold);

  Eigen::Map<CrfModel::RowMajor> ge(grad.data(), lay.features, lay.labels);
  Eigen::Map<Eigen::MatrixXd> gt(grad.data() + lay.transitions(), lay.labels, lay.labels);
  auto gs = grad.segment(lay.start(), lay.labels);
  auto gp = grad.segment(lay.stop(), lay.labels);

  const std::size_t n = ex.gold.size();
  for (std::size_t t = 0; t < n; ++t) {
    const auto row = m.nodes.row(static_cast<Eigen::Index>(t));
    for (int f : ex.features[t]) {
      ge.row(f) += row;
      ge(f, ex.gold[t]) -= 1.0;
    }
  }
  gt += m.transitions;
  for (std::size_t t = 1; t < n; ++t) gt(ex.gold[t - 1], ex.gold[t]) -= 1.0;
  gs += m.nodes.row(0).transpose();
  gs(ex.gold.front()) -= 1.0;
  gp += m.nodes.row(static_cast<Eigen::Index>(n) - 1).transpose();
  gp(ex.gold.back()) -= 1.0;
  return m.log_z - gold;
}

LossAndGradient penalized(const CrfModel& model, std::span<const Example* const> batch,
                          double l2) {
  LossAndGradient out;
  out.gradient = Eigen::VectorXd::Zero(model.weights().size());
  const auto chain = model.chain(false);
  for (const Example* ex : batch) out.loss += accumulate(model, chain, *ex, out.gradient);
  if (l2 > 0.0) {
    out.loss += 0.5 * l2 * model.weights().squaredNorm();
    out.gradient += l2 * model.weights();
  }
  return out;
}

}  // namespace

LossAndGradient nll_and_gradient(const CrfModel& model, std::span<const Example> batch,
                                 double l2) {
  std::vector<const Example*> ptrs;
  for (const auto& ex : batch) ptrs.push_back(&ex);
  return penalized(model, ptrs, l2);
}

LossAndGradient nll_and_gradient(const CrfModel& model,
                                 std::span<const LabeledSentence> batch, double l2) {
  std::vector<Example> examples;
  for (const auto& s : batch) {
    examples.push_back({model.featurize(s.sentence.tokens, nullptr),
                        tag_indices(model.labels(), s.tags)});
  }
  return nll_and_gradient(model, examples, l2);
}

Decoding viterbi_decode(const CrfModel& model, const Sentence& sentence,
                        bool constrained, const CorrelationFeatures* correlation) {
  Decoding out;
  if (sentence.tokens.empty()) return out;
  const auto e = model.emission_scores(model.featurize(sentence.tokens, correlation));
  const auto best = crf::viterbi(e, model.chain(constrained));
  out.score = best.score;
  for (int label : best.path) {
    out.tags.push_back(model.labels().tag(static_cast<std::size_t>(label)));
  }
  return out;
}

Tagged tag_one(const CrfModel& model, const Sentence& sentence,
               const CorrelationFeatures* correlation) {
  Tagged out;
  out.tags = viterbi_decode(model, sentence, model.constrained_decoding, correlation).tags;
  out.spans = decode_spans(sentence.tokens, out.tags, model.labels().scheme(),
                           DecodeMode::kLenient);
  return out;
}

std::vector<Tagged> tag(const CrfModel& model, std::span<const Sentence> sentences,
                        std::span<const CorrelationFeatures> correlation) {
  if (!correlation.empty() && correlation.size() != sentences.size()) {
    throw DataError("correlation features do not match the sentence batch");
  }
  std::vector<Tagged> out(sentences.size());
  parallel_for(sentences.size(), [&](std::size_t i) {
    out[i] = tag_one(model, sentences[i], correlation.empty() ? nullptr : &correlation[i]);
  });
  return out;
}

namespace {

const CorrelationFeatures* correlation_at(const TrainingSet& set, std::size_t i) {
  if (set.correlation.empty()) return nullptr;
  if (set.correlation.size() != set.sentences.size()) {
    throw DataError("correlation features do not match the training set");
  }
  return &set.correlation[i];
}

double dev_micro_f1(const CrfModel& model, const std::vector<Example>& dev,
                    const std::vector<std::vector<EntitySpan>>& gold) {
  const auto chain = model.chain(model.constrained_decoding);
  std::vector<std::vector<EntitySpan>> pred(dev.size());
  for (std::size_t i = 0; i < dev.size(); ++i) {
    if (dev[i].gold.empty()) continue;
    const auto best = crf::viterbi(model.emission_scores(dev[i].features), chain);
    std::vector<std::string> tags;
    for (int l : best.path) tags.push_back(model.labels().tag(static_cast<std::size_t>(l)));
    pred[i] = decode_spans(tags, model.labels().scheme(), DecodeMode::kLenient);
  }
  return entity_prf(gold, pred).micro().f1;
}

}  // namespace

CrfModel train(const TrainingSet& train_set, const TrainingSet& dev_set,
               const TrainConfig& config, const LabelSet& labels,
               std::vector<FeatureTemplate> templates) {
  config.validate();
  if (train_set.sentences.empty()) throw DataError("empty training set");

  CrfModel model(labels, std::move(templates));
  model.train_config = config;

  std::vector<Example> train_examples;
  train_examples.reserve(train_set.sentences.size());
  for (std::size_t i = 0; i < train_set.sentences.size(); ++i) {
    const auto& s = train_set.sentences[i];
    if (s.tags.size() != s.sentence.tokens.size()) {
      throw DataError("sentence " + s.sentence.id + " has mismatched tags");
    }
    train_examples.push_back({model.featurize(s.sentence.tokens, correlation_at(train_set, i), true),
                              tag_indices(labels, s.tags)});
  }
  model.allocate();

  std::vector<Example> dev_examples;
  std::vector<std::vector<EntitySpan>> dev_gold;
  for (std::size_t i = 0; i < dev_set.sentences.size(); ++i) {
    const auto& s = dev_set.sentences[i];
    dev_examples.push_back({std::as_const(model).featurize(s.sentence.tokens,
                                                           correlation_at(dev_set, i)),
                            tag_indices(labels, s.tags)});
    dev_gold.push_back(decode_spans(s.tags, labels.scheme(), DecodeMode::kStrict));
  }
  std::vector<const Example*> dev_ptrs;
  for (const auto& ex : dev_examples) dev_ptrs.push_back(&ex);

  Eigen::VectorXd m1 = Eigen::VectorXd::Zero(model.weights().size());
  Eigen::VectorXd m2 = Eigen::VectorXd::Zero(model.weights().size());
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(train_examples.size());
  std::iota(order.begin(), order.end(), 0);

  Eigen::VectorXd best = model.weights();
  double best_f1 = -1.0;
  int since_best = 0;
  long step = 0;
  std::vector<const Example*> batch;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t at = 0; at < order.size(); at += config.batch_size) {
      batch.clear();
      const std::size_t end = std::min(order.size(), at + config.batch_size);
      for (std::size_t k = at; k < end; ++k) batch.push_back(&train_examples[order[k]]);
      auto lg = penalized(model, batch, config.l2);
      if (!std::isfinite(lg.loss) || !lg.gradient.allFinite()) {
        throw DivergenceError("non-finite loss at epoch " + std::to_string(epoch) +
                              ", step " + std::to_string(step + 1) +
                              " (loss=" + std::to_string(lg.loss) +
                              ", |w|=" + std::to_string(model.weights().norm()) + ")");
      }
      epoch_loss += lg.loss;
      ++step;
      m1 = config.beta1 * m1 + (1.0 - config.beta1) * lg.gradient;
      m2 = config.beta2 * m2 + (1.0 - config.beta2) * lg.gradient.cwiseAbs2();
      const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
      model.weights().array() -= config.learning_rate * (m1.array() / c1) /
                                 ((m2.array() / c2).sqrt() + config.epsilon);
    }

    EpochLog log{epoch, epoch_loss, 0.0, 0.0};
    if (dev_examples.empty()) {
      best = model.weights();
      model.training_log.push_back(log);
      continue;
    }
    log.dev_loss = penalized(model, dev_ptrs, 0.0).loss;
    log.dev_f1 = dev_micro_f1(model, dev_examples, dev_gold);
    model.training_log.push_back(log);
    if (log.dev_f1 > best_f1) {
      best_f1 = log.dev_f1;
      best = model.weights();
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  model.weights() = best;
  return model;
}

Json CrfModel::to_json() const {
  Json j;
  j["format"] = "corrner-crf";
  j["version"] = 1;
  j["labels"] = {{"types", labels_.types()}, {"scheme", to_string(labels_.scheme())}};
  Json names = Json::array();
  for (const auto& t : templates_) names.push_back(t.name());
  j["templates"] = names;
  j["constrained_decoding"] = constrained_decoding;
  Json vocab = Json::array();
  for (std::size_t i = 0; i < vocabulary_.size(); ++i) {
    vocab.push_back(vocabulary_.name(static_cast<int>(i)));
  }
  j["vocabulary"] = std::move(vocab);

  const auto lay = layout_of(*this);
  std::vector<double> em(weights_.data(), weights_.data() + lay.transitions());
  const Eigen::MatrixXd tr = transitions();
  std::vector<double> trans;
  for (Eigen::Index i = 0; i < lay.labels; ++i) {
    for (Eigen::Index k = 0; k < lay.labels; ++k) trans.push_back(tr(i, k));
  }
  const Eigen::VectorXd s = start(), p = stop();
  j["weights"] = {{"emissions", em},
                  {"transitions", trans},
                  {"start", std::vector<double>(s.data(), s.data() + s.size())},
                  {"stop", std::vector<double>(p.data(), p.data() + p.size())}};
  j["train_config"] = train_config.to_json();
  Json log = Json::array();
  for (const auto& e : training_log) {
    log.push_back({{"epoch", e.epoch},
                   {"loss", e.loss},
                   {"dev_loss", e.dev_loss},
                   {"dev_f1", e.dev_f1}});
  }
  j["training_log"] = std::move(log);
  j["correlator"] = correlator;
  j["base_model"] = base_model ? base_model->to_json() : Json(nullptr);
  return j;
}

CrfModel CrfModel::from_json(const Json& j) {
  try {
    if (j.at("format") != "corrner-crf" || j.at("version") != 1) {
      throw VersionMismatchError("not a corrner-crf v1 model");
    }
    LabelSet labels(j.at("labels").at("types").get<std::vector<std::string>>(),
                    parse_scheme(j.at("labels").at("scheme").get<std::string>()));
    std::vector<FeatureTemplate> templates;
    for (const auto& n : j.at("templates")) {
      templates.push_back(FeatureTemplate::parse(n.get<std::string>()));
    }
    CrfModel model(std::move(labels), std::move(templates));
    model.constrained_decoding = j.at("constrained_decoding").get<bool>();
    for (const auto& f : j.at("vocabulary")) model.vocabulary_.add(f.get<std::string>());
    model.allocate();
    const auto lay = layout_of(model);
    const auto& w = j.at("weights");
    const auto em = w.at("emissions").get<std::vector<double>>();
    const auto trans = w.at("transitions").get<std::vector<double>>();
    const auto s = w.at("start").get<std::vector<double>>();
    const auto p = w.at("stop").get<std::vector<double>>();
    const auto l = static_cast<std::size_t>(lay.labels);
    if (em.size() != static_cast<std::size_t>(lay.transitions()) ||
        trans.size() != l * l || s.size() != l || p.size() != l) {
      throw DataError("model weight arrays do not match vocabulary and label set");
    }
    std::copy(em.begin(), em.end(), model.weights_.data());
    auto tr = model.transitions();
    for (std::size_t i = 0; i < l; ++i) {
      for (std::size_t k = 0; k < l; ++k) {
        tr(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = trans[i * l + k];
      }
    }
    std::copy(s.begin(), s.end(), model.weights_.data() + lay.start());
    std::copy(p.begin(), p.end(), model.weights_.data() + lay.stop());
    model.train_config = TrainConfig::from_json(j.at("train_config"));
    for (const auto& e : j.at("training_log")) {
      model.training_log.push_back({e.at("epoch").get<int>(), e.at("loss").get<double>(),
                                    e.at("dev_loss").get<double>(),
                                    e.at("dev_f1").get<double>()});
    }
    model.correlator = j.value("correlator", Json(nullptr));
    if (j.contains("base_model") && !j.at("base_model").is_null()) {
      model.base_model = std::make_shared<const CrfModel>(from_json(j.at("base_model")));
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid model file: ") + e.what());
  }
}

void CrfModel::save(const std::string& path, const std::string& config_hash) const {
  Json j = to_json();
  stamp(j, config_hash);
  write_json(j, path);
}

CrfModel CrfModel::load(const std::string& path) { return from_json(read_json(path)); }

}  // namespace corrner

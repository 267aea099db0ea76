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

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "corrner/config.hpp"
#include "corrner/corpus.hpp"
#include "corrner/crf_dp.hpp"
#include "corrner/features.hpp"

namespace corrner {

struct TrainConfig {
  int epochs = 30;
  int batch_size = 32;
  double learning_rate = 1e-3;
  double l2 = 1e-6;
  std::uint64_t seed = 1;
  int patience = 5;  // epochs without dev micro-F1 gain before stopping
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
  Json to_json() const;
  static TrainConfig from_json(const Json& j);
};

// Explicit string -> id map; ids are dense in insertion order.
class FeatureVocabulary {
 public:
  int find(const std::string& feature) const;  // -1 when absent
  int add(const std::string& feature);
  std::size_t size() const { return names_.size(); }
  const std::string& name(int id) const { return names_[static_cast<std::size_t>(id)]; }

 private:
  std::unordered_map<std::string, int> ids_;
  std::vector<std::string> names_;
};

struct EpochLog {
  int epoch = 0;
  double loss = 0.0;      // training objective summed over the epoch
  double dev_loss = 0.0;  // unpenalized dev negative log-likelihood
  double dev_f1 = 0.0;
};

// Linear-chain CRF over sparse indicator features. All weights live in one
// flat vector: emissions (features x labels, row-major), then transitions
// (labels x labels, column-major), start scores and stop scores.
class CrfModel {
 public:
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  CrfModel() = default;
  CrfModel(LabelSet labels, std::vector<FeatureTemplate> templates);

  const LabelSet& labels() const { return labels_; }
  const std::vector<FeatureTemplate>& templates() const { return templates_; }
  bool uses_correlation() const;
  int num_labels() const { return static_cast<int>(labels_.size()); }

  FeatureVocabulary& vocabulary() { return vocabulary_; }
  const FeatureVocabulary& vocabulary() const { return vocabulary_; }

  // Sizes the weight vector for the current vocabulary (zero-filled).
  void allocate();
  Eigen::VectorXd& weights() { return weights_; }
  const Eigen::VectorXd& weights() const { return weights_; }

  Eigen::Map<const RowMajor> emissions() const;
  Eigen::Map<const Eigen::MatrixXd> transitions() const;
  Eigen::Map<RowMajor> emissions();
  Eigen::Map<Eigen::MatrixXd> transitions();
  Eigen::Ref<const Eigen::VectorXd> start() const;
  Eigen::Ref<const Eigen::VectorXd> stop() const;

  crf::ChainWeights<double> chain(bool constrained) const;
  // 0 for allowed moves, -1e30 for moves the tag scheme forbids.
  crf::ChainWeights<double> constraint_mask() const;

  // Feature ids per token; unseen features are added when `grow` is set and
  // dropped otherwise.
  std::vector<std::vector<int>> featurize(std::span<const std::string> tokens,
                                          const CorrelationFeatures* correlation,
                                          bool grow);
  std::vector<std::vector<int>> featurize(std::span<const std::string> tokens,
                                          const CorrelationFeatures* correlation) const;

  Eigen::MatrixXd emission_scores(const std::vector<std::vector<int>>& features) const;

  bool constrained_decoding = true;
  TrainConfig train_config;
  std::vector<EpochLog> training_log;
  // Correlator settings and pass-1 model for correlation-augmented models.
  Json correlator = nullptr;
  std::shared_ptr<const CrfModel> base_model;

  Json to_json() const;
  static CrfModel from_json(const Json& j);
  void save(const std::string& path, const std::string& config_hash = "") const;
  static CrfModel load(const std::string& path);

 private:
  LabelSet labels_;
  std::vector<FeatureTemplate> templates_;
  FeatureVocabulary vocabulary_;
  Eigen::VectorXd weights_;
};

// Featurized sentence with gold label indices.
struct Example {
  std::vector<std::vector<int>> features;
  std::vector<int> gold;
};

// Gold label indices; throws DataError for tags outside the label set.
std::vector<int> tag_indices(const LabelSet& labels, std::span<const std::string> tags);

std::vector<int> extract_features(const CrfModel& model,
                                  std::span<const std::string> tokens,
                                  std::size_t position,
                                  const CorrelationFeatures* correlation = nullptr);

double log_partition(const CrfModel& model, const Sentence& sentence,
                     const CorrelationFeatures* correlation = nullptr);

struct LossAndGradient {
  double loss = 0.0;
  Eigen::VectorXd gradient;
};

// Sum over the batch of (log Z - gold score) plus 0.5 * l2 * |w|^2.
LossAndGradient nll_and_gradient(const CrfModel& model, std::span<const Example> batch,
                                 double l2);
LossAndGradient nll_and_gradient(const CrfModel& model,
                                 std::span<const LabeledSentence> batch, double l2);

struct Decoding {
  std::vector<std::string> tags;
  double score = 0.0;
};

Decoding viterbi_decode(const CrfModel& model, const Sentence& sentence,
                        bool constrained,
                        const CorrelationFeatures* correlation = nullptr);

// Sentences with optional per-sentence correlation features (empty span or
// one entry per sentence).
struct TrainingSet {
  std::span<const LabeledSentence> sentences;
  std::span<const CorrelationFeatures> correlation;
};

// Adam on the penalized likelihood; keeps the epoch with the best dev
// micro-F1 (the last epoch when dev is empty).
CrfModel train(const TrainingSet& train_set, const TrainingSet& dev_set,
               const TrainConfig& config, const LabelSet& labels,
               std::vector<FeatureTemplate> templates);

struct Tagged {
  std::vector<std::string> tags;
  std::vector<EntitySpan> spans;  // lenient decode of tags
};

// Decodes with the model's own constraint setting; parallel across sentences.
std::vector<Tagged> tag(const CrfModel& model, std::span<const Sentence> sentences,
                        std::span<const CorrelationFeatures> correlation = {});
Tagged tag_one(const CrfModel& model, const Sentence& sentence,
               const CorrelationFeatures* correlation = nullptr);

}  // namespace corrner

// Copyright 2026 The coqharness Authors.
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

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "coqharness/corpus/corpus.hpp"
#include "coqharness/retriever/features.hpp"

namespace coqharness::retriever {

struct EmbeddingHyper {
  double learning_rate = 0.2;
  int epochs = 40;
  double margin = 0.5;
  std::uint64_t seed = 0;
  std::size_t batch_size = 8;
  std::size_t embed_dim = 64;
  std::size_t feature_dim = kDefaultFeatureDim;

  // Throws HarnessError(kConfigError).
  void validate() const;
  bool operator==(const EmbeddingHyper&) const = default;
};

// max(0, d(a,p) - d(a,n) + margin), d = 1 - cosine (cosine 0 for a zero
// vector). Throws HarnessError(kDimensionMismatch).
double triplet_loss(std::span<const double> anchor, std::span<const double> positive,
                    std::span<const double> negative, double margin);
double triplet_loss(const FeatureVector& anchor, const FeatureVector& positive,
                    const FeatureVector& negative, double margin);

// Linear map W (feature_dim x embed_dim, row-major) applied to the
// L2-normalized feature vector, followed by L2 normalization.
class EmbeddingModel {
 public:
  EmbeddingModel() = default;
  // Seeded uniform initialization with variance 1 / embed_dim.
  static EmbeddingModel initialize(const EmbeddingHyper& hyper, DocumentFrequency df);

  std::size_t feature_dim() const { return hyper_.feature_dim; }
  std::size_t embed_dim() const { return hyper_.embed_dim; }
  const EmbeddingHyper& hyper() const { return hyper_; }
  const DocumentFrequency& document_frequency() const { return df_; }
  const std::vector<double>& weights() const { return weights_; }
  std::vector<double>& mutable_weights() { return weights_; }

  // W^T x / |x|, not normalized; zero for a zero vector.
  std::vector<double> project(const FeatureVector& x) const;
  std::vector<double> embed(const FeatureVector& x) const;
  std::vector<double> embed_text(std::string_view text) const;

  nlohmann::json to_json() const;
  static EmbeddingModel from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static EmbeddingModel load(const std::filesystem::path& path);

  bool operator==(const EmbeddingModel&) const = default;

 private:
  EmbeddingHyper hyper_;
  DocumentFrequency df_;
  std::vector<double> weights_;
};

struct Triple {
  FeatureVector anchor;    // statement of theorem i
  FeatureVector positive;  // proof of theorem i
  FeatureVector negative;  // proof of theorem j != i
  std::size_t positive_source = 0;
  std::size_t negative_source = 0;
};

struct TripletBatch {
  std::vector<Triple> triples;
  double margin = 0.5;

  std::size_t size() const { return triples.size(); }
};

// J = sum of triplet losses over the batch in embedding space.
double batch_objective(const EmbeddingModel& model, const TripletBatch& batch);

// dJ/dW, laid out like EmbeddingModel::weights().
std::vector<double> batch_gradient(const EmbeddingModel& model, const TripletBatch& batch);

struct TrainingSummary {
  // Held-out objective before training, and of the returned weights.
  double initial_objective = 0.0;
  double final_objective = 0.0;
  int best_epoch = 0;  // 0 = initialization
  std::vector<double> epoch_objectives;
  std::size_t validation_triples = 0;
};

// Mini-batch gradient descent on J over (statement_i, proof_i, proof_j)
// with one uniformly sampled negative per anchor per epoch. Returns the
// weights with the lowest held-out objective seen (initialization included).
// Throws HarnessError(kTooFewRecords / kConfigError) and NonFiniteLoss.
EmbeddingModel train_embedding(const std::vector<const corpus::TheoremRecord*>& train,
                               const EmbeddingHyper& hyper,
                               TrainingSummary* summary = nullptr);

}  // namespace coqharness::retriever

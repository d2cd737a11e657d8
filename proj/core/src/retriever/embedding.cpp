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

#include "coqharness/retriever/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "coqharness/common/error.hpp"
#include "coqharness/common/random.hpp"

namespace coqharness::retriever {

namespace {

constexpr std::string_view kFormat = "coqharness-embedding";
constexpr int kVersion = 1;

double norm_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double cosine(std::span<const double> a, std::span<const double> b) {
  double na = norm_of(a), nb = norm_of(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] * b[i];
  return d / (na * nb);
}

// d cos(u, v) / du, accumulated into out with the given factor.
void add_cosine_grad(std::span<const double> u, std::span<const double> v, double factor,
                     std::vector<double>& out) {
  double nu = norm_of(u), nv = norm_of(v);
  if (nu == 0.0 || nv == 0.0) return;
  double c = cosine(u, v);
  for (std::size_t e = 0; e < u.size(); ++e) {
    out[e] += factor * (v[e] / nv - c * u[e] / nu) / nu;
  }
}

bool all_finite(const std::vector<double>& w) {
  return std::all_of(w.begin(), w.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

void EmbeddingHyper::validate() const {
  if (!(learning_rate >= 0.0)) throw HarnessError(ErrorCode::kConfigError, "learning_rate must be >= 0");
  if (epochs < 0) throw HarnessError(ErrorCode::kConfigError, "epochs must be >= 0");
  if (!(margin > 0.0)) throw HarnessError(ErrorCode::kConfigError, "margin must be > 0");
  if (batch_size == 0) throw HarnessError(ErrorCode::kConfigError, "batch_size must be >= 1");
  if (embed_dim == 0 || feature_dim == 0) {
    throw HarnessError(ErrorCode::kConfigError, "dimensions must be >= 1");
  }
}

double triplet_loss(std::span<const double> anchor, std::span<const double> positive,
                    std::span<const double> negative, double margin) {
  if (anchor.size() != positive.size() || anchor.size() != negative.size()) {
    throw HarnessError(ErrorCode::kDimensionMismatch, "triplet vectors differ in dimension");
  }
  double d_ap = 1.0 - cosine(anchor, positive);
  double d_an = 1.0 - cosine(anchor, negative);
  return std::max(0.0, d_ap - d_an + margin);
}

double triplet_loss(const FeatureVector& anchor, const FeatureVector& positive,
                    const FeatureVector& negative, double margin) {
  if (anchor.dim() != positive.dim() || anchor.dim() != negative.dim()) {
    throw HarnessError(ErrorCode::kDimensionMismatch, "triplet vectors differ in dimension");
  }
  auto cos = [](const FeatureVector& a, const FeatureVector& b) {
    if (a.is_zero() || b.is_zero()) return 0.0;
    return dot(a, b) / (a.norm() * b.norm());
  };
  return std::max(0.0, (1.0 - cos(anchor, positive)) - (1.0 - cos(anchor, negative)) + margin);
}

EmbeddingModel EmbeddingModel::initialize(const EmbeddingHyper& hyper, DocumentFrequency df) {
  hyper.validate();
  if (df.dim() != hyper.feature_dim) {
    throw HarnessError(ErrorCode::kDimensionMismatch,
                       "document frequency table and model disagree on feature_dim");
  }
  EmbeddingModel m;
  m.hyper_ = hyper;
  m.df_ = std::move(df);
  m.weights_.resize(hyper.feature_dim * hyper.embed_dim);
  DeterministicRng rng(derive_seed(hyper.seed, "embedding-init"));
  const double a = std::sqrt(3.0 / static_cast<double>(hyper.embed_dim));
  for (double& w : m.weights_) w = rng.uniform(-a, a);
  return m;
}

std::vector<double> EmbeddingModel::project(const FeatureVector& x) const {
  const std::size_t dim = embed_dim();
  std::vector<double> u(dim, 0.0);
  if (x.is_zero()) return u;
  if (x.dim() != feature_dim()) {
    throw HarnessError(ErrorCode::kDimensionMismatch, "feature vector has the wrong dimension");
  }
  for (const auto& [f, w] : x.entries()) {
    const double xf = w / x.norm();
    const double* row = &weights_[static_cast<std::size_t>(f) * dim];
    for (std::size_t e = 0; e < dim; ++e) u[e] += xf * row[e];
  }
  return u;
}

std::vector<double> EmbeddingModel::embed(const FeatureVector& x) const {
  auto u = project(x);
  double n = norm_of(u);
  if (n > 0.0) {
    for (double& v : u) v /= n;
  }
  return u;
}

std::vector<double> EmbeddingModel::embed_text(std::string_view text) const {
  return embed(featurize(text, df_));
}

nlohmann::json EmbeddingModel::to_json() const {
  nlohmann::json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["hyper"] = {{"learning_rate", hyper_.learning_rate},
                {"epochs", hyper_.epochs},
                {"margin", hyper_.margin},
                {"seed", hyper_.seed},
                {"batch_size", hyper_.batch_size},
                {"embed_dim", hyper_.embed_dim},
                {"feature_dim", hyper_.feature_dim}};
  j["document_frequency"] = df_.to_json();
  j["weights"] = weights_;
  return j;
}

EmbeddingModel EmbeddingModel::from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != kFormat || j.at("version").get<int>() != kVersion) {
      throw HarnessError(ErrorCode::kSchemaViolation, "not a version 1 embedding model");
    }
    EmbeddingModel m;
    const auto& h = j.at("hyper");
    m.hyper_.learning_rate = h.at("learning_rate").get<double>();
    m.hyper_.epochs = h.at("epochs").get<int>();
    m.hyper_.margin = h.at("margin").get<double>();
    m.hyper_.seed = h.at("seed").get<std::uint64_t>();
    m.hyper_.batch_size = h.at("batch_size").get<std::size_t>();
    m.hyper_.embed_dim = h.at("embed_dim").get<std::size_t>();
    m.hyper_.feature_dim = h.at("feature_dim").get<std::size_t>();
    m.df_ = DocumentFrequency::from_json(j.at("document_frequency"));
    m.weights_ = j.at("weights").get<std::vector<double>>();
    if (m.weights_.size() != m.hyper_.feature_dim * m.hyper_.embed_dim) {
      throw HarnessError(ErrorCode::kSchemaViolation, "weight matrix has the wrong size");
    }
    if (!all_finite(m.weights_)) {
      throw HarnessError(ErrorCode::kSchemaViolation, "weight matrix has non-finite entries");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw HarnessError(ErrorCode::kSchemaViolation, std::string("embedding model: ") + e.what());
  }
}

void EmbeddingModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw HarnessError(ErrorCode::kIoError, "cannot write " + path.string());
  out << to_json().dump() << '\n';
}

EmbeddingModel EmbeddingModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw HarnessError(ErrorCode::kIoError, "cannot read " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw HarnessError(ErrorCode::kSchemaViolation, std::string("embedding model: ") + e.what());
  }
}

double batch_objective(const EmbeddingModel& model, const TripletBatch& batch) {
  double j = 0.0;
  for (const auto& t : batch.triples) {
    auto a = model.project(t.anchor);
    auto p = model.project(t.positive);
    auto n = model.project(t.negative);
    j += triplet_loss(a, p, n, batch.margin);
  }
  return j;
}

std::vector<double> batch_gradient(const EmbeddingModel& model, const TripletBatch& batch) {
  const std::size_t dim = model.embed_dim();
  std::vector<double> grad(model.weights().size(), 0.0);
  std::vector<double> ga(dim), gp(dim), gn(dim);
  auto scatter = [&](const FeatureVector& x, const std::vector<double>& g) {
    if (x.is_zero()) return;
    for (const auto& [f, w] : x.entries()) {
      const double xf = w / x.norm();
      double* row = &grad[static_cast<std::size_t>(f) * dim];
      for (std::size_t e = 0; e < dim; ++e) row[e] += xf * g[e];
    }
  };
  for (const auto& t : batch.triples) {
    auto a = model.project(t.anchor);
    auto p = model.project(t.positive);
    auto n = model.project(t.negative);
    if (triplet_loss(a, p, n, batch.margin) <= 0.0) continue;
    std::fill(ga.begin(), ga.end(), 0.0);
    std::fill(gp.begin(), gp.end(), 0.0);
    std::fill(gn.begin(), gn.end(), 0.0);
    // L = cos(a,n) - cos(a,p) + margin on the active side of the hinge.
    add_cosine_grad(a, p, -1.0, ga);
    add_cosine_grad(a, n, 1.0, ga);
    add_cosine_grad(p, a, -1.0, gp);
    add_cosine_grad(n, a, 1.0, gn);
    scatter(t.anchor, ga);
    scatter(t.positive, gp);
    scatter(t.negative, gn);
  }
  return grad;
}

EmbeddingModel train_embedding(const std::vector<const corpus::TheoremRecord*>& train,
                               const EmbeddingHyper& hyper, TrainingSummary* summary) {
  hyper.validate();
  const std::size_t n = train.size();
  if (n < 2) {
    throw HarnessError(ErrorCode::kTooFewRecords,
                       "embedding training needs at least 2 records, have " + std::to_string(n));
  }
  std::vector<std::string> statements, proofs;
  for (const auto* r : train) {
    statements.push_back(r->statement.text);
    proofs.push_back(r->proof_text());
  }
  DocumentFrequency df(hyper.feature_dim);
  for (std::size_t i = 0; i < n; ++i) {
    df.add_document(statements[i]);
    df.add_document(proofs[i]);
  }
  std::vector<FeatureVector> anchors, positives;
  for (std::size_t i = 0; i < n; ++i) {
    anchors.push_back(featurize(statements[i], df));
    positives.push_back(featurize(proofs[i], df));
  }

  // Larger sets hold out a fifth of the anchors; small ones validate on a
  // fixed triple set over every record instead.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::vector<std::size_t> train_anchors = order, validation_anchors = order;
  if (n >= 20) {
    DeterministicRng holdout(derive_seed(hyper.seed, "embedding-holdout"));
    holdout.shuffle(order);
    const std::size_t held = static_cast<std::size_t>(std::llround(0.2 * static_cast<double>(n)));
    validation_anchors.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(held));
    train_anchors.assign(order.begin() + static_cast<std::ptrdiff_t>(held), order.end());
    std::sort(validation_anchors.begin(), validation_anchors.end());
    std::sort(train_anchors.begin(), train_anchors.end());
  }

  auto make_triple = [&](std::size_t i, DeterministicRng& rng) {
    std::size_t j = static_cast<std::size_t>(rng.uniform_index(n - 1));
    if (j >= i) ++j;
    return Triple{anchors[i], positives[i], positives[j], i, j};
  };

  TripletBatch validation;
  validation.margin = hyper.margin;
  {
    DeterministicRng rng(derive_seed(hyper.seed, "embedding-validation"));
    for (std::size_t i : validation_anchors) validation.triples.push_back(make_triple(i, rng));
  }

  EmbeddingModel model = EmbeddingModel::initialize(hyper, df);
  EmbeddingModel best = model;
  double best_j = batch_objective(model, validation);
  TrainingSummary local;
  local.initial_objective = best_j;
  local.validation_triples = validation.size();

  DeterministicRng rng(derive_seed(hyper.seed, "embedding-negatives"));
  for (int epoch = 1; epoch <= hyper.epochs; ++epoch) {
    std::vector<std::size_t> epoch_order = train_anchors;
    rng.shuffle(epoch_order);
    for (std::size_t start = 0; start < epoch_order.size(); start += hyper.batch_size) {
      TripletBatch batch;
      batch.margin = hyper.margin;
      const std::size_t stop = std::min(epoch_order.size(), start + hyper.batch_size);
      for (std::size_t k = start; k < stop; ++k) {
        batch.triples.push_back(make_triple(epoch_order[k], rng));
      }
      auto grad = batch_gradient(model, batch);
      const double step = hyper.learning_rate / static_cast<double>(batch.size());
      auto& w = model.mutable_weights();
      for (std::size_t k = 0; k < w.size(); ++k) {
        if (grad[k] != 0.0) w[k] -= step * grad[k];
      }
    }
    double j = all_finite(model.weights()) ? batch_objective(model, validation)
                                           : std::numeric_limits<double>::quiet_NaN();
    if (!std::isfinite(j)) throw NonFiniteLoss(epoch);
    local.epoch_objectives.push_back(j);
    if (j < best_j) {
      best_j = j;
      best = model;
      local.best_epoch = epoch;
    }
  }
  local.final_objective = best_j;
  if (summary) *summary = local;
  return best;
}

}  // namespace coqharness::retriever

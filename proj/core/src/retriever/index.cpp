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

#include "coqharness/retriever/index.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "coqharness/common/error.hpp"

namespace coqharness::retriever {

namespace {

constexpr std::string_view kFormat = "coqharness-index";
constexpr int kVersion = 1;

std::string field_text(const corpus::TheoremRecord& r, IndexSpace space) {
  return space == IndexSpace::kProofText ? r.proof_text() : r.statement.text;
}

std::vector<ScoredId> top_k(std::vector<ScoredId> scored, std::size_t k) {
  auto better = [](const ScoredId& a, const ScoredId& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  };
  k = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k),
                    scored.end(), better);
  scored.resize(k);
  return scored;
}

}  // namespace

std::string_view index_space_name(IndexSpace space) {
  return space == IndexSpace::kProofText ? "proof_text" : "statement_text";
}

std::optional<IndexSpace> parse_index_space(std::string_view name) {
  if (name == "proof_text") return IndexSpace::kProofText;
  if (name == "statement_text") return IndexSpace::kStatementText;
  return std::nullopt;
}

Index Index::build(const std::vector<const corpus::TheoremRecord*>& train, IndexSpace space,
                   std::size_t feature_dim) {
  if (train.empty()) throw HarnessError(ErrorCode::kEmptyTrainSet, "cannot index an empty train set");
  Index index;
  index.space_ = space;
  index.df_ = DocumentFrequency(feature_dim);
  for (const auto* r : train) {
    index.entries_.push_back(IndexEntry{r->id, field_text(*r, space), {}});
    index.df_.add_document(index.entries_.back().text);
  }
  for (auto& e : index.entries_) e.vector = featurize(e.text, index.df_);
  return index;
}

const IndexEntry* Index::find(std::string_view id) const {
  for (const auto& e : entries_) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

nlohmann::json Index::to_json() const {
  nlohmann::json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["space"] = index_space_name(space_);
  j["feature_dim"] = df_.dim();
  j["entries"] = nlohmann::json::array();
  for (const auto& e : entries_) j["entries"].push_back({{"id", e.id}, {"text", e.text}});
  return j;
}

// Vectors and the DF table are recomputed from the stored texts.
Index Index::from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != kFormat || j.at("version").get<int>() != kVersion) {
      throw HarnessError(ErrorCode::kSchemaViolation, "not a version 1 index");
    }
    auto space = parse_index_space(j.at("space").get<std::string>());
    if (!space) throw HarnessError(ErrorCode::kSchemaViolation, "unknown index space");
    Index index;
    index.space_ = *space;
    index.df_ = DocumentFrequency(j.at("feature_dim").get<std::size_t>());
    for (const auto& e : j.at("entries")) {
      index.entries_.push_back(
          IndexEntry{e.at("id").get<std::string>(), e.at("text").get<std::string>(), {}});
      index.df_.add_document(index.entries_.back().text);
    }
    if (index.entries_.empty()) throw HarnessError(ErrorCode::kEmptyTrainSet, "index has no entries");
    for (auto& e : index.entries_) e.vector = featurize(e.text, index.df_);
    return index;
  } catch (const nlohmann::json::exception& e) {
    throw HarnessError(ErrorCode::kSchemaViolation, std::string("index: ") + e.what());
  }
}

void Index::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw HarnessError(ErrorCode::kIoError, "cannot write " + path.string());
  out << to_json().dump(1) << '\n';
}

Index Index::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw HarnessError(ErrorCode::kIoError, "cannot read " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw HarnessError(ErrorCode::kSchemaViolation, std::string("index: ") + e.what());
  }
}

std::vector<std::vector<double>> LinearEmbedder::embed(const std::vector<std::string>& texts) const {
  std::vector<std::vector<double>> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(model_.embed_text(t));
  return out;
}

EmbeddedIndex::EmbeddedIndex(const Index& index, const TextEmbedder& embedder)
    : embedder_(embedder) {
  std::vector<std::string> texts;
  for (const auto& e : index.entries()) texts.push_back(e.text);
  vectors_ = embedder.embed(texts);
  if (vectors_.size() != texts.size()) {
    throw HarnessError(ErrorCode::kDimensionMismatch, "embedder returned the wrong number of vectors");
  }
}

double dense_cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw HarnessError(ErrorCode::kDimensionMismatch, "vectors differ in dimension");
  }
  double d = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return d / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<ScoredId> retrieve(const Index& index, std::string_view query_text, std::size_t k,
                               const RetrieveOptions& options) {
  if (k == 0) return {};
  std::vector<ScoredId> scored;
  const auto& entries = index.entries();
  if (options.embedded) {
    auto q = options.embedded->embedder().embed({std::string(query_text)});
    if (q.size() != 1) {
      throw HarnessError(ErrorCode::kDimensionMismatch, "embedder returned no query vector");
    }
    const auto& vectors = options.embedded->vectors();
    if (vectors.size() != entries.size()) {
      throw HarnessError(ErrorCode::kDimensionMismatch, "embedded index does not match index");
    }
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (options.exclude_id && entries[i].id == *options.exclude_id) continue;
      scored.push_back(ScoredId{entries[i].id, dense_cosine(q[0], vectors[i])});
    }
  } else {
    auto q = featurize(query_text, index.document_frequency());
    for (const auto& e : entries) {
      if (options.exclude_id && e.id == *options.exclude_id) continue;
      scored.push_back(ScoredId{e.id, similarity(q, e.vector)});
    }
  }
  return top_k(std::move(scored), k);
}

std::vector<ScoredId> retrieve(const Index& index, const corpus::TheoremRecord& query,
                               std::size_t k, const EmbeddedIndex* embedded) {
  RetrieveOptions options;
  options.exclude_id = query.id;
  options.embedded = embedded;
  return retrieve(index, query.statement.text, k, options);
}

}  // namespace coqharness::retriever

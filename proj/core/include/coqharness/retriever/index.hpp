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

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "coqharness/corpus/corpus.hpp"
#include "coqharness/retriever/embedding.hpp"
#include "coqharness/retriever/features.hpp"

namespace coqharness::retriever {

enum class IndexSpace { kProofText, kStatementText };

std::string_view index_space_name(IndexSpace space);
std::optional<IndexSpace> parse_index_space(std::string_view name);

struct IndexEntry {
  std::string id;
  std::string text;  // the indexed field
  FeatureVector vector;

  bool operator==(const IndexEntry&) const = default;
};

class Index {
 public:
  // Throws HarnessError(kEmptyTrainSet).
  static Index build(const std::vector<const corpus::TheoremRecord*>& train,
                     IndexSpace space = IndexSpace::kProofText,
                     std::size_t feature_dim = kDefaultFeatureDim);

  IndexSpace space() const { return space_; }
  std::size_t size() const { return entries_.size(); }
  const std::vector<IndexEntry>& entries() const { return entries_; }
  const DocumentFrequency& document_frequency() const { return df_; }
  const IndexEntry* find(std::string_view id) const;

  nlohmann::json to_json() const;
  static Index from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static Index load(const std::filesystem::path& path);

  bool operator==(const Index&) const = default;

 private:
  IndexSpace space_ = IndexSpace::kProofText;
  DocumentFrequency df_;
  std::vector<IndexEntry> entries_;
};

// Maps texts to dense vectors for embedded retrieval.
class TextEmbedder {
 public:
  virtual ~TextEmbedder() = default;
  virtual std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) const = 0;
};

class LinearEmbedder final : public TextEmbedder {
 public:
  explicit LinearEmbedder(const EmbeddingModel& model) : model_(model) {}
  std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) const override;

 private:
  const EmbeddingModel& model_;
};

// Index entries embedded once, for repeated embedded-mode queries.
class EmbeddedIndex {
 public:
  EmbeddedIndex(const Index& index, const TextEmbedder& embedder);

  const TextEmbedder& embedder() const { return embedder_; }
  const std::vector<std::vector<double>>& vectors() const { return vectors_; }

 private:
  const TextEmbedder& embedder_;
  std::vector<std::vector<double>> vectors_;
};

struct ScoredId {
  std::string id;
  double score = 0.0;

  bool operator==(const ScoredId&) const = default;
};

struct RetrieveOptions {
  std::optional<std::string> exclude_id;
  // Embedded mode when set: scores are cosines in embedding space.
  const EmbeddedIndex* embedded = nullptr;
};

// Top-k by descending score, ties by ascending id.
std::vector<ScoredId> retrieve(const Index& index, std::string_view query_text,
                               std::size_t k, const RetrieveOptions& options = {});

// Queries with the record's statement and never returns the record itself.
std::vector<ScoredId> retrieve(const Index& index, const corpus::TheoremRecord& query,
                               std::size_t k, const EmbeddedIndex* embedded = nullptr);

// Cosine of dense vectors, 0 when either is zero. Throws kDimensionMismatch.
double dense_cosine(std::span<const double> a, std::span<const double> b);

}  // namespace coqharness::retriever

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
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace coqharness::retriever {

inline constexpr std::size_t kDefaultFeatureDim = 4096;

// Lowercased tokens. Identifiers (including dotted qualified names such as
// Nat.add_comm) and digit runs stay whole; every other non-space byte is a
// token of its own.
std::vector<std::string> tokenize(std::string_view text);

std::uint32_t token_bucket(std::string_view token, std::size_t dim);

// Sparse non-negative vector with entries sorted by bucket and no zeros.
class FeatureVector {
 public:
  using Entry = std::pair<std::uint32_t, double>;

  FeatureVector() = default;
  // Sums duplicate buckets, drops zeros, computes the norm.
  FeatureVector(std::size_t dim, std::vector<Entry> entries);

  std::size_t dim() const { return dim_; }
  const std::vector<Entry>& entries() const { return entries_; }
  double norm() const { return norm_; }
  bool is_zero() const { return entries_.empty(); }
  double weight(std::uint32_t bucket) const;
  FeatureVector scaled(double factor) const;

  bool operator==(const FeatureVector&) const = default;

 private:
  std::size_t dim_ = 0;
  std::vector<Entry> entries_;
  double norm_ = 0.0;
};

double dot(const FeatureVector& a, const FeatureVector& b);

// Cosine clamped to [0, 1]; 0 when either side is zero.
double similarity(const FeatureVector& a, const FeatureVector& b);

// Bucket document frequencies over a fixed document set.
class DocumentFrequency {
 public:
  explicit DocumentFrequency(std::size_t dim = kDefaultFeatureDim) : dim_(dim) {}

  static DocumentFrequency from_documents(const std::vector<std::string>& docs,
                                          std::size_t dim = kDefaultFeatureDim);

  void add_document(std::string_view text);

  std::size_t dim() const { return dim_; }
  std::size_t document_count() const { return n_docs_; }
  std::size_t df(std::uint32_t bucket) const;
  // ln((1 + N) / (1 + df)) + 1
  double idf(std::uint32_t bucket) const;
  const std::vector<std::pair<std::uint32_t, std::size_t>>& table() const { return table_; }

  nlohmann::json to_json() const;
  static DocumentFrequency from_json(const nlohmann::json& j);

  bool operator==(const DocumentFrequency&) const = default;

 private:
  std::size_t dim_;
  std::size_t n_docs_ = 0;
  std::vector<std::pair<std::uint32_t, std::size_t>> table_;  // sorted by bucket
};

// Raw term count times idf per bucket.
FeatureVector featurize(std::string_view text, const DocumentFrequency& df);

}  // namespace coqharness::retriever

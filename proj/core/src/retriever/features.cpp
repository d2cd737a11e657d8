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

#include "coqharness/retriever/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "coqharness/common/error.hpp"
#include "coqharness/common/hash.hpp"
#include "coqharness/common/text.hpp"

namespace coqharness::retriever {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  const std::size_t n = text.size();
  auto at = [&](std::size_t k) { return static_cast<unsigned char>(text[k]); };
  while (i < n) {
    unsigned char c = at(i);
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    std::size_t start = i;
    if (text::is_ident_start(c)) {
      ++i;
      while (i < n) {
        if (text::is_ident_char(at(i))) {
          ++i;
        } else if (at(i) == '.' && i + 1 < n && text::is_ident_start(at(i + 1))) {
          i += 2;
        } else {
          break;
        }
      }
    } else if (std::isdigit(c)) {
      while (i < n && std::isdigit(at(i))) ++i;
    } else {
      ++i;
    }
    tokens.push_back(text::to_lower_ascii(text.substr(start, i - start)));
  }
  return tokens;
}

std::uint32_t token_bucket(std::string_view token, std::size_t dim) {
  return static_cast<std::uint32_t>(fnv1a64(token) % dim);
}

FeatureVector::FeatureVector(std::size_t dim, std::vector<Entry> entries) : dim_(dim) {
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.first < b.first; });
  for (const auto& [bucket, w] : entries) {
    if (bucket >= dim) {
      throw HarnessError(ErrorCode::kDimensionMismatch, "feature bucket out of range");
    }
    if (!entries_.empty() && entries_.back().first == bucket) {
      entries_.back().second += w;
    } else {
      entries_.emplace_back(bucket, w);
    }
  }
  std::erase_if(entries_, [](const Entry& e) { return e.second == 0.0; });
  double sq = 0.0;
  for (const auto& e : entries_) sq += e.second * e.second;
  norm_ = std::sqrt(sq);
}

double FeatureVector::weight(std::uint32_t bucket) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), bucket,
                             [](const Entry& e, std::uint32_t b) { return e.first < b; });
  return it != entries_.end() && it->first == bucket ? it->second : 0.0;
}

FeatureVector FeatureVector::scaled(double factor) const {
  std::vector<Entry> out = entries_;
  for (auto& e : out) e.second *= factor;
  return FeatureVector(dim_, std::move(out));
}

double dot(const FeatureVector& a, const FeatureVector& b) {
  double s = 0.0;
  auto i = a.entries().begin(), ie = a.entries().end();
  auto j = b.entries().begin(), je = b.entries().end();
  while (i != ie && j != je) {
    if (i->first < j->first) {
      ++i;
    } else if (j->first < i->first) {
      ++j;
    } else {
      s += i->second * j->second;
      ++i;
      ++j;
    }
  }
  return s;
}

double similarity(const FeatureVector& a, const FeatureVector& b) {
  if (a.is_zero() || b.is_zero()) return 0.0;
  return std::clamp(dot(a, b) / (a.norm() * b.norm()), 0.0, 1.0);
}

DocumentFrequency DocumentFrequency::from_documents(const std::vector<std::string>& docs,
                                                    std::size_t dim) {
  DocumentFrequency df(dim);
  for (const auto& d : docs) df.add_document(d);
  return df;
}

void DocumentFrequency::add_document(std::string_view text) {
  std::set<std::uint32_t> seen;
  for (const auto& tok : tokenize(text)) seen.insert(token_bucket(tok, dim_));
  std::map<std::uint32_t, std::size_t> merged(table_.begin(), table_.end());
  for (auto b : seen) ++merged[b];
  table_.assign(merged.begin(), merged.end());
  ++n_docs_;
}

std::size_t DocumentFrequency::df(std::uint32_t bucket) const {
  auto it = std::lower_bound(
      table_.begin(), table_.end(), bucket,
      [](const std::pair<std::uint32_t, std::size_t>& e, std::uint32_t b) { return e.first < b; });
  return it != table_.end() && it->first == bucket ? it->second : 0;
}

double DocumentFrequency::idf(std::uint32_t bucket) const {
  return std::log((1.0 + static_cast<double>(n_docs_)) /
                  (1.0 + static_cast<double>(df(bucket)))) +
         1.0;
}

nlohmann::json DocumentFrequency::to_json() const {
  nlohmann::json j;
  j["dim"] = dim_;
  j["documents"] = n_docs_;
  j["df"] = nlohmann::json::array();
  for (const auto& [b, c] : table_) j["df"].push_back({b, c});
  return j;
}

DocumentFrequency DocumentFrequency::from_json(const nlohmann::json& j) {
  DocumentFrequency df(j.at("dim").get<std::size_t>());
  df.n_docs_ = j.at("documents").get<std::size_t>();
  for (const auto& e : j.at("df")) {
    df.table_.emplace_back(e.at(0).get<std::uint32_t>(), e.at(1).get<std::size_t>());
  }
  std::sort(df.table_.begin(), df.table_.end());
  return df;
}

FeatureVector featurize(std::string_view text, const DocumentFrequency& df) {
  std::map<std::uint32_t, double> counts;
  for (const auto& tok : tokenize(text)) counts[token_bucket(tok, df.dim())] += 1.0;
  std::vector<FeatureVector::Entry> entries;
  entries.reserve(counts.size());
  for (const auto& [b, tf] : counts) entries.emplace_back(b, tf * df.idf(b));
  return FeatureVector(df.dim(), std::move(entries));
}

}  // namespace coqharness::retriever

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
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "coqharness/coq/sentence.hpp"

namespace coqharness::corpus {

enum class SplitLabel { kTrain, kTest, kExcluded };

std::string_view split_label_name(SplitLabel label);
std::optional<SplitLabel> parse_split_label(std::string_view name);

// One theorem extracted from a source file.
struct TheoremRecord {
  std::string id;    // "<file>:<name>"
  std::string name;
  coq::Sentence statement;
  std::vector<coq::Sentence> proof;  // ends with a closing command
  std::string file;  // path relative to the corpus root, '/' separated
  std::string preceding_source;
  std::size_t index_in_file = 0;

  // Proof sentences joined by newlines.
  std::string proof_text() const;
  // Tactic sentences, i.e. proof minus "Proof." headers and the closing
  // command.
  std::size_t tactic_count() const;

  bool operator==(const TheoremRecord&) const = default;
};

struct IngestWarning {
  std::string file;
  std::optional<std::size_t> offset;
  std::string message;

  bool operator==(const IngestWarning&) const = default;
};

struct Corpus {
  std::vector<TheoremRecord> records;
  std::string root;
  std::map<std::string, SplitLabel> split_labels;
  std::vector<IngestWarning> warnings;

  const TheoremRecord* find(std::string_view id) const;
  // Throws HarnessError(kUnknownId).
  const TheoremRecord& at(std::string_view id) const;
  SplitLabel label(std::string_view id) const;
  std::vector<const TheoremRecord*> with_label(SplitLabel label) const;

  bool operator==(const Corpus&) const = default;
};

struct IngestOptions {
  bool follow_subdirs = true;
  // fnmatch(3) patterns tested against the relative path and the file name.
  std::vector<std::string> exclude_globs;
};

// Walks root for *.v files (sorted by relative path) and extracts every
// theorem-like statement with its proof. Admitted/Aborted proofs are labelled
// excluded, everything else train. Files that fail to segment are skipped
// with a warning. Throws HarnessError(kNoSourcesFound).
Corpus ingest_project(const std::filesystem::path& root,
                      const IngestOptions& options = {});

// Extraction for one in-memory file; appends records and warnings.
void ingest_source(std::string_view file, std::string_view source, Corpus& corpus);

enum class SplitPolicy { kByIndex, kByFile, kExplicit };

std::optional<SplitPolicy> parse_split_policy(std::string_view name);
std::string_view split_policy_name(SplitPolicy policy);

struct SplitOptions {
  SplitPolicy policy = SplitPolicy::kByIndex;
  std::uint64_t seed = 0;
  double test_fraction = 0.2;
  std::vector<std::string> test_ids;  // kExplicit only
};

// Relabels non-excluded records train/test. Deterministic for a fixed seed.
// by_index places exactly round(test_fraction * eligible) records in test
// (clamped to leave one on each side); by_file assigns whole files.
// Throws HarnessError(kTooFewRecords / kUnknownId / kConfigError).
Corpus split_corpus(const Corpus& corpus, const SplitOptions& options);

// Up to n records preceding `id` in its file, nearest last, whatever their
// split label. Throws HarnessError(kUnknownId).
std::vector<const TheoremRecord*> preceding_lemmas(const Corpus& corpus,
                                                   std::string_view id,
                                                   std::size_t n);

// JSON Lines: a header object on line 1, then one record per line.
std::string serialize_corpus(const Corpus& corpus);
// Throws SchemaViolation with the 1-based line number.
Corpus parse_corpus(std::string_view jsonl);

void save_corpus(const Corpus& corpus, const std::filesystem::path& path);
Corpus load_corpus(const std::filesystem::path& path);

// SHA-256 of the serialized corpus.
std::string corpus_hash(const Corpus& corpus);

}  // namespace coqharness::corpus

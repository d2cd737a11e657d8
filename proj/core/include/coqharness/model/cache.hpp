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

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "coqharness/model/provider.hpp"

namespace coqharness::model {

struct Transcript {
  std::string prompt_hash;
  std::vector<prompting::ChatMessage> messages;
  DecodingParams params;
  nlohmann::json scope;  // Provider::cache_scope, null when unscoped
  std::vector<std::string> completions;
  std::string provider;
  std::string timestamp;  // ISO 8601, UTC
  TokenUsage token_usage;

  nlohmann::json to_json() const;
  // Throws HarnessError(kSchemaViolation), including when the stored hash
  // does not match the stored prompt.
  static Transcript from_json(const nlohmann::json& j);
};

// Append-only JSON Lines files named after the first two hex digits of the
// prompt hash. Never evicts. Safe to share between threads; every record is
// written with a single append.
class TranscriptCache {
 public:
  explicit TranscriptCache(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  std::optional<Transcript> lookup(const std::string& prompt_hash);
  void store(const Transcript& transcript);

 private:
  void load_shard(const std::string& prefix);

  std::filesystem::path dir_;
  std::mutex mu_;
  std::map<std::string, bool> loaded_;
  std::map<std::string, Transcript> entries_;
};

// Serves cached transcripts and records fresh ones. In replay mode a miss is
// an error and the inner provider is never called.
class CachingProvider final : public Provider {
 public:
  CachingProvider(Provider* inner, TranscriptCache& cache, bool replay);

  CompletionResult complete(const prompting::ChatPrompt& prompt,
                            const DecodingParams& params) override;
  std::string name() const override;

 private:
  Provider* inner_;
  TranscriptCache& cache_;
  bool replay_;
};

std::string utc_timestamp();

}  // namespace coqharness::model

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
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "coqharness/prompting/prompt.hpp"

namespace coqharness::model {

struct DecodingParams {
  double temperature = 1.0;
  double presence_penalty = 0.1;
  int n = 5;
  int max_tokens = 1024;
  std::optional<std::int64_t> seed;

  // Throws HarnessError(kConfigError).
  void validate() const;
  nlohmann::json to_json() const;
  // Missing keys keep their defaults.
  static DecodingParams from_json(const nlohmann::json& j);

  bool operator==(const DecodingParams&) const = default;
};

struct TokenUsage {
  std::uint64_t prompt = 0;
  std::uint64_t completion = 0;

  std::uint64_t total() const { return prompt + completion; }
  bool operator==(const TokenUsage&) const = default;
};

// SHA-256 over the canonical JSON of the messages and decoding parameters.
// scope is extra request context the answer depends on; null for none.
std::string prompt_hash(const std::vector<prompting::ChatMessage>& messages,
                        const DecodingParams& params,
                        const nlohmann::json& scope = nullptr);

struct CompletionResult {
  std::vector<std::string> completions;
  TokenUsage usage;
  int attempts = 1;  // HTTP requests including retries
  bool from_cache = false;
  std::string provider;
};

// Shared by all workers; implementations synchronize internally.
class Provider {
 public:
  virtual ~Provider() = default;
  // Returns params.n completions. Throws ProviderError,
  // HarnessError(kBudgetExceeded) or HarnessError(kCacheMiss).
  virtual CompletionResult complete(const prompting::ChatPrompt& prompt,
                                    const DecodingParams& params) = 0;
  virtual std::string name() const = 0;
  // Context beyond the messages that selects the answer. It joins the cache
  // key so that equal prompts from different contexts are not conflated.
  virtual nlohmann::json cache_scope(const prompting::ChatPrompt& /*prompt*/) const {
    return nullptr;
  }
};

std::vector<std::string> complete(const prompting::ChatPrompt& prompt,
                                  const DecodingParams& params, Provider& provider);

}  // namespace coqharness::model

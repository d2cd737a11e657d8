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

#include "coqharness/model/provider.hpp"

#include <cmath>

#include "coqharness/common/error.hpp"
#include "coqharness/common/hash.hpp"

namespace coqharness::model {

void DecodingParams::validate() const {
  if (!(temperature >= 0.0)) throw HarnessError(ErrorCode::kConfigError, "temperature must be >= 0");
  if (!std::isfinite(presence_penalty)) {
    throw HarnessError(ErrorCode::kConfigError, "presence_penalty must be finite");
  }
  if (n < 1) throw HarnessError(ErrorCode::kConfigError, "n must be >= 1");
  if (max_tokens < 1) throw HarnessError(ErrorCode::kConfigError, "max_tokens must be >= 1");
}

nlohmann::json DecodingParams::to_json() const {
  nlohmann::json j;
  j["temperature"] = temperature;
  j["presence_penalty"] = presence_penalty;
  j["n"] = n;
  j["max_tokens"] = max_tokens;
  j["seed"] = seed ? nlohmann::json(*seed) : nlohmann::json(nullptr);
  return j;
}

DecodingParams DecodingParams::from_json(const nlohmann::json& j) {
  DecodingParams p;
  p.temperature = j.value("temperature", p.temperature);
  p.presence_penalty = j.value("presence_penalty", p.presence_penalty);
  p.n = j.value("n", p.n);
  p.max_tokens = j.value("max_tokens", p.max_tokens);
  if (j.contains("seed") && !j.at("seed").is_null()) p.seed = j.at("seed").get<std::int64_t>();
  return p;
}

std::string prompt_hash(const std::vector<prompting::ChatMessage>& messages,
                        const DecodingParams& params, const nlohmann::json& scope) {
  // nlohmann::json objects are key-sorted, so dump() is canonical.
  nlohmann::json doc;
  doc["messages"] = prompting::messages_to_json(messages);
  doc["params"] = params.to_json();
  if (!scope.is_null()) doc["scope"] = scope;
  return sha256_hex(doc.dump());
}

std::vector<std::string> complete(const prompting::ChatPrompt& prompt,
                                  const DecodingParams& params, Provider& provider) {
  return provider.complete(prompt, params).completions;
}

}  // namespace coqharness::model

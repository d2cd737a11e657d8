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
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "coqharness/model/provider.hpp"

namespace coqharness::model {

// Selects prompts by metadata. Unset fields match anything. `theorem`
// matches the full theorem id or its name after the last ':'; `turn` counts
// assistant messages beyond the few-shot examples; `when_contains` is a
// substring of the final user message.
struct ScriptSelector {
  std::optional<std::string> theorem;
  std::optional<std::string> config;
  std::optional<std::string> variant;
  std::optional<int> turn;
  std::optional<std::string> when_contains;

  bool matches(const prompting::ChatPrompt& prompt) const;
};

struct ScriptEntry {
  ScriptSelector selector;
  std::vector<std::string> completions;  // cycled when n exceeds the list
};

// Deterministic provider driven by a script:
//
//   {"default": "(* I cannot generate a proof. *)",
//    "entries": [{"theorem": "weak_refl", "config": "fs-sim",
//                 "completions": ["Proof. ... Qed."]}]}
//
// The first matching entry answers. Stateless, so safe across threads.
class ScriptedProvider final : public Provider {
 public:
  ScriptedProvider(std::vector<ScriptEntry> entries, std::string default_completion);

  // Throws HarnessError(kScriptParseError).
  static ScriptedProvider from_json(const nlohmann::json& doc);
  static ScriptedProvider load(const std::filesystem::path& path);

  CompletionResult complete(const prompting::ChatPrompt& prompt,
                            const DecodingParams& params) override;
  std::string name() const override { return "scripted"; }
  // Entries select on these, so they belong to the cache key.
  nlohmann::json cache_scope(const prompting::ChatPrompt& prompt) const override {
    return {{"config", prompt.config_tag}, {"theorem", prompt.theorem_id}, {"variant", prompt.variant_id}};
  }

  const std::vector<ScriptEntry>& entries() const { return entries_; }

 private:
  std::vector<ScriptEntry> entries_;
  std::string default_completion_;
};

}  // namespace coqharness::model

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
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "coqharness/corpus/corpus.hpp"
#include "coqharness/prompting/templates.hpp"

namespace coqharness::prompting {

enum class Role { kSystem, kUser, kAssistant };

std::string_view role_name(Role role);
std::optional<Role> parse_role(std::string_view name);

struct ChatMessage {
  Role role = Role::kUser;
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

struct ChatPrompt {
  std::vector<ChatMessage> messages;
  std::string config_tag;
  std::string variant_id = "base";
  std::string theorem_id;
  std::vector<std::string> example_ids;          // in rendered order
  std::vector<std::string> dropped_example_ids;  // removed by budget or leakage

  std::size_t example_count() const { return example_ids.size(); }
  std::size_t total_chars() const;

  bool operator==(const ChatPrompt&) const = default;
};

nlohmann::json messages_to_json(const std::vector<ChatMessage>& messages);
std::vector<ChatMessage> messages_from_json(const nlohmann::json& j);

enum class PromptMode { kZs, kFsRand, kFsSim, kZsLem, kFsLem };

std::string_view prompt_mode_name(PromptMode mode);  // "zs", "fs-sim+lem" style tags
std::optional<PromptMode> parse_prompt_mode(std::string_view name);
bool is_few_shot(PromptMode mode);
bool uses_lemmas(PromptMode mode);

struct PromptConfig {
  PromptMode mode = PromptMode::kZs;
  std::string config_tag;  // defaults to the mode name
  // Total characters over all messages; 0 disables the limit.
  std::size_t context_char_limit = 0;
  bool interactive = false;
};

struct LemmaRef {
  std::string name;
  std::string statement;

  bool operator==(const LemmaRef&) const = default;
};

struct PromptExample {
  std::string id;
  std::string statement;
  std::string proof;
  std::vector<LemmaRef> lemmas;  // rendered only for +lem modes
};

LemmaRef make_lemma(const corpus::TheoremRecord& record);
PromptExample make_example(const corpus::TheoremRecord& record,
                           const std::vector<const corpus::TheoremRecord*>& lemmas = {});

// One lemma statement per line.
std::string render_lemma_block(const std::vector<LemmaRef>& lemmas);

// System message, one user/assistant pair per example (most relevant
// first), then the query. Examples whose proof would reveal the target's
// reference proof are dropped, and with a character limit the least
// relevant examples go first. Throws HarnessError(kConfigMismatch).
ChatPrompt build_prompt(const PromptConfig& config, const corpus::TheoremRecord& target,
                        const std::vector<PromptExample>& examples,
                        const std::vector<LemmaRef>& lemmas,
                        const TemplateSet& templates = TemplateSet::defaults());

// True when the (whitespace-normalized) reference proof occurs in any
// message.
bool prompt_leaks(const ChatPrompt& prompt, std::string_view reference_proof);

enum class StrategyKind { kSimpleTacticsFirst, kNoLemmaUse, kVerboseStepwise, kExampleReorder };

struct Strategy {
  StrategyKind kind = StrategyKind::kSimpleTacticsFirst;
  std::uint64_t seed = 0;  // example-reorder only

  // "simple-tactics-first", "example-reorder:7", ...
  std::string id() const;
  bool operator==(const Strategy&) const = default;
};

// Accepts "example-reorder", "example-reorder:N" and "example-reorder(N)".
// Throws HarnessError(kUnknownStrategy).
Strategy parse_strategy(std::string_view text);

// One variant per strategy; only the system message or the example order
// changes.
std::vector<ChatPrompt> diversify(const ChatPrompt& prompt, const std::vector<Strategy>& strategies,
                                  const TemplateSet& templates = TemplateSet::defaults());

}  // namespace coqharness::prompting

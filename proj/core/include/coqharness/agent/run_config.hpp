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

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "coqharness/model/provider.hpp"
#include "coqharness/prompting/prompt.hpp"
#include "coqharness/retriever/index.hpp"

namespace coqharness::agent {

enum class AgentLoop { kOneShot, kInteractive, kRepair, kEnsemble };

std::string_view agent_loop_name(AgentLoop loop);
std::optional<AgentLoop> parse_agent_loop(std::string_view name);

enum class ExampleSelection { kRandom, kSimilar };

struct Budgets {
  int max_turns = 30;
  int max_queries = 10;
  std::chrono::milliseconds wall_clock{0};  // per attempt, 0 = unlimited

  bool operator==(const Budgets&) const = default;
};

struct RunConfig {
  std::string tag;  // defaults to the mode name
  prompting::PromptMode mode = prompting::PromptMode::kZs;
  AgentLoop loop = AgentLoop::kOneShot;
  int repair_rounds = 2;
  std::vector<prompting::Strategy> strategies;
  int k_shots = 0;
  int n_lemmas = 6;
  // fs-rand is random and fs-sim similar by definition; fs+lem follows this.
  ExampleSelection lemma_mode_examples = ExampleSelection::kRandom;
  model::DecodingParams decoding;
  std::uint64_t seed = 0;
  Budgets budgets;
  std::size_t context_char_limit = 0;
  bool use_embedding = false;  // fs-sim ranks in embedding space

  // Mode defaults: six examples for few-shot modes, none otherwise.
  static RunConfig for_mode(prompting::PromptMode mode, AgentLoop loop = AgentLoop::kOneShot);

  std::string effective_tag() const;
  ExampleSelection example_selection() const;
  prompting::PromptConfig prompt_config(bool interactive = false) const;

  // Throws HarnessError(kConfigMismatch).
  void validate() const;

  nlohmann::ordered_json to_json() const;
  // Missing keys take the mode defaults. Throws HarnessError(kSchemaViolation
  // or kConfigMismatch).
  static RunConfig from_json(const nlohmann::json& j);

  bool operator==(const RunConfig& other) const;
};

// {"configs": [RunConfig, ...]}; an empty list is a schema violation.
std::vector<RunConfig> parse_manifest(const nlohmann::json& doc);
std::vector<RunConfig> load_manifest(const std::filesystem::path& path);
nlohmann::ordered_json manifest_to_json(const std::vector<RunConfig>& configs);
std::string manifest_hash(const std::vector<RunConfig>& configs);

}  // namespace coqharness::agent

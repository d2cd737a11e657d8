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

#include "coqharness/agent/run_config.hpp"

#include <fstream>
#include <set>

#include "coqharness/common/error.hpp"
#include "coqharness/common/hash.hpp"

namespace coqharness::agent {

using nlohmann::ordered_json;
using prompting::PromptMode;

std::string_view agent_loop_name(AgentLoop loop) {
  switch (loop) {
    case AgentLoop::kOneShot: return "one_shot";
    case AgentLoop::kInteractive: return "interactive";
    case AgentLoop::kRepair: return "repair";
    case AgentLoop::kEnsemble: return "ensemble";
  }
  return "one_shot";
}

std::optional<AgentLoop> parse_agent_loop(std::string_view name) {
  for (auto l : {AgentLoop::kOneShot, AgentLoop::kInteractive, AgentLoop::kRepair,
                 AgentLoop::kEnsemble}) {
    if (agent_loop_name(l) == name) return l;
  }
  return std::nullopt;
}

RunConfig RunConfig::for_mode(PromptMode mode, AgentLoop loop) {
  RunConfig c;
  c.mode = mode;
  c.loop = loop;
  c.k_shots = prompting::is_few_shot(mode) ? 6 : 0;
  return c;
}

std::string RunConfig::effective_tag() const {
  return tag.empty() ? std::string(prompting::prompt_mode_name(mode)) : tag;
}

ExampleSelection RunConfig::example_selection() const {
  if (mode == PromptMode::kFsSim) return ExampleSelection::kSimilar;
  if (mode == PromptMode::kFsLem) return lemma_mode_examples;
  return ExampleSelection::kRandom;
}

prompting::PromptConfig RunConfig::prompt_config(bool interactive) const {
  prompting::PromptConfig p;
  p.mode = mode;
  p.config_tag = effective_tag();
  p.context_char_limit = context_char_limit;
  p.interactive = interactive;
  return p;
}

void RunConfig::validate() const {
  auto bad = [&](const std::string& msg) {
    throw HarnessError(ErrorCode::kConfigMismatch, "config " + effective_tag() + ": " + msg);
  };
  const bool few_shot = prompting::is_few_shot(mode);
  if (few_shot && k_shots < 1) bad("few-shot modes need k_shots >= 1");
  if (!few_shot && k_shots != 0) bad("zero-shot modes need k_shots = 0");
  if (n_lemmas < 0) bad("n_lemmas must be >= 0");
  if (loop == AgentLoop::kRepair && repair_rounds < 1) bad("repair needs rounds >= 1");
  if (loop == AgentLoop::kEnsemble && strategies.empty()) bad("ensemble needs at least one strategy");
  if (budgets.max_turns < 1) bad("max_turns must be >= 1");
  if (budgets.max_queries < 0) bad("max_queries must be >= 0");
  try {
    decoding.validate();
  } catch (const HarnessError& e) {
    bad(e.what());
  }
}

ordered_json RunConfig::to_json() const {
  ordered_json j;
  j["tag"] = effective_tag();
  j["mode"] = prompting::prompt_mode_name(mode);
  j["loop"] = agent_loop_name(loop);
  j["rounds"] = repair_rounds;
  j["strategies"] = ordered_json::array();
  for (const auto& s : strategies) j["strategies"].push_back(s.id());
  j["k_shots"] = k_shots;
  j["n_lemmas"] = n_lemmas;
  j["lemma_mode_examples"] =
      lemma_mode_examples == ExampleSelection::kRandom ? "random" : "similar";
  j["decoding"] = {{"temperature", decoding.temperature},
                   {"presence_penalty", decoding.presence_penalty},
                   {"n", decoding.n},
                   {"max_tokens", decoding.max_tokens},
                   {"seed", decoding.seed ? ordered_json(*decoding.seed) : ordered_json(nullptr)}};
  j["seed"] = seed;
  j["budgets"] = {{"max_turns", budgets.max_turns},
                  {"max_queries", budgets.max_queries},
                  {"wall_clock_ms", budgets.wall_clock.count()}};
  j["context_char_limit"] = context_char_limit;
  j["use_embedding"] = use_embedding;
  return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object()) throw HarnessError(ErrorCode::kSchemaViolation, "config must be an object");
    static const std::set<std::string> kKeys = {
        "tag",     "mode",   "loop",    "rounds",  "strategies",         "k_shots",
        "n_lemmas", "lemma_mode_examples", "decoding", "seed", "budgets",
        "context_char_limit", "use_embedding"};
    for (const auto& [key, value] : j.items()) {
      if (!kKeys.count(key)) {
        throw HarnessError(ErrorCode::kSchemaViolation, "unknown config key '" + key + "'");
      }
    }
    auto mode = prompting::parse_prompt_mode(j.at("mode").get<std::string>());
    if (!mode) throw HarnessError(ErrorCode::kSchemaViolation, "unknown mode " + j.at("mode").dump());
    AgentLoop loop = AgentLoop::kOneShot;
    if (j.contains("loop")) {
      auto l = parse_agent_loop(j.at("loop").get<std::string>());
      if (!l) throw HarnessError(ErrorCode::kSchemaViolation, "unknown loop " + j.at("loop").dump());
      loop = *l;
    }
    RunConfig c = for_mode(*mode, loop);
    c.tag = j.value("tag", std::string());
    c.repair_rounds = j.value("rounds", c.repair_rounds);
    if (j.contains("strategies")) {
      for (const auto& s : j.at("strategies")) {
        c.strategies.push_back(prompting::parse_strategy(s.get<std::string>()));
      }
    }
    c.k_shots = j.value("k_shots", c.k_shots);
    c.n_lemmas = j.value("n_lemmas", c.n_lemmas);
    if (j.contains("lemma_mode_examples")) {
      auto v = j.at("lemma_mode_examples").get<std::string>();
      if (v == "random") {
        c.lemma_mode_examples = ExampleSelection::kRandom;
      } else if (v == "similar") {
        c.lemma_mode_examples = ExampleSelection::kSimilar;
      } else {
        throw HarnessError(ErrorCode::kSchemaViolation, "lemma_mode_examples must be random or similar");
      }
    }
    if (j.contains("decoding")) c.decoding = model::DecodingParams::from_json(j.at("decoding"));
    c.seed = j.value("seed", c.seed);
    if (j.contains("budgets")) {
      const auto& b = j.at("budgets");
      c.budgets.max_turns = b.value("max_turns", c.budgets.max_turns);
      c.budgets.max_queries = b.value("max_queries", c.budgets.max_queries);
      c.budgets.wall_clock = std::chrono::milliseconds(b.value("wall_clock_ms", std::int64_t{0}));
    }
    c.context_char_limit = j.value("context_char_limit", c.context_char_limit);
    c.use_embedding = j.value("use_embedding", c.use_embedding);
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw HarnessError(ErrorCode::kSchemaViolation, std::string("run config: ") + e.what());
  }
}

bool RunConfig::operator==(const RunConfig& o) const {
  return to_json() == o.to_json();
}

std::vector<RunConfig> parse_manifest(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("configs") || !doc.at("configs").is_array()) {
    throw HarnessError(ErrorCode::kSchemaViolation, "manifest needs a 'configs' array");
  }
  std::vector<RunConfig> configs;
  std::set<std::string> tags;
  for (const auto& c : doc.at("configs")) {
    configs.push_back(RunConfig::from_json(c));
    if (!tags.insert(configs.back().effective_tag()).second) {
      throw HarnessError(ErrorCode::kSchemaViolation,
                         "duplicate config tag " + configs.back().effective_tag());
    }
  }
  if (configs.empty()) throw HarnessError(ErrorCode::kSchemaViolation, "manifest has no configs");
  return configs;
}

std::vector<RunConfig> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw HarnessError(ErrorCode::kIoError, "cannot read manifest " + path.string());
  try {
    return parse_manifest(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw HarnessError(ErrorCode::kSchemaViolation, "manifest " + path.string() + ": " + e.what());
  }
}

ordered_json manifest_to_json(const std::vector<RunConfig>& configs) {
  ordered_json j;
  j["configs"] = ordered_json::array();
  for (const auto& c : configs) j["configs"].push_back(c.to_json());
  return j;
}

std::string manifest_hash(const std::vector<RunConfig>& configs) {
  return sha256_hex(manifest_to_json(configs).dump());
}

}  // namespace coqharness::agent

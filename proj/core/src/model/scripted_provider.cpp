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

#include "coqharness/model/scripted_provider.hpp"

#include <fstream>

#include "coqharness/common/error.hpp"

namespace coqharness::model {

namespace {

[[noreturn]] void parse_error(const std::string& msg) {
  throw HarnessError(ErrorCode::kScriptParseError, msg);
}

int conversation_turn(const prompting::ChatPrompt& prompt) {
  int assistants = 0;
  for (const auto& m : prompt.messages) {
    if (m.role == prompting::Role::kAssistant) ++assistants;
  }
  return assistants - static_cast<int>(prompt.example_count());
}

std::optional<std::string> opt_string(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  if (!j.at(key).is_string()) parse_error(std::string("selector field '") + key + "' must be a string");
  return j.at(key).get<std::string>();
}

}  // namespace

bool ScriptSelector::matches(const prompting::ChatPrompt& prompt) const {
  if (theorem) {
    const std::string& id = prompt.theorem_id;
    auto colon = id.rfind(':');
    std::string name = colon == std::string::npos ? id : id.substr(colon + 1);
    if (*theorem != id && *theorem != name) return false;
  }
  if (config && *config != prompt.config_tag) return false;
  if (variant && *variant != prompt.variant_id) return false;
  if (turn && *turn != conversation_turn(prompt)) return false;
  if (when_contains) {
    if (prompt.messages.empty() ||
        prompt.messages.back().content.find(*when_contains) == std::string::npos) {
      return false;
    }
  }
  return true;
}

ScriptedProvider::ScriptedProvider(std::vector<ScriptEntry> entries, std::string default_completion)
    : entries_(std::move(entries)), default_completion_(std::move(default_completion)) {}

ScriptedProvider ScriptedProvider::from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) parse_error("script must be a JSON object");
  std::string fallback;
  if (doc.contains("default")) {
    if (!doc.at("default").is_string()) parse_error("'default' must be a string");
    fallback = doc.at("default").get<std::string>();
  }
  std::vector<ScriptEntry> entries;
  if (doc.contains("entries")) {
    if (!doc.at("entries").is_array()) parse_error("'entries' must be an array");
    std::size_t idx = 0;
    for (const auto& e : doc.at("entries")) {
      const std::string where = "entry " + std::to_string(idx++);
      if (!e.is_object()) parse_error(where + " is not an object");
      for (const auto& [key, value] : e.items()) {
        if (key != "theorem" && key != "config" && key != "variant" && key != "turn" &&
            key != "when_contains" && key != "completions") {
          parse_error(where + " has unknown field '" + key + "'");
        }
      }
      ScriptEntry entry;
      entry.selector.theorem = opt_string(e, "theorem");
      entry.selector.config = opt_string(e, "config");
      entry.selector.variant = opt_string(e, "variant");
      entry.selector.when_contains = opt_string(e, "when_contains");
      if (e.contains("turn")) {
        if (!e.at("turn").is_number_integer()) parse_error(where + ": 'turn' must be an integer");
        entry.selector.turn = e.at("turn").get<int>();
      }
      if (!e.contains("completions")) parse_error(where + " has no completions");
      const auto& c = e.at("completions");
      if (c.is_string()) {
        entry.completions.push_back(c.get<std::string>());
      } else if (c.is_array() && !c.empty()) {
        for (const auto& s : c) {
          if (!s.is_string()) parse_error(where + ": completions must be strings");
          entry.completions.push_back(s.get<std::string>());
        }
      } else {
        parse_error(where + ": completions must be a string or a non-empty array");
      }
      entries.push_back(std::move(entry));
    }
  }
  return ScriptedProvider(std::move(entries), std::move(fallback));
}

ScriptedProvider ScriptedProvider::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) parse_error("cannot read script " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    parse_error(path.string() + ": " + e.what());
  }
}

CompletionResult ScriptedProvider::complete(const prompting::ChatPrompt& prompt,
                                            const DecodingParams& params) {
  params.validate();
  CompletionResult r;
  r.provider = name();
  const std::vector<std::string>* chosen = nullptr;
  for (const auto& e : entries_) {
    if (e.selector.matches(prompt)) {
      chosen = &e.completions;
      break;
    }
  }
  for (int i = 0; i < params.n; ++i) {
    r.completions.push_back(chosen ? (*chosen)[static_cast<std::size_t>(i) % chosen->size()]
                                   : default_completion_);
  }
  return r;
}

}  // namespace coqharness::model

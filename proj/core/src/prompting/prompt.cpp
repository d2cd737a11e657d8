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

#include "coqharness/prompting/prompt.hpp"

#include <algorithm>
#include <charconv>

#include "coqharness/common/error.hpp"
#include "coqharness/common/random.hpp"
#include "coqharness/common/text.hpp"

namespace coqharness::prompting {

std::string_view role_name(Role role) {
  switch (role) {
    case Role::kSystem: return "system";
    case Role::kUser: return "user";
    case Role::kAssistant: return "assistant";
  }
  return "user";
}

std::optional<Role> parse_role(std::string_view name) {
  if (name == "system") return Role::kSystem;
  if (name == "user") return Role::kUser;
  if (name == "assistant") return Role::kAssistant;
  return std::nullopt;
}

std::size_t ChatPrompt::total_chars() const {
  std::size_t n = 0;
  for (const auto& m : messages) n += m.content.size();
  return n;
}

nlohmann::json messages_to_json(const std::vector<ChatMessage>& messages) {
  auto arr = nlohmann::json::array();
  for (const auto& m : messages) arr.push_back({{"role", role_name(m.role)}, {"content", m.content}});
  return arr;
}

std::vector<ChatMessage> messages_from_json(const nlohmann::json& j) {
  std::vector<ChatMessage> out;
  for (const auto& m : j) {
    auto role = parse_role(m.at("role").get<std::string>());
    if (!role) throw HarnessError(ErrorCode::kSchemaViolation, "unknown message role");
    out.push_back(ChatMessage{*role, m.at("content").get<std::string>()});
  }
  return out;
}

std::string_view prompt_mode_name(PromptMode mode) {
  switch (mode) {
    case PromptMode::kZs: return "zs";
    case PromptMode::kFsRand: return "fs-rand";
    case PromptMode::kFsSim: return "fs-sim";
    case PromptMode::kZsLem: return "zs+lem";
    case PromptMode::kFsLem: return "fs+lem";
  }
  return "zs";
}

std::optional<PromptMode> parse_prompt_mode(std::string_view name) {
  for (auto m : {PromptMode::kZs, PromptMode::kFsRand, PromptMode::kFsSim, PromptMode::kZsLem,
                 PromptMode::kFsLem}) {
    if (prompt_mode_name(m) == name) return m;
  }
  return std::nullopt;
}

bool is_few_shot(PromptMode mode) {
  return mode == PromptMode::kFsRand || mode == PromptMode::kFsSim || mode == PromptMode::kFsLem;
}

bool uses_lemmas(PromptMode mode) {
  return mode == PromptMode::kZsLem || mode == PromptMode::kFsLem;
}

LemmaRef make_lemma(const corpus::TheoremRecord& record) {
  return LemmaRef{record.name, record.statement.text};
}

PromptExample make_example(const corpus::TheoremRecord& record,
                           const std::vector<const corpus::TheoremRecord*>& lemmas) {
  PromptExample ex{record.id, record.statement.text, record.proof_text(), {}};
  for (const auto* l : lemmas) ex.lemmas.push_back(make_lemma(*l));
  return ex;
}

std::string render_lemma_block(const std::vector<LemmaRef>& lemmas) {
  std::vector<std::string> lines;
  for (const auto& l : lemmas) lines.push_back(text::normalize_whitespace(l.statement));
  return text::join(lines, "\n");
}

bool prompt_leaks(const ChatPrompt& prompt, std::string_view reference_proof) {
  const std::string needle = text::normalize_whitespace(reference_proof);
  if (needle.empty()) return false;
  for (const auto& m : prompt.messages) {
    if (text::normalize_whitespace(m.content).find(needle) != std::string::npos) return true;
  }
  return false;
}

namespace {

[[noreturn]] void mismatch(const std::string& msg) {
  throw HarnessError(ErrorCode::kConfigMismatch, msg);
}

}  // namespace

ChatPrompt build_prompt(const PromptConfig& config, const corpus::TheoremRecord& target,
                        const std::vector<PromptExample>& examples,
                        const std::vector<LemmaRef>& lemmas, const TemplateSet& templates) {
  const bool few_shot = is_few_shot(config.mode);
  const bool with_lemmas = uses_lemmas(config.mode);
  const auto mode = std::string(prompt_mode_name(config.mode));
  if (!few_shot && !examples.empty()) mismatch("examples supplied to zero-shot mode " + mode);
  if (few_shot && examples.empty()) mismatch("few-shot mode " + mode + " needs examples");
  if (!with_lemmas && !lemmas.empty()) mismatch("lemmas supplied to mode " + mode);

  ChatPrompt prompt;
  prompt.config_tag = config.config_tag.empty() ? mode : config.config_tag;
  prompt.theorem_id = target.id;

  std::string system = templates.render("system", {});
  if (config.interactive) system += "\n\n" + templates.render("system_interactive", {});

  const std::string reference = text::normalize_whitespace(target.proof_text());
  std::vector<std::pair<std::string, ChatMessage>> user_turns;
  std::vector<ChatMessage> assistant_turns;
  for (const auto& ex : examples) {
    bool leaks = ex.id == target.id ||
                 text::normalize_whitespace(ex.proof).find(reference) != std::string::npos;
    if (leaks) {
      prompt.dropped_example_ids.push_back(ex.id);
      continue;
    }
    Bindings b{{"statement", ex.statement}};
    std::string user;
    if (with_lemmas && !ex.lemmas.empty()) {
      b["lemmas"] = render_lemma_block(ex.lemmas);
      user = templates.render("example_user_lemmas", b);
    } else {
      user = templates.render("example_user", b);
    }
    user_turns.emplace_back(ex.id, ChatMessage{Role::kUser, user});
    assistant_turns.push_back(ChatMessage{Role::kAssistant, ex.proof});
  }

  Bindings qb{{"statement", target.statement.text}};
  std::string query;
  if (with_lemmas && !lemmas.empty()) {
    qb["lemmas"] = render_lemma_block(lemmas);
    query = templates.render("query_lemmas", qb);
  } else {
    query = templates.render("query", qb);
  }

  auto total = [&] {
    std::size_t n = system.size() + query.size();
    for (std::size_t i = 0; i < user_turns.size(); ++i) {
      n += user_turns[i].second.content.size() + assistant_turns[i].content.size();
    }
    return n;
  };
  while (config.context_char_limit > 0 && !user_turns.empty() &&
         total() > config.context_char_limit) {
    prompt.dropped_example_ids.push_back(user_turns.back().first);
    user_turns.pop_back();
    assistant_turns.pop_back();
  }
  if (few_shot && user_turns.empty()) {
    mismatch("every example for " + target.id + " was dropped");
  }

  prompt.messages.push_back(ChatMessage{Role::kSystem, system});
  for (std::size_t i = 0; i < user_turns.size(); ++i) {
    prompt.example_ids.push_back(user_turns[i].first);
    prompt.messages.push_back(user_turns[i].second);
    prompt.messages.push_back(assistant_turns[i]);
  }
  prompt.messages.push_back(ChatMessage{Role::kUser, query});
  return prompt;
}

std::string Strategy::id() const {
  switch (kind) {
    case StrategyKind::kSimpleTacticsFirst: return "simple-tactics-first";
    case StrategyKind::kNoLemmaUse: return "no-lemma-use";
    case StrategyKind::kVerboseStepwise: return "verbose-stepwise";
    case StrategyKind::kExampleReorder: return "example-reorder:" + std::to_string(seed);
  }
  return "";
}

Strategy parse_strategy(std::string_view text_in) {
  auto t = text::trim(text_in);
  if (t == "simple-tactics-first") return {StrategyKind::kSimpleTacticsFirst, 0};
  if (t == "no-lemma-use") return {StrategyKind::kNoLemmaUse, 0};
  if (t == "verbose-stepwise") return {StrategyKind::kVerboseStepwise, 0};
  constexpr std::string_view kReorder = "example-reorder";
  if (t.substr(0, kReorder.size()) == kReorder) {
    auto rest = t.substr(kReorder.size());
    if (rest.empty()) return {StrategyKind::kExampleReorder, 0};
    std::string_view digits;
    if (rest.front() == ':') {
      digits = rest.substr(1);
    } else if (rest.front() == '(' && rest.back() == ')') {
      digits = rest.substr(1, rest.size() - 2);
    }
    std::uint64_t seed = 0;
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), seed);
    if (!digits.empty() && ec == std::errc() && p == digits.data() + digits.size()) {
      return {StrategyKind::kExampleReorder, seed};
    }
  }
  throw HarnessError(ErrorCode::kUnknownStrategy, "unknown strategy '" + std::string(t) + "'");
}

std::vector<ChatPrompt> diversify(const ChatPrompt& prompt, const std::vector<Strategy>& strategies,
                                  const TemplateSet& templates) {
  std::vector<ChatPrompt> variants;
  for (const auto& s : strategies) {
    ChatPrompt v = prompt;
    v.variant_id = s.id();
    v.dropped_example_ids = prompt.dropped_example_ids;
    auto append_system = [&](std::string_view section) {
      v.messages.front().content += "\n\n" + templates.render(section, {});
    };
    switch (s.kind) {
      case StrategyKind::kSimpleTacticsFirst:
        append_system("strategy_simple_tactics_first");
        break;
      case StrategyKind::kNoLemmaUse:
        append_system("strategy_no_lemma_use");
        break;
      case StrategyKind::kVerboseStepwise:
        append_system("strategy_verbose_stepwise");
        break;
      case StrategyKind::kExampleReorder: {
        const std::size_t k = prompt.example_count();
        std::vector<std::size_t> order(k);
        for (std::size_t i = 0; i < k; ++i) order[i] = i;
        DeterministicRng rng(derive_seed(s.seed, "example-reorder"));
        rng.shuffle(order);
        v.example_ids.clear();
        for (std::size_t i = 0; i < k; ++i) {
          v.example_ids.push_back(prompt.example_ids[order[i]]);
          v.messages[1 + 2 * i] = prompt.messages[1 + 2 * order[i]];
          v.messages[2 + 2 * i] = prompt.messages[2 + 2 * order[i]];
        }
        break;
      }
    }
    variants.push_back(std::move(v));
  }
  return variants;
}

}  // namespace coqharness::prompting

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

#include "coqharness/agent/attempt.hpp"

#include "coqharness/common/error.hpp"
#include "coqharness/common/text.hpp"

namespace coqharness::agent {

using nlohmann::ordered_json;

std::string_view error_category_name(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kCorrect: return "correct";
    case ErrorCategory::kRefusal: return "refusal";
    case ErrorCategory::kHallucinatedReference: return "hallucinated_reference";
    case ErrorCategory::kProofStateMismatch: return "proof_state_mismatch";
    case ErrorCategory::kWrongTactic: return "wrong_tactic";
    case ErrorCategory::kSyntaxError: return "syntax_error";
    case ErrorCategory::kResource: return "resource";
    case ErrorCategory::kOther: return "other";
  }
  return "other";
}

const std::vector<ErrorCategory>& all_error_categories() {
  static const std::vector<ErrorCategory> kAll = {
      ErrorCategory::kCorrect,     ErrorCategory::kRefusal,
      ErrorCategory::kHallucinatedReference, ErrorCategory::kProofStateMismatch,
      ErrorCategory::kWrongTactic, ErrorCategory::kSyntaxError,
      ErrorCategory::kResource,    ErrorCategory::kOther};
  return kAll;
}

std::optional<ErrorCategory> parse_error_category(std::string_view name) {
  for (auto c : all_error_categories()) {
    if (error_category_name(c) == name) return c;
  }
  return std::nullopt;
}

const std::string& AttemptRecord::message() const {
  return failing_step ? failing_step->error_message : error_message;
}

std::size_t AttemptRecord::tool_call_count() const {
  std::size_t n = 0;
  for (const auto& t : turns) n += t.tool_calls.size();
  return n;
}

bool AttemptRecord::operator==(const AttemptRecord& o) const {
  // Timings are deliberately left out.
  return theorem_id == o.theorem_id && config_tag == o.config_tag &&
         variant_id == o.variant_id && candidate_index == o.candidate_index &&
         round == o.round && completion_kind == o.completion_kind &&
         proof_script == o.proof_script && accepted == o.accepted && checked == o.checked &&
         duplicate_of == o.duplicate_of && failing_step == o.failing_step &&
         error_message == o.error_message && prover_rejected == o.prover_rejected &&
         turns == o.turns && category == o.category && missed_simple == o.missed_simple &&
         appended_qed == o.appended_qed && dropped_example_ids == o.dropped_example_ids;
}

ordered_json attempt_to_json(const AttemptRecord& r) {
  ordered_json j;
  j["theorem_id"] = r.theorem_id;
  j["config_tag"] = r.config_tag;
  j["variant_id"] = r.variant_id;
  j["candidate_index"] = r.candidate_index;
  j["round"] = r.round;
  j["completion_kind"] = r.completion_kind;
  j["proof_script"] = r.proof_script;
  j["accepted"] = r.accepted;
  j["checked"] = r.checked;
  j["duplicate_of"] = r.duplicate_of ? ordered_json(*r.duplicate_of) : ordered_json(nullptr);
  if (r.failing_step) {
    j["failing_step"] = {{"index", r.failing_step->index},
                         {"sentence", r.failing_step->sentence},
                         {"error_message", r.failing_step->error_message}};
  } else {
    j["failing_step"] = nullptr;
  }
  j["error_message"] = r.error_message;
  j["prover_rejected"] = r.prover_rejected;
  j["category"] = r.category ? ordered_json(error_category_name(*r.category)) : ordered_json(nullptr);
  j["missed_simple"] = r.missed_simple;
  j["appended_qed"] = r.appended_qed;
  j["dropped_example_ids"] = r.dropped_example_ids;
  j["turns"] = ordered_json::array();
  for (const auto& t : r.turns) {
    ordered_json jt;
    jt["prompt_delta"] = ordered_json::array();
    for (const auto& m : t.prompt_delta) {
      jt["prompt_delta"].push_back({{"role", prompting::role_name(m.role)}, {"content", m.content}});
    }
    jt["completion"] = t.completion;
    jt["tool_calls"] = ordered_json::array();
    for (const auto& c : t.tool_calls) {
      jt["tool_calls"].push_back({{"command", c.command},
                                  {"argument", c.argument},
                                  {"response", c.response},
                                  {"rejected", c.rejected}});
    }
    j["turns"].push_back(std::move(jt));
  }
  return j;
}

AttemptRecord attempt_from_json(const nlohmann::json& j) {
  try {
    AttemptRecord r;
    r.theorem_id = j.at("theorem_id").get<std::string>();
    r.config_tag = j.at("config_tag").get<std::string>();
    r.variant_id = j.at("variant_id").get<std::string>();
    r.candidate_index = j.at("candidate_index").get<std::size_t>();
    r.round = j.at("round").get<int>();
    r.completion_kind = j.at("completion_kind").get<std::string>();
    r.proof_script = j.at("proof_script").get<std::string>();
    r.accepted = j.at("accepted").get<bool>();
    r.checked = j.at("checked").get<bool>();
    if (!j.at("duplicate_of").is_null()) r.duplicate_of = j.at("duplicate_of").get<std::size_t>();
    if (!j.at("failing_step").is_null()) {
      const auto& f = j.at("failing_step");
      r.failing_step = FailingStepInfo{f.at("index").get<std::size_t>(),
                                       f.at("sentence").get<std::string>(),
                                       f.at("error_message").get<std::string>()};
    }
    r.error_message = j.at("error_message").get<std::string>();
    r.prover_rejected = j.at("prover_rejected").get<bool>();
    if (!j.at("category").is_null()) {
      r.category = parse_error_category(j.at("category").get<std::string>());
      if (!r.category) throw HarnessError(ErrorCode::kSchemaViolation, "unknown category");
    }
    r.missed_simple = j.at("missed_simple").get<bool>();
    r.appended_qed = j.at("appended_qed").get<bool>();
    r.dropped_example_ids = j.at("dropped_example_ids").get<std::vector<std::string>>();
    for (const auto& jt : j.at("turns")) {
      Turn t;
      t.prompt_delta = prompting::messages_from_json(jt.at("prompt_delta"));
      t.completion = jt.at("completion").get<std::string>();
      for (const auto& c : jt.at("tool_calls")) {
        t.tool_calls.push_back(ToolCall{c.at("command").get<std::string>(),
                                        c.at("argument").get<std::string>(),
                                        c.at("response").get<std::string>(),
                                        c.at("rejected").get<bool>()});
      }
      r.turns.push_back(std::move(t));
    }
    if (r.accepted && (r.failing_step || r.category != ErrorCategory::kCorrect)) {
      throw HarnessError(ErrorCode::kSchemaViolation,
                         "accepted attempt must have category correct and no failing step");
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw HarnessError(ErrorCode::kSchemaViolation, std::string("attempt record: ") + e.what());
  }
}

std::string attempts_to_jsonl(const std::vector<AttemptRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += attempt_to_json(r).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
    out += '\n';
  }
  return out;
}

std::vector<AttemptRecord> attempts_from_jsonl(std::string_view text_in) {
  std::vector<AttemptRecord> out;
  auto lines = text::split_lines(text_in);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::trim(lines[i]).empty()) continue;
    try {
      out.push_back(attempt_from_json(nlohmann::json::parse(lines[i])));
    } catch (const nlohmann::json::exception& e) {
      throw SchemaViolation(i + 1, e.what());
    } catch (const HarnessError& e) {
      throw SchemaViolation(i + 1, e.what());
    }
  }
  return out;
}

}  // namespace coqharness::agent

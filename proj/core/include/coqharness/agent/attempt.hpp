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

#include "coqharness/prompting/prompt.hpp"

namespace coqharness::agent {

enum class ErrorCategory {
  kCorrect,
  kRefusal,
  kHallucinatedReference,
  kProofStateMismatch,
  kWrongTactic,
  kSyntaxError,
  kResource,
  kOther,
};

std::string_view error_category_name(ErrorCategory category);
std::optional<ErrorCategory> parse_error_category(std::string_view name);
const std::vector<ErrorCategory>& all_error_categories();

struct ToolCall {
  std::string command;
  std::string argument;
  std::string response;  // verbatim prover output, or the rejection message
  bool rejected = false;

  bool operator==(const ToolCall&) const = default;
};

struct Turn {
  std::vector<prompting::ChatMessage> prompt_delta;  // messages added for this call
  std::string completion;
  std::vector<ToolCall> tool_calls;

  bool operator==(const Turn&) const = default;
};

struct FailingStepInfo {
  std::size_t index = 0;
  std::string sentence;
  std::string error_message;

  bool operator==(const FailingStepInfo&) const = default;
};

// Wall-clock measurements; never serialized so reruns compare equal.
struct Timings {
  std::chrono::milliseconds model{0};
  std::chrono::milliseconds check{0};
};

struct AttemptRecord {
  std::string theorem_id;
  std::string config_tag;
  std::string variant_id = "base";
  std::size_t candidate_index = 0;
  int round = 0;  // repair round, 0 for the initial samples
  std::string completion_kind = "proof";  // prompting::CompletionKind name
  std::string proof_script;
  bool accepted = false;
  // Set when the script went to the prover.
  bool checked = false;
  // Candidate index of an identical earlier script whose check was reused.
  std::optional<std::size_t> duplicate_of;
  std::optional<FailingStepInfo> failing_step;
  // Prover, parser or harness message when there is no failing step.
  std::string error_message;
  bool prover_rejected = false;
  std::vector<Turn> turns;
  std::optional<ErrorCategory> category;
  bool missed_simple = false;
  bool appended_qed = false;
  std::vector<std::string> dropped_example_ids;
  Timings timings;

  // failing_step message when present, otherwise error_message.
  const std::string& message() const;
  std::size_t tool_call_count() const;

  bool operator==(const AttemptRecord& other) const;
};

nlohmann::ordered_json attempt_to_json(const AttemptRecord& record);
// Throws HarnessError(kSchemaViolation).
AttemptRecord attempt_from_json(const nlohmann::json& j);

std::string attempts_to_jsonl(const std::vector<AttemptRecord>& records);
// Throws SchemaViolation with the 1-based line number.
std::vector<AttemptRecord> attempts_from_jsonl(std::string_view text);

}  // namespace coqharness::agent

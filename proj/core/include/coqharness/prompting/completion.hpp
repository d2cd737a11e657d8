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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "coqharness/coq/sentence.hpp"

namespace coqharness::prompting {

enum class CompletionKind { kProof, kRefusal, kEmpty, kMalformed };

std::string_view completion_kind_name(CompletionKind kind);
std::optional<CompletionKind> parse_completion_kind(std::string_view name);

struct ParsedCompletion {
  CompletionKind kind = CompletionKind::kEmpty;
  std::optional<std::string> proof_script;
  std::optional<std::string> refusal_text;
  std::string raw;
  // Repairs applied to produce proof_script.
  bool appended_qed = false;
  bool dropped_trailing_text = false;
  bool dropped_restated_theorem = false;
  std::string detail;  // why a completion is malformed
  std::vector<coq::Sentence> sentences;  // of proof_script

  // Sentences after a leading "Proof." header.
  std::size_t step_count() const;
};

// Case-insensitive phrases that mark a completion as a request for more
// information rather than a proof.
const std::vector<std::string>& refusal_phrases();

// Strips code fences and a restated theorem (which must match
// expected_statement up to whitespace when given), then classifies. A proof
// missing its closing command gets "Qed." appended. Never throws.
ParsedCompletion parse_completion(std::string_view raw,
                                  std::optional<std::string_view> expected_statement = std::nullopt);

// Contents of the first fenced code block, or the whole text when there is
// none.
std::string strip_code_fences(std::string_view text);

}  // namespace coqharness::prompting

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
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "coqharness/agent/attempt.hpp"
#include "coqharness/corpus/corpus.hpp"

namespace coqharness::eval {

using agent::ErrorCategory;

struct PatternRule {
  ErrorCategory category = ErrorCategory::kOther;
  std::string pattern;
  std::regex regex;
};

// Rule cascade: accepted -> correct, refusal -> refusal, malformed ->
// syntax_error, then the pattern rules over the attempt's message (first
// match wins), then wrong_tactic for any other prover rejection and other
// for everything else.
class FailureClassifier {
 public:
  // Lines "<category> <regex>"; '#' starts a comment line. Throws
  // HarnessError(kConfigError) naming the offending line.
  static FailureClassifier parse(std::string_view text);
  static FailureClassifier load(const std::filesystem::path& path);
  static const FailureClassifier& defaults();

  ErrorCategory classify(const agent::AttemptRecord& attempt) const;
  // Sets category and the missed_simple flag (failed attempt on a theorem
  // whose reference proof has at most two tactics).
  void finalize(agent::AttemptRecord& attempt, const corpus::TheoremRecord& target) const;

  const std::vector<PatternRule>& rules() const { return rules_; }

 private:
  std::vector<PatternRule> rules_;
};

ErrorCategory classify_failure(const agent::AttemptRecord& attempt);

inline constexpr std::size_t kMissedSimpleMaxTactics = 2;

}  // namespace coqharness::eval

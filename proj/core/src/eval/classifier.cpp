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

#include "coqharness/eval/classifier.hpp"

#include <fstream>
#include <sstream>

#include "coqharness/common/error.hpp"
#include "coqharness/common/text.hpp"

namespace coqharness::eval {

namespace {

#include "default_failure_patterns.inc"

}  // namespace

FailureClassifier FailureClassifier::parse(std::string_view source) {
  FailureClassifier c;
  auto lines = text::split_lines(source);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto line = text::trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    auto name = text::first_word(line);
    auto category = agent::parse_error_category(name);
    const std::string where = "pattern file line " + std::to_string(i + 1);
    if (!category || *category == ErrorCategory::kCorrect) {
      throw HarnessError(ErrorCode::kConfigError, where + ": bad category '" + std::string(name) + "'");
    }
    std::string pattern = text::trim_copy(line.substr(name.size()));
    if (pattern.empty()) throw HarnessError(ErrorCode::kConfigError, where + ": empty pattern");
    try {
      c.rules_.push_back(PatternRule{*category, pattern,
                                     std::regex(pattern, std::regex::ECMAScript | std::regex::icase)});
    } catch (const std::regex_error& e) {
      throw HarnessError(ErrorCode::kConfigError, where + ": " + e.what());
    }
  }
  return c;
}

FailureClassifier FailureClassifier::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw HarnessError(ErrorCode::kIoError, "cannot read pattern file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

const FailureClassifier& FailureClassifier::defaults() {
  static const FailureClassifier kDefaults = parse(kDefaultFailurePatterns);
  return kDefaults;
}

ErrorCategory FailureClassifier::classify(const agent::AttemptRecord& a) const {
  if (a.accepted) return ErrorCategory::kCorrect;
  if (a.completion_kind == "refusal") return ErrorCategory::kRefusal;
  if (a.completion_kind == "malformed") return ErrorCategory::kSyntaxError;
  const std::string& msg = a.message();
  for (const auto& rule : rules_) {
    if (std::regex_search(msg, rule.regex)) return rule.category;
  }
  return a.prover_rejected ? ErrorCategory::kWrongTactic : ErrorCategory::kOther;
}

void FailureClassifier::finalize(agent::AttemptRecord& a, const corpus::TheoremRecord& target) const {
  a.category = classify(a);
  a.missed_simple = !a.accepted && target.tactic_count() <= kMissedSimpleMaxTactics;
}

ErrorCategory classify_failure(const agent::AttemptRecord& attempt) {
  return FailureClassifier::defaults().classify(attempt);
}

}  // namespace coqharness::eval

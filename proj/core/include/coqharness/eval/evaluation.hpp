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

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "coqharness/agent/agent.hpp"
#include "coqharness/agent/attempt.hpp"
#include "coqharness/agent/run_config.hpp"
#include "coqharness/corpus/corpus.hpp"

namespace coqharness::eval {

struct ConfigMetrics {
  std::size_t n_attempts = 0;
  // Distinct accepted scripts per theorem (exact text).
  std::size_t n_correct_proofs = 0;
  std::size_t n_raw_accepted = 0;
  std::size_t n_proven_theorems = 0;
  std::size_t n_missed_simple = 0;
  std::map<ErrorCategory, std::size_t> taxonomy;  // every category present, zero or not
  std::set<std::string> proven_ids;

  // Percentage of attempts classified as refusals; 0 when there are none.
  double refusal_share() const;
  bool operator==(const ConfigMetrics&) const = default;
};

ConfigMetrics compute_metrics(const std::vector<agent::AttemptRecord>& attempts);

struct EvalReport {
  std::vector<std::string> config_order;
  std::map<std::string, ConfigMetrics> per_config;
  // Symmetric, diagonal included: |proven(a) & proven(b)|.
  std::map<std::pair<std::string, std::string>, std::size_t> coincidence;
  std::string manifest_hash;
  std::string corpus_hash;
  std::size_t n_test_theorems = 0;
  nlohmann::ordered_json effective_config = nlohmann::ordered_json::object();

  std::size_t coincidence_at(const std::string& a, const std::string& b) const;
  const ConfigMetrics& metrics(const std::string& tag) const;
};

using AttemptsByConfig = std::map<std::string, std::vector<agent::AttemptRecord>>;

// Pure fold; the result does not depend on the order of attempts.
EvalReport aggregate(const std::vector<std::string>& config_order, const AttemptsByConfig& attempts,
                     std::size_t n_test_theorems, std::string manifest_hash,
                     std::string corpus_hash);

struct EvalRun {
  EvalReport report;
  AttemptsByConfig attempts;
};

// Every config over every test theorem. deps.corpus is replaced by `corpus`.
EvalRun run_eval(const corpus::Corpus& corpus, const std::vector<agent::RunConfig>& manifest,
                 agent::AgentDeps deps, std::size_t workers = 1);

}  // namespace coqharness::eval

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

#include <functional>
#include <memory>
#include <vector>

#include "coqharness/agent/attempt.hpp"
#include "coqharness/agent/run_config.hpp"
#include "coqharness/coq/session.hpp"
#include "coqharness/corpus/corpus.hpp"
#include "coqharness/eval/classifier.hpp"
#include "coqharness/model/provider.hpp"
#include "coqharness/prompting/templates.hpp"
#include "coqharness/retriever/index.hpp"

namespace coqharness::agent {

// Starts a prover session positioned just before the target statement.
using SessionFactory =
    std::function<std::unique_ptr<coq::ProverSession>(const corpus::TheoremRecord& target)>;

// Session whose prelude is the target's preceding file text. The factory is
// safe to call from several threads.
SessionFactory make_session_factory(coq::SessionConfig base);

struct AgentDeps {
  const corpus::Corpus* corpus = nullptr;
  const retriever::Index* index = nullptr;             // needed by similarity selection
  const retriever::EmbeddedIndex* embedded = nullptr;  // used when use_embedding is set
  model::Provider* provider = nullptr;
  SessionFactory sessions;
  const prompting::TemplateSet* templates = nullptr;       // defaults when null
  const eval::FailureClassifier* classifier = nullptr;     // defaults when null
};

// Examples and lemmas for the target according to the mode, then the prompt.
prompting::ChatPrompt make_prompt(const corpus::TheoremRecord& target, const RunConfig& config,
                                  const AgentDeps& deps, bool interactive = false);

// n samples from one prompt; each proof candidate is checked once per
// distinct script. Provider failures become per-candidate records, except
// budget exhaustion and replay cache misses, which propagate.
std::vector<AttemptRecord> prove_one_shot(const corpus::TheoremRecord& target,
                                          const RunConfig& config, const AgentDeps& deps);

// Same, for an already built prompt (used by ensembles).
std::vector<AttemptRecord> prove_one_shot(const corpus::TheoremRecord& target,
                                          const RunConfig& config, const AgentDeps& deps,
                                          const prompting::ChatPrompt& prompt, int samples,
                                          std::size_t first_candidate_index = 0);

// Turn-based proving with proof-state feedback and QUERY tool calls.
AttemptRecord prove_interactive(const corpus::TheoremRecord& target, const RunConfig& config,
                                const AgentDeps& deps);

// Round 0 is prove_one_shot; each later round asks for one fix per distinct
// failing script, stopping at the first accepted candidate.
std::vector<AttemptRecord> repair_loop(const corpus::TheoremRecord& target,
                                       const RunConfig& config, const AgentDeps& deps);

// Base prompt plus one variant per strategy, splitting n between them with
// the remainder going to the base prompt.
std::vector<AttemptRecord> run_ensemble(const corpus::TheoremRecord& target,
                                        const RunConfig& config, const AgentDeps& deps);

// Samples per ensemble member: index 0 is the base prompt.
std::vector<int> ensemble_shares(int n, std::size_t strategies);

// Dispatches on config.loop.
std::vector<AttemptRecord> prove_theorem(const corpus::TheoremRecord& target,
                                         const RunConfig& config, const AgentDeps& deps);

// Proves every target on a pool of `workers` threads and returns the records
// in target order. The first exception (in target order) is rethrown after
// all workers stop.
std::vector<AttemptRecord> prove_all(const std::vector<const corpus::TheoremRecord*>& targets,
                                     const RunConfig& config, const AgentDeps& deps,
                                     std::size_t workers = 1);

inline constexpr std::size_t kMaxTacticsPerTurn = 5;
inline constexpr int kMaxStalledTurns = 2;

}  // namespace coqharness::agent

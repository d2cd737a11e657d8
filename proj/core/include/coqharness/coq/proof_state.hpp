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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace coqharness::coq {

// One line of the hypothesis block, e.g. "A, X, Y : Type". Local
// definitions ("x := v : T") keep their body in `value`.
struct Hypothesis {
  std::vector<std::string> names;
  std::string type_text;
  std::optional<std::string> value;

  bool operator==(const Hypothesis&) const = default;
};

struct GoalIndex {
  std::size_t current = 1;
  std::size_t total = 1;

  bool operator==(const GoalIndex&) const = default;
};

// Snapshot of an open proof. Multi-line hypothesis types and goals are
// stored one logical line per '\n' with display indentation removed.
struct ProofState {
  std::vector<Hypothesis> hypotheses;
  std::vector<std::string> goals;
  GoalIndex goal_index;

  bool operator==(const ProofState&) const = default;

  // Every hypothesis name in display order.
  std::vector<std::string> hypothesis_names() const;
  bool has_hypothesis(std::string_view name) const;
};

// Parses a goal display in either the emacs layout
// ("____(1/2)" separators before every goal) or the plain layout
// ("====" separator, later goals introduced by "goal N is:").
// Throws HarnessError(kMalformedState) when no goal separator is present,
// a hypothesis line cannot be read, or a name repeats.
ProofState parse_proof_state(std::string_view raw);

// Emacs-layout rendering; parse_proof_state(render_proof_state(s)) == s.
std::string render_proof_state(const ProofState& state);

// True when the prover display announces that no goals remain.
bool is_no_more_goals(std::string_view raw);

}  // namespace coqharness::coq

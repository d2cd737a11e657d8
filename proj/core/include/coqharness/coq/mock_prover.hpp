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
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "coqharness/coq/proof_state.hpp"
#include "coqharness/coq/session.hpp"

namespace coqharness::coq {

// A goal display the mock reports after a specific accepted tactic prefix.
struct MockScriptedState {
  std::vector<std::string> after;  // normalized tactic sentences
  std::vector<Hypothesis> hypotheses;
  std::vector<std::string> goals;
};

struct MockTheorem {
  std::optional<std::string> goal;
  std::vector<Hypothesis> hypotheses;
  // Each accepted script lists tactic sentences without Proof./Qed.
  std::vector<std::vector<std::string>> accepted;
  // Normalized tactic text -> verbatim error message.
  std::map<std::string, std::string> errors;
  std::vector<MockScriptedState> states;
  std::optional<std::string> default_error;
};

// Behaviour table of the hermetic prover. JSON layout:
//
//   {
//     "version": 1,
//     "identifiers": ["incl", "comp"],
//     "libraries": ["Relations"],
//     "queries": {"Print G": "G = fun R => ..."},
//     "theorems": {
//       "weak_refl": {
//         "goal": "forall x, Weak T x x",
//         "hypotheses": [{"names": ["T"], "type": "relation A"}],
//         "accepted": [["intros x.", "constructor.", "reflexivity."]],
//         "errors": {"exact O.": "..."},
//         "states": [{"after": ["intros x."], "hypotheses": [], "goals": ["Weak T x x"]}],
//         "default_error": "..."
//       }
//     }
//   }
//
// Every field is optional.
class MockTable {
 public:
  MockTable() = default;

  // Throws HarnessError(kConfigError) on a schema mismatch.
  static MockTable from_json(const nlohmann::json& doc);
  static MockTable load(const std::filesystem::path& path);

  const MockTheorem* find_theorem(const std::string& name) const;
  std::optional<std::string> find_query(const std::string& key) const;

  const std::set<std::string>& identifiers() const { return identifiers_; }
  const std::set<std::string>& libraries() const { return libraries_; }

  void add_theorem(const std::string& name, MockTheorem theorem) {
    theorems_[name] = std::move(theorem);
  }
  void add_query(const std::string& key, const std::string& response) {
    queries_[key] = response;
  }
  void add_identifier(const std::string& name) { identifiers_.insert(name); }

 private:
  std::set<std::string> identifiers_;
  std::set<std::string> libraries_;
  std::map<std::string, std::string> queries_;
  std::map<std::string, MockTheorem> theorems_;
};

// Introduction helpers shared with tests: number of leading products
// (forall binders and top-level arrows) that intro can consume.
std::size_t count_introducible(const std::string& goal);

class MockProverSession final : public ProverSession {
 public:
  explicit MockProverSession(std::shared_ptr<const MockTable> table);

  // Runs the prelude with proof checking disabled: earlier proofs in a file
  // are trusted, as the real prover would have compiled them.
  void run_prelude(const std::vector<Sentence>& prelude);

  StepResult execute(const Sentence& sentence) override;
  std::string query(QueryCommand command, std::string_view argument) override;
  std::optional<ProofState> current_state() override;
  Checkpoint mark() override;
  void rewind(Checkpoint checkpoint) override;

 private:
  struct OpenProof {
    std::string name;
    const MockTheorem* entry = nullptr;
    std::vector<std::string> steps;
    std::vector<Hypothesis> hypotheses;
    std::vector<std::string> goals;
  };

  struct Snapshot {
    std::set<std::string> globals;
    std::vector<Hypothesis> section_hypotheses;
    std::vector<std::size_t> section_marks;
    std::optional<OpenProof> proof;
  };

  StepResult execute_vernacular(const std::string& body);
  StepResult execute_in_proof(const std::string& body);
  StepResult execute_tactic(const std::string& norm);
  StepResult open_proof(const std::string& name, const std::string& statement,
                        bool definition_style);
  std::optional<std::string> try_intro(const std::string& norm,
                                       OpenProof& proof) const;
  std::optional<std::string> unknown_reference(const std::string& norm,
                                               const OpenProof& proof) const;
  bool is_known(const std::string& ident, const OpenProof& proof) const;
  StepResult ok_with_state() const;
  std::optional<std::string> run_query(const std::string& command,
                                       const std::string& argument,
                                       bool& rejected) const;

  std::shared_ptr<const MockTable> table_;
  Snapshot current_;
  bool trusted_ = false;
  std::map<Checkpoint, Snapshot> checkpoints_;
  Checkpoint next_checkpoint_ = 1;
};

}  // namespace coqharness::coq

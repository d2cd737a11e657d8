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
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "coqharness/coq/proof_state.hpp"
#include "coqharness/coq/sentence.hpp"

namespace coqharness::coq {

class MockTable;

enum class QueryCommand { kPrint, kCheck, kSearch, kAbout, kLocate };

std::string_view query_command_name(QueryCommand command);
// Exact, case-sensitive match against the allow-list.
std::optional<QueryCommand> parse_query_command(std::string_view name);

enum class StepOutcome { kOk, kError };

struct StepResult {
  StepOutcome outcome = StepOutcome::kOk;
  // Present on success while goals remain; nullopt outside a proof and once
  // every goal is closed.
  std::optional<ProofState> state;
  // Prover output, verbatim. Never empty on error.
  std::string message;
  // Set only when a Qed./Defined. was accepted.
  bool proof_complete = false;

  bool ok() const { return outcome == StepOutcome::kOk; }
};

// Message used for steps that exceed the per-step timeout.
inline constexpr std::string_view kTimeoutMessage = "TIMEOUT";

enum class Backend { kReal, kMock };

struct SessionConfig {
  Backend backend = Backend::kMock;
  // Shell command; "{workdir}" is replaced with workdir.
  std::string prover_command = "coqtop -emacs -quiet";
  // Regex that matches the end-of-response prompt of the real toplevel. The
  // first capture group must be the state number.
  std::string prompt_pattern =
      R"(<prompt>[^<]* < (\d+) \|([^|]*)\| (\d+) < </prompt>)";
  std::vector<Sentence> prelude;
  std::chrono::milliseconds timeout_per_step{20000};
  std::filesystem::path workdir = ".";
  // Behaviour table for the mock backend; an empty table when null.
  std::shared_ptr<const MockTable> mock_table;

  // Throws HarnessError(kConfigError) on a non-positive timeout or an empty
  // command for the real backend.
  void validate() const;
};

using Checkpoint = std::uint64_t;

// One prover session. Not thread-safe: use one per worker.
class ProverSession {
 public:
  virtual ~ProverSession() = default;

  // Runs one sentence. On error the session is left as it was before the
  // call. Throws HarnessError(kSessionDead) when the prover cannot be
  // recovered. A step that exceeds the timeout is reported as an error with
  // message "TIMEOUT" after the session is restored.
  virtual StepResult execute(const Sentence& sentence) = 0;

  // Informational command; never changes the proof state. Throws
  // HarnessError(kQueryRejected) when the prover reports an error.
  virtual std::string query(QueryCommand command, std::string_view argument) = 0;

  // Current goals, nullopt outside a proof or when no goals remain.
  virtual std::optional<ProofState> current_state() = 0;

  virtual Checkpoint mark() = 0;
  virtual void rewind(Checkpoint checkpoint) = 0;
};

// Starts a session and executes the prelude. Throws PreludeError on the
// first rejected prelude sentence and HarnessError(kSpawnFailure) when the
// real toplevel cannot be started.
std::unique_ptr<ProverSession> start_session(const SessionConfig& config);

struct FailingStep {
  std::size_t index = 0;
  Sentence sentence;

  bool operator==(const FailingStep&) const = default;
};

struct ProofCheckResult {
  bool accepted = false;
  // The statement itself was rejected; failing_step is then absent.
  bool statement_rejected = false;
  std::optional<FailingStep> failing_step;
  std::string message;
  // States observed after each successful step.
  std::vector<ProofState> states;

  bool operator==(const ProofCheckResult&) const = default;
};

// Executes statement + proof and reports acceptance. The session is rewound
// to its previous state afterwards. Throws LexicalError when the script does
// not segment.
ProofCheckResult check_proof(ProverSession& session,
                             std::string_view theorem_statement,
                             std::string_view proof_script);

}  // namespace coqharness::coq

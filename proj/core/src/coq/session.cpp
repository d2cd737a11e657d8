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

#include "coqharness/coq/session.hpp"

#include "coqharness/common/error.hpp"
#include "coqharness/coq/coqtop_session.hpp"
#include "coqharness/coq/mock_prover.hpp"

namespace coqharness::coq {

std::string_view query_command_name(QueryCommand command) {
  switch (command) {
    case QueryCommand::kPrint: return "Print";
    case QueryCommand::kCheck: return "Check";
    case QueryCommand::kSearch: return "Search";
    case QueryCommand::kAbout: return "About";
    case QueryCommand::kLocate: return "Locate";
  }
  return "Print";
}

std::optional<QueryCommand> parse_query_command(std::string_view name) {
  if (name == "Print") return QueryCommand::kPrint;
  if (name == "Check") return QueryCommand::kCheck;
  if (name == "Search") return QueryCommand::kSearch;
  if (name == "About") return QueryCommand::kAbout;
  if (name == "Locate") return QueryCommand::kLocate;
  return std::nullopt;
}

void SessionConfig::validate() const {
  if (timeout_per_step.count() <= 0) {
    throw HarnessError(ErrorCode::kConfigError, "timeout_per_step must be positive");
  }
  if (backend == Backend::kReal && prover_command.empty()) {
    throw HarnessError(ErrorCode::kConfigError,
                       "prover_command is required for the real backend");
  }
}

std::unique_ptr<ProverSession> start_session(const SessionConfig& config) {
  config.validate();
  if (config.backend == Backend::kMock) {
    auto session = std::make_unique<MockProverSession>(config.mock_table);
    session->run_prelude(config.prelude);
    return session;
  }
  return std::make_unique<CoqtopSession>(config);
}

ProofCheckResult check_proof(ProverSession& session, std::string_view theorem_statement,
                             std::string_view proof_script) {
  auto sentences = segment_sentences(proof_script);
  ProofCheckResult result;
  const Checkpoint checkpoint = session.mark();

  StepResult opened = session.execute(make_sentence(theorem_statement));
  if (!opened.ok()) {
    result.statement_rejected = true;
    result.message = opened.message;
    session.rewind(checkpoint);
    return result;
  }
  if (opened.state) result.states.push_back(*opened.state);

  bool completed = false;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    StepResult step = session.execute(sentences[i]);
    if (!step.ok()) {
      result.failing_step = FailingStep{i, sentences[i]};
      result.message = step.message;
      break;
    }
    if (step.state) result.states.push_back(*step.state);
    if (step.proof_complete) {
      completed = true;
      if (i + 1 < sentences.size()) {
        result.failing_step = FailingStep{i + 1, sentences[i + 1]};
        result.message = "Trailing sentences after the proof was closed.";
        completed = false;
      }
      break;
    }
  }
  if (!result.failing_step) {
    if (completed) {
      result.accepted = true;
    } else {
      result.message = "Incomplete proof: the script ended without a closing command "
                       "being accepted.";
    }
  }
  session.rewind(checkpoint);
  return result;
}

}  // namespace coqharness::coq

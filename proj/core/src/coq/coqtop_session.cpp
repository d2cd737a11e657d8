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

#include "coqharness/coq/coqtop_session.hpp"

#include <regex>

#include "coqharness/common/error.hpp"
#include "coqharness/common/text.hpp"
#include "subprocess.hpp"

namespace coqharness::coq {

namespace {

std::string substitute_workdir(std::string command, const std::string& workdir) {
  const std::string key = "{workdir}";
  for (auto pos = command.find(key); pos != std::string::npos;
       pos = command.find(key, pos + workdir.size())) {
    command.replace(pos, key.size(), workdir);
  }
  return command;
}

std::string one_line(std::string_view sentence) {
  std::string out(sentence);
  for (char& c : out) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return out;
}

}  // namespace

std::string CoqtopSession::clean_output(std::string_view raw) {
  static const std::regex kTags(R"(</?(infomsg|warning|error|prompt|feedback)[^>]*>)");
  std::string s = std::regex_replace(std::string(raw), kTags, "");
  return std::string(text::trim(s));
}

bool CoqtopSession::looks_like_error(std::string_view output) {
  return output.rfind("Error:", 0) == 0 ||
         output.find("\nError:") != std::string_view::npos ||
         output.find("Toplevel input, characters") != std::string_view::npos ||
         output.rfind("Syntax error", 0) == 0 ||
         output.find("\nSyntax error") != std::string_view::npos;
}

CoqtopSession::CoqtopSession(SessionConfig config)
    : config_(std::move(config)), prompt_(config_.prompt_pattern) {
  spawn();
  for (std::size_t i = 0; i < config_.prelude.size(); ++i) {
    StepResult r = execute(config_.prelude[i]);
    if (!r.ok()) throw PreludeError(i, r.message);
  }
  prelude_state_ = state_number_;
  history_.clear();
  last_state_.reset();
}

CoqtopSession::~CoqtopSession() = default;

void CoqtopSession::spawn() {
  std::string command =
      substitute_workdir(config_.prover_command, config_.workdir.string());
  process_ = std::make_unique<detail::Subprocess>(command, config_.workdir);
  auto first = process_->read_until(prompt_, config_.timeout_per_step);
  if (first.status != detail::Subprocess::ReadStatus::kMatched) {
    std::string detail = clean_output(first.before);
    process_.reset();
    throw HarnessError(ErrorCode::kSpawnFailure,
                       "prover did not produce a prompt: " +
                           (detail.empty() ? command : detail));
  }
  state_number_ = first.groups.empty() ? 0 : std::stoull(first.groups[0]);
  proof_depth_ = first.groups.size() >= 3 ? std::stoi(first.groups[2]) : 0;
}

CoqtopSession::Response CoqtopSession::send(const std::string& command) {
  Response resp;
  if (!process_ || !process_->write(command + "\n")) {
    resp.died = true;
    return resp;
  }
  auto r = process_->read_until(prompt_, config_.timeout_per_step);
  using RS = detail::Subprocess::ReadStatus;
  if (r.status == RS::kTimeout) {
    resp.timed_out = true;
    return resp;
  }
  if (r.status == RS::kEof) {
    resp.died = true;
    resp.output = clean_output(r.before);
    return resp;
  }
  resp.output = clean_output(r.before);
  resp.state_number = r.groups.empty() ? state_number_ : std::stoull(r.groups[0]);
  resp.proof_depth = r.groups.size() >= 3 ? std::stoi(r.groups[2]) : 0;
  return resp;
}

void CoqtopSession::restart_and_replay() {
  auto saved = history_;
  process_.reset();
  try {
    spawn();
    for (const auto& s : config_.prelude) {
      auto resp = send(one_line(s.text));
      if (resp.died || resp.timed_out || looks_like_error(resp.output)) {
        throw HarnessError(ErrorCode::kSessionDead, "prelude replay failed");
      }
      state_number_ = resp.state_number;
      proof_depth_ = resp.proof_depth;
    }
    prelude_state_ = state_number_;
    history_.clear();
    for (auto entry : saved) {
      auto resp = send(one_line(entry.text));
      if (resp.died || resp.timed_out || looks_like_error(resp.output)) {
        throw HarnessError(ErrorCode::kSessionDead, "history replay failed");
      }
      state_number_ = resp.state_number;
      proof_depth_ = resp.proof_depth;
      entry.state_after = state_number_;
      history_.push_back(std::move(entry));
    }
  } catch (const HarnessError& e) {
    process_.reset();
    throw HarnessError(ErrorCode::kSessionDead,
                       std::string("prover could not be restarted: ") + e.what());
  }
}

StepResult CoqtopSession::execute(const Sentence& sentence) {
  const std::uint64_t before = state_number_;
  Response resp = send(one_line(sentence.text));
  StepResult result;
  if (resp.timed_out || resp.died) {
    restart_and_replay();
    result.outcome = StepOutcome::kError;
    result.message = resp.timed_out ? std::string(kTimeoutMessage)
                                    : "prover process died: " + resp.output;
    if (result.message.empty()) result.message = "prover process died";
    return result;
  }
  if (looks_like_error(resp.output)) {
    result.outcome = StepOutcome::kError;
    result.message = resp.output.empty() ? "Error" : resp.output;
    if (resp.state_number != before) {
      send("BackTo " + std::to_string(before) + ".");
    }
    state_number_ = before;
    return result;
  }
  state_number_ = resp.state_number;
  const int depth_before = proof_depth_;
  proof_depth_ = resp.proof_depth;
  result.message = resp.output;
  if (proof_depth_ > 0 && !is_no_more_goals(resp.output)) {
    try {
      result.state = parse_proof_state(resp.output);
    } catch (const HarnessError&) {
      // Some commands inside a proof print no goals; keep the previous ones.
      result.state = last_state_;
    }
  }
  result.proof_complete = is_checked_closing_command(sentence.text) &&
                          depth_before > 0 && proof_depth_ < depth_before;
  last_state_ = result.state;
  history_.push_back(HistoryEntry{sentence.text, state_number_, last_state_});
  return result;
}

std::string CoqtopSession::query(QueryCommand command, std::string_view argument) {
  if (text::trim(argument).empty()) {
    throw HarnessError(ErrorCode::kQueryRejected, "empty query argument");
  }
  std::string arg(text::trim(argument));
  if (!arg.empty() && arg.back() == '.') arg.pop_back();
  Response resp = send(std::string(query_command_name(command)) + " " + one_line(arg) + ".");
  if (resp.timed_out || resp.died) {
    restart_and_replay();
    throw HarnessError(ErrorCode::kQueryRejected,
                       resp.timed_out ? std::string(kTimeoutMessage)
                                      : std::string("prover process died"));
  }
  if (looks_like_error(resp.output)) {
    throw HarnessError(ErrorCode::kQueryRejected, resp.output);
  }
  // Queries may consume a state number without changing the proof.
  state_number_ = resp.state_number;
  return resp.output;
}

std::optional<ProofState> CoqtopSession::current_state() { return last_state_; }

Checkpoint CoqtopSession::mark() { return state_number_; }

void CoqtopSession::rewind(Checkpoint checkpoint) {
  if (checkpoint == state_number_) return;
  Response resp = send("BackTo " + std::to_string(checkpoint) + ".");
  if (resp.timed_out || resp.died || looks_like_error(resp.output)) {
    throw HarnessError(ErrorCode::kSessionDead,
                       "BackTo " + std::to_string(checkpoint) + " failed: " + resp.output);
  }
  state_number_ = resp.state_number;
  proof_depth_ = resp.proof_depth;
  while (!history_.empty() && history_.back().state_after > checkpoint) {
    history_.pop_back();
  }
  last_state_ = history_.empty() ? std::nullopt : history_.back().goals_after;
}

}  // namespace coqharness::coq

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

#include <memory>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "coqharness/coq/session.hpp"

namespace coqharness::coq {

namespace detail {
class Subprocess;
}

// Line-oriented driver for a Coq toplevel in emacs-prompt mode. Each
// sentence is written to stdin; the response runs up to the next prompt,
// whose state number is used for BackTo-based rollback.
class CoqtopSession final : public ProverSession {
 public:
  explicit CoqtopSession(SessionConfig config);
  ~CoqtopSession() override;

  StepResult execute(const Sentence& sentence) override;
  std::string query(QueryCommand command, std::string_view argument) override;
  std::optional<ProofState> current_state() override;
  Checkpoint mark() override;
  void rewind(Checkpoint checkpoint) override;

  // Strips emacs-mode markup tags such as <infomsg>.
  static std::string clean_output(std::string_view raw);
  static bool looks_like_error(std::string_view output);

 private:
  struct Response {
    bool timed_out = false;
    bool died = false;
    std::string output;
    std::uint64_t state_number = 0;
    int proof_depth = 0;
  };
  struct HistoryEntry {
    std::string text;
    std::uint64_t state_after = 0;
    std::optional<ProofState> goals_after;
  };

  void spawn();
  Response send(const std::string& command);
  void restart_and_replay();

  SessionConfig config_;
  std::regex prompt_;
  std::unique_ptr<detail::Subprocess> process_;
  std::uint64_t state_number_ = 0;
  int proof_depth_ = 0;
  std::uint64_t prelude_state_ = 0;
  std::vector<HistoryEntry> history_;
  std::optional<ProofState> last_state_;
};

}  // namespace coqharness::coq

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
#include <filesystem>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

namespace coqharness::coq::detail {

// Child process running `/bin/sh -c command` with stdin and merged
// stdout/stderr connected over a socket pair.
class Subprocess {
 public:
  Subprocess(const std::string& shell_command, const std::filesystem::path& workdir);
  ~Subprocess();

  Subprocess(const Subprocess&) = delete;
  Subprocess& operator=(const Subprocess&) = delete;

  // Returns false when the child is gone.
  bool write(std::string_view data);

  enum class ReadStatus { kMatched, kTimeout, kEof };
  struct ReadResult {
    ReadStatus status = ReadStatus::kEof;
    std::string before;  // output preceding the match
    std::string matched_text;
    std::vector<std::string> groups;  // capture groups of the match
  };

  // Accumulates output until `pattern` matches; consumed bytes up to the end
  // of the match are removed from the buffer.
  ReadResult read_until(const std::regex& pattern, std::chrono::milliseconds timeout);

  void terminate();

 private:
  int fd_ = -1;
  int pid_ = -1;
  std::string buffer_;
};

}  // namespace coqharness::coq::detail

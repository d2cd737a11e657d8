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

#include "subprocess.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "coqharness/common/error.hpp"

namespace coqharness::coq::detail {

Subprocess::Subprocess(const std::string& shell_command,
                       const std::filesystem::path& workdir) {
  int fds[2];
  if (socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, fds) != 0) {
    throw HarnessError(ErrorCode::kSpawnFailure,
                       std::string("socketpair: ") + std::strerror(errno));
  }
  pid_t pid = fork();
  if (pid < 0) {
    close(fds[0]);
    close(fds[1]);
    throw HarnessError(ErrorCode::kSpawnFailure,
                       std::string("fork: ") + std::strerror(errno));
  }
  if (pid == 0) {
    dup2(fds[1], STDIN_FILENO);
    dup2(fds[1], STDOUT_FILENO);
    dup2(fds[1], STDERR_FILENO);
    if (!workdir.empty() && chdir(workdir.c_str()) != 0) _exit(126);
    execl("/bin/sh", "sh", "-c", shell_command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(fds[1]);
  fd_ = fds[0];
  pid_ = pid;
}

Subprocess::~Subprocess() { terminate(); }

void Subprocess::terminate() {
  if (fd_ >= 0) {
    close(fd_);
    fd_ = -1;
  }
  if (pid_ > 0) {
    kill(pid_, SIGKILL);
    int status = 0;
    waitpid(pid_, &status, 0);
    pid_ = -1;
  }
}

bool Subprocess::write(std::string_view data) {
  if (fd_ < 0) return false;
  while (!data.empty()) {
    ssize_t n = send(fd_, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

Subprocess::ReadResult Subprocess::read_until(const std::regex& pattern,
                                              std::chrono::milliseconds timeout) {
  using Clock = std::chrono::steady_clock;
  const auto deadline = Clock::now() + timeout;
  ReadResult result;
  while (true) {
    std::smatch m;
    if (std::regex_search(buffer_, m, pattern)) {
      result.status = ReadStatus::kMatched;
      result.before = m.prefix().str();
      result.matched_text = m.str();
      for (std::size_t g = 1; g < m.size(); ++g) result.groups.push_back(m[g].str());
      buffer_ = m.suffix().str();
      return result;
    }
    if (fd_ < 0) {
      result.status = ReadStatus::kEof;
      result.before = std::move(buffer_);
      buffer_.clear();
      return result;
    }
    auto now = Clock::now();
    if (now >= deadline) {
      result.status = ReadStatus::kTimeout;
      result.before = buffer_;
      return result;
    }
    auto remaining =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now);
    pollfd pfd{fd_, POLLIN, 0};
    int rc = poll(&pfd, 1, static_cast<int>(remaining.count()) + 1);
    if (rc < 0) {
      if (errno == EINTR) continue;
      result.status = ReadStatus::kEof;
      return result;
    }
    if (rc == 0) continue;
    char chunk[4096];
    ssize_t n = recv(fd_, chunk, sizeof chunk, 0);
    if (n <= 0) {
      if (n < 0 && errno == EINTR) continue;
      close(fd_);
      fd_ = -1;
      continue;
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

}  // namespace coqharness::coq::detail

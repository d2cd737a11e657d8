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

#include "coqharness/model/cache.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <ctime>
#include <fstream>

#include "coqharness/common/error.hpp"

namespace coqharness::model {

namespace fs = std::filesystem;

std::string utc_timestamp() {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

nlohmann::json Transcript::to_json() const {
  nlohmann::json j;
  j["prompt_hash"] = prompt_hash;
  j["messages"] = prompting::messages_to_json(messages);
  j["params"] = params.to_json();
  if (!scope.is_null()) j["scope"] = scope;
  j["completions"] = completions;
  j["provider"] = provider;
  j["timestamp"] = timestamp;
  j["token_usage"] = {{"prompt", token_usage.prompt}, {"completion", token_usage.completion}};
  return j;
}

Transcript Transcript::from_json(const nlohmann::json& j) {
  try {
    Transcript t;
    t.prompt_hash = j.at("prompt_hash").get<std::string>();
    t.messages = prompting::messages_from_json(j.at("messages"));
    t.params = DecodingParams::from_json(j.at("params"));
    if (j.contains("scope")) t.scope = j.at("scope");
    t.completions = j.at("completions").get<std::vector<std::string>>();
    t.provider = j.at("provider").get<std::string>();
    t.timestamp = j.value("timestamp", "");
    t.token_usage.prompt = j.at("token_usage").at("prompt").get<std::uint64_t>();
    t.token_usage.completion = j.at("token_usage").at("completion").get<std::uint64_t>();
    if (model::prompt_hash(t.messages, t.params, t.scope) != t.prompt_hash) {
      throw HarnessError(ErrorCode::kSchemaViolation, "transcript hash does not match its prompt");
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw HarnessError(ErrorCode::kSchemaViolation, std::string("transcript: ") + e.what());
  }
}

TranscriptCache::TranscriptCache(fs::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw HarnessError(ErrorCode::kIoError, "cannot create cache dir " + dir_.string());
}

void TranscriptCache::load_shard(const std::string& prefix) {
  if (loaded_[prefix]) return;
  loaded_[prefix] = true;
  std::ifstream in(dir_ / (prefix + ".jsonl"), std::ios::binary);
  if (!in) return;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      // A torn final record from an interrupted run is ignored.
      if (in.peek() == std::char_traits<char>::eof()) break;
      throw SchemaViolation(line_no, "unparsable transcript in " + prefix + ".jsonl");
    }
    try {
      auto t = Transcript::from_json(j);
      entries_.try_emplace(t.prompt_hash, std::move(t));
    } catch (const HarnessError& e) {
      throw SchemaViolation(line_no, e.what());
    }
  }
}

std::optional<Transcript> TranscriptCache::lookup(const std::string& hash) {
  std::lock_guard lock(mu_);
  load_shard(hash.substr(0, 2));
  auto it = entries_.find(hash);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void TranscriptCache::store(const Transcript& transcript) {
  std::lock_guard lock(mu_);
  const std::string prefix = transcript.prompt_hash.substr(0, 2);
  load_shard(prefix);
  std::string line = transcript.to_json().dump() + "\n";
  const fs::path path = dir_ / (prefix + ".jsonl");
  int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd < 0) throw HarnessError(ErrorCode::kIoError, "cannot open " + path.string());
  ssize_t written = ::write(fd, line.data(), line.size());
  int saved = errno;
  ::close(fd);
  if (written != static_cast<ssize_t>(line.size())) {
    throw HarnessError(ErrorCode::kIoError,
                       "short write to " + path.string() + ": " + std::strerror(saved));
  }
  entries_.try_emplace(transcript.prompt_hash, transcript);
}

CachingProvider::CachingProvider(Provider* inner, TranscriptCache& cache, bool replay)
    : inner_(inner), cache_(cache), replay_(replay) {
  if (!replay_ && inner_ == nullptr) {
    throw HarnessError(ErrorCode::kConfigError, "caching provider needs an inner provider");
  }
}

std::string CachingProvider::name() const {
  return inner_ ? inner_->name() : std::string("replay");
}

CompletionResult CachingProvider::complete(const prompting::ChatPrompt& prompt,
                                           const DecodingParams& params) {
  const nlohmann::json scope = inner_ ? inner_->cache_scope(prompt) : nlohmann::json();
  const std::string hash = prompt_hash(prompt.messages, params, scope);
  if (auto hit = cache_.lookup(hash);
      hit && hit->completions.size() == static_cast<std::size_t>(params.n)) {
    CompletionResult r;
    r.completions = hit->completions;
    r.usage = hit->token_usage;
    r.attempts = 0;
    r.from_cache = true;
    r.provider = hit->provider;
    return r;
  }
  if (replay_) {
    throw HarnessError(ErrorCode::kCacheMiss,
                       "replay mode: no cached transcript for prompt " + hash.substr(0, 12) +
                           " (theorem " + prompt.theorem_id + ", config " + prompt.config_tag + ")");
  }
  CompletionResult r = inner_->complete(prompt, params);
  Transcript t;
  t.prompt_hash = hash;
  t.messages = prompt.messages;
  t.params = params;
  t.scope = scope;
  t.completions = r.completions;
  t.provider = r.provider.empty() ? inner_->name() : r.provider;
  t.timestamp = utc_timestamp();
  t.token_usage = r.usage;
  cache_.store(t);
  return r;
}

}  // namespace coqharness::model

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

#include "coqharness/model/http_provider.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "coqharness/common/error.hpp"

namespace coqharness::model {

namespace {

bool transient(int status) { return status == 0 || status == 429 || status >= 500; }

std::pair<std::string, std::string> split_base_url(const std::string& url) {
  auto scheme = url.find("://");
  auto path_at = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (path_at == std::string::npos) return {url, ""};
  std::string path = url.substr(path_at);
  while (!path.empty() && path.back() == '/') path.pop_back();
  return {url.substr(0, path_at), path};
}

}  // namespace

void HttpProviderConfig::validate() const {
  if (base_url.empty()) throw HarnessError(ErrorCode::kConfigError, "provider base_url is empty");
  if (model_name.empty()) throw HarnessError(ErrorCode::kConfigError, "provider model_name is empty");
  if (rpm_limit < 0) throw HarnessError(ErrorCode::kConfigError, "rpm_limit must be >= 0");
  if (max_tries < 1) throw HarnessError(ErrorCode::kConfigError, "max_tries must be >= 1");
}

HttpChatProvider::HttpChatProvider(HttpProviderConfig config) : config_(std::move(config)) {
  config_.validate();
}

std::string HttpChatProvider::name() const { return "http:" + config_.model_name; }

TokenUsage HttpChatProvider::usage() const {
  std::lock_guard lock(mu_);
  return used_;
}

std::uint64_t HttpChatProvider::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

void HttpChatProvider::pause(std::chrono::milliseconds d) const {
  if (d.count() <= 0) return;
  if (config_.sleep) {
    config_.sleep(d);
  } else {
    std::this_thread::sleep_for(d);
  }
}

void HttpChatProvider::check_budget() const {
  std::lock_guard lock(mu_);
  if (config_.token_budget > 0 && used_.total() >= config_.token_budget) {
    throw HarnessError(ErrorCode::kBudgetExceeded,
                       "token budget exceeded: " + std::to_string(used_.total()) + " of " +
                           std::to_string(config_.token_budget));
  }
  if (config_.call_budget > 0 && calls_ >= config_.call_budget) {
    throw HarnessError(ErrorCode::kBudgetExceeded,
                       "call budget exceeded: " + std::to_string(calls_) + " calls");
  }
}

void HttpChatProvider::charge(const TokenUsage& usage) {
  std::lock_guard lock(mu_);
  used_.prompt += usage.prompt;
  used_.completion += usage.completion;
  ++calls_;
}

// Sliding one-minute window shared by every worker.
void HttpChatProvider::wait_for_rate_slot() {
  if (config_.rpm_limit <= 0) return;
  const auto window = std::chrono::minutes(1);
  std::unique_lock lock(mu_);
  auto now = std::chrono::steady_clock::now();
  while (!recent_.empty() && now - recent_.front() >= window) recent_.pop_front();
  if (recent_.size() >= static_cast<std::size_t>(config_.rpm_limit)) {
    auto wait = std::chrono::duration_cast<std::chrono::milliseconds>(recent_.front() + window - now);
    recent_.pop_front();
    lock.unlock();
    pause(wait);
    lock.lock();
    now = std::chrono::steady_clock::now();
  }
  recent_.push_back(now);
}

CompletionResult HttpChatProvider::complete(const prompting::ChatPrompt& prompt,
                                            const DecodingParams& params) {
  params.validate();
  auto [origin, base_path] = split_base_url(config_.base_url);
  httplib::Client client(origin);
  client.set_connection_timeout(config_.timeout);
  client.set_read_timeout(config_.timeout);
  httplib::Headers headers;
  if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  CompletionResult result;
  result.provider = name();
  result.attempts = 0;
  while (result.completions.size() < static_cast<std::size_t>(params.n)) {
    check_budget();
    const int want = params.n - static_cast<int>(result.completions.size());
    nlohmann::json body;
    body["model"] = config_.model_name;
    body["messages"] = prompting::messages_to_json(prompt.messages);
    body["n"] = want;
    body["temperature"] = params.temperature;
    body["presence_penalty"] = params.presence_penalty;
    body["max_tokens"] = params.max_tokens;
    if (params.seed) body["seed"] = *params.seed;
    const std::string payload = body.dump();

    int status = 0;
    std::string response_body;
    std::chrono::milliseconds backoff = config_.initial_backoff;
    for (int attempt = 1;; ++attempt) {
      wait_for_rate_slot();
      ++result.attempts;
      auto res = client.Post(base_path + "/chat/completions", headers, payload, "application/json");
      std::chrono::milliseconds delay = backoff;
      if (res) {
        status = res->status;
        response_body = res->body;
        if (res->has_header("Retry-After")) {
          int secs = std::atoi(res->get_header_value("Retry-After").c_str());
          if (secs > 0) delay = std::chrono::seconds(secs);
        }
      } else {
        status = 0;
        response_body = httplib::to_string(res.error());
      }
      if (status == 200) break;
      if (!transient(status) || attempt >= config_.max_tries) {
        throw ProviderError(status, response_body);
      }
      pause(std::min(delay, config_.max_backoff));
      backoff = std::min(backoff * 2, config_.max_backoff);
    }

    try {
      auto doc = nlohmann::json::parse(response_body);
      TokenUsage usage;
      if (doc.contains("usage") && doc.at("usage").is_object()) {
        usage.prompt = doc.at("usage").value("prompt_tokens", std::uint64_t{0});
        usage.completion = doc.at("usage").value("completion_tokens", std::uint64_t{0});
      }
      charge(usage);
      result.usage.prompt += usage.prompt;
      result.usage.completion += usage.completion;
      const auto& choices = doc.at("choices");
      if (choices.empty()) throw ProviderError(status, "response has no choices");
      for (const auto& c : choices) {
        if (result.completions.size() >= static_cast<std::size_t>(params.n)) break;
        const auto& content = c.at("message").at("content");
        result.completions.push_back(content.is_null() ? std::string() : content.get<std::string>());
      }
    } catch (const nlohmann::json::exception& e) {
      throw ProviderError(status, std::string("malformed response: ") + e.what());
    }
  }
  return result;
}

}  // namespace coqharness::model

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
#include <deque>
#include <functional>
#include <mutex>
#include <string>

#include "coqharness/model/provider.hpp"

namespace coqharness::model {

struct HttpProviderConfig {
  std::string base_url = "https://api.openai.com/v1";  // POST {base_url}/chat/completions
  std::string model_name;
  std::string api_key_env = "OPENAI_API_KEY";
  int rpm_limit = 0;               // requests per minute, 0 = unlimited
  std::uint64_t token_budget = 0;  // prompt + completion tokens, 0 = unlimited
  std::uint64_t call_budget = 0;   // successful requests, 0 = unlimited
  int max_tries = 5;
  std::chrono::milliseconds initial_backoff{1000};
  std::chrono::milliseconds max_backoff{30000};
  std::chrono::seconds timeout{120};
  // Replaceable for tests.
  std::function<void(std::chrono::milliseconds)> sleep;

  void validate() const;
};

// Chat-completions client. Retries connection failures, 429 and 5xx with
// exponential backoff (honouring Retry-After), enforces the rpm ceiling and
// the budgets. Endpoints that return fewer than n choices are asked again
// for the rest.
class HttpChatProvider final : public Provider {
 public:
  explicit HttpChatProvider(HttpProviderConfig config);

  CompletionResult complete(const prompting::ChatPrompt& prompt,
                            const DecodingParams& params) override;
  std::string name() const override;

  TokenUsage usage() const;
  std::uint64_t calls() const;

 private:
  void wait_for_rate_slot();
  void charge(const TokenUsage& usage);
  void check_budget() const;
  void pause(std::chrono::milliseconds d) const;

  HttpProviderConfig config_;
  mutable std::mutex mu_;
  std::deque<std::chrono::steady_clock::time_point> recent_;
  TokenUsage used_;
  std::uint64_t calls_ = 0;
};

}  // namespace coqharness::model

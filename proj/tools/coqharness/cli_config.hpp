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

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "coqharness/coq/session.hpp"
#include "coqharness/model/http_provider.hpp"
#include "coqharness/model/provider.hpp"

namespace coqharness::cli {

// Shared settings for every subcommand, read from an INI file:
//
//   [paths]     corpus, output, cache, templates, patterns, index, embedding
//   [provider]  kind (scripted|http), script, base_url, model, api_key,
//               rpm_limit, token_budget, call_budget, max_tries, timeout_s
//   [prover]    backend (mock|coqtop), command, prompt_pattern, mock_table,
//               timeout_ms, workdir
//   [defaults]  temperature, presence_penalty, n, max_tokens, k_shots,
//               n_lemmas, seed, workers
//
// ${NAME} is expanded from the environment in provider.api_key only; it is
// the one place a secret belongs. Relative paths resolve against the file's
// directory.
struct CliConfig {
  std::filesystem::path corpus = "corpus.jsonl";
  std::filesystem::path output = "out";
  std::filesystem::path cache;
  std::filesystem::path templates;
  std::filesystem::path patterns;
  std::filesystem::path index = "index.json";
  std::filesystem::path embedding;

  std::string provider_kind = "scripted";
  std::filesystem::path script;
  model::HttpProviderConfig http;
  bool has_api_key = false;

  coq::Backend backend = coq::Backend::kMock;
  std::string prover_command = "coqtop -emacs -quiet";
  std::string prompt_pattern;
  std::filesystem::path mock_table;
  std::int64_t step_timeout_ms = 20000;
  std::filesystem::path workdir = ".";

  model::DecodingParams decoding;
  int k_shots = 6;
  int n_lemmas = 6;
  std::uint64_t seed = 0;
  int workers = 1;

  void validate() const;
  // Secrets are never echoed.
  nlohmann::ordered_json to_json() const;
};

// Environment variable the interpolated API key is exported under.
inline constexpr const char* kApiKeyVariable = "COQHARNESS_PROVIDER_API_KEY";

CliConfig load_cli_config(const std::filesystem::path& path);

// Expands ${NAME}; unset variables are a config error.
std::string expand_env(const std::string& value);

coq::SessionConfig session_config(const CliConfig& config);

}  // namespace coqharness::cli

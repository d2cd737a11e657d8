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

#include "cli_config.hpp"

#include <cstdlib>
#include <map>
#include <set>
#include <regex>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "coqharness/common/error.hpp"
#include "coqharness/coq/mock_prover.hpp"

namespace coqharness::cli {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"paths", {"corpus", "output", "cache", "templates", "patterns", "index", "embedding"}},
      {"provider",
       {"kind", "script", "base_url", "model", "api_key", "rpm_limit", "token_budget",
        "call_budget", "max_tries", "timeout_s"}},
      {"prover", {"backend", "command", "prompt_pattern", "mock_table", "timeout_ms", "workdir"}},
      {"defaults",
       {"temperature", "presence_penalty", "n", "max_tokens", "k_shots", "n_lemmas", "seed",
        "workers"}},
  };
  return keys;
}

[[noreturn]] void bad(const std::string& what) {
  throw HarnessError(ErrorCode::kConfigError, what);
}

template <typename T>
T number(const pt::ptree& tree, const std::string& key, T fallback) {
  auto raw = tree.get_optional<std::string>(key);
  if (!raw) return fallback;
  auto parsed = tree.get_optional<T>(key);
  if (!parsed) bad("bad value for " + key + ": " + *raw);
  return *parsed;
}

}  // namespace

std::string expand_env(const std::string& value) {
  static const std::regex kVar(R"(\$\{([A-Za-z_][A-Za-z0-9_]*)\})");
  std::string out;
  auto begin = std::sregex_iterator(value.begin(), value.end(), kVar);
  std::size_t last = 0;
  for (auto it = begin; it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    out += value.substr(last, static_cast<std::size_t>(m.position()) - last);
    const char* env = std::getenv(m[1].str().c_str());
    if (!env) bad("environment variable " + m[1].str() + " is not set");
    out += env;
    last = static_cast<std::size_t>(m.position() + m.length());
  }
  return out + value.substr(last);
}

CliConfig load_cli_config(const fs::path& path) {
  pt::ptree tree;
  try {
    pt::ini_parser::read_ini(path.string(), tree);
  } catch (const pt::ini_parser_error& e) {
    bad("cannot read config " + path.string() + ": " + e.message());
  }
  for (const auto& [section, body] : tree) {
    auto it = known_keys().find(section);
    if (it == known_keys().end()) bad(path.string() + ": unknown section [" + section + "]");
    for (const auto& [key, value] : body) {
      if (!it->second.count(key)) bad(path.string() + ": unknown key " + section + "." + key);
      if (key != "api_key" && value.data().find("${") != std::string::npos) {
        bad(path.string() + ": ${...} is only allowed in provider.api_key");
      }
    }
  }
  const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
  auto path_of = [&](const std::string& key, fs::path& out) {
    if (auto v = tree.get_optional<std::string>(key); v && !v->empty()) {
      fs::path p(*v);
      out = p.is_absolute() ? p : base / p;
    }
  };

  CliConfig c;
  path_of("paths.corpus", c.corpus);
  path_of("paths.output", c.output);
  path_of("paths.cache", c.cache);
  path_of("paths.templates", c.templates);
  path_of("paths.patterns", c.patterns);
  path_of("paths.index", c.index);
  path_of("paths.embedding", c.embedding);

  c.provider_kind = tree.get<std::string>("provider.kind", c.provider_kind);
  path_of("provider.script", c.script);
  c.http.base_url = tree.get<std::string>("provider.base_url", c.http.base_url);
  c.http.model_name = tree.get<std::string>("provider.model", c.http.model_name);
  if (auto key = tree.get_optional<std::string>("provider.api_key")) {
    const std::string secret = expand_env(*key);
    ::setenv(kApiKeyVariable, secret.c_str(), 1);
    c.http.api_key_env = kApiKeyVariable;
    c.has_api_key = true;
  }
  c.http.rpm_limit = number<int>(tree, "provider.rpm_limit", c.http.rpm_limit);
  c.http.token_budget = number<std::uint64_t>(tree, "provider.token_budget", c.http.token_budget);
  c.http.call_budget = number<std::uint64_t>(tree, "provider.call_budget", c.http.call_budget);
  c.http.max_tries = number<int>(tree, "provider.max_tries", c.http.max_tries);
  c.http.timeout = std::chrono::seconds(number<std::int64_t>(tree, "provider.timeout_s", c.http.timeout.count()));

  const auto backend = tree.get<std::string>("prover.backend", "mock");
  if (backend == "mock") c.backend = coq::Backend::kMock;
  else if (backend == "coqtop") c.backend = coq::Backend::kReal;
  else bad("prover.backend must be mock or coqtop, got " + backend);
  c.prover_command = tree.get<std::string>("prover.command", c.prover_command);
  c.prompt_pattern = tree.get<std::string>("prover.prompt_pattern", c.prompt_pattern);
  path_of("prover.mock_table", c.mock_table);
  c.step_timeout_ms = number<std::int64_t>(tree, "prover.timeout_ms", c.step_timeout_ms);
  path_of("prover.workdir", c.workdir);

  c.decoding.temperature = number<double>(tree, "defaults.temperature", c.decoding.temperature);
  c.decoding.presence_penalty =
      number<double>(tree, "defaults.presence_penalty", c.decoding.presence_penalty);
  c.decoding.n = number<int>(tree, "defaults.n", c.decoding.n);
  c.decoding.max_tokens = number<int>(tree, "defaults.max_tokens", c.decoding.max_tokens);
  c.k_shots = number<int>(tree, "defaults.k_shots", c.k_shots);
  c.n_lemmas = number<int>(tree, "defaults.n_lemmas", c.n_lemmas);
  c.seed = number<std::uint64_t>(tree, "defaults.seed", c.seed);
  c.workers = number<int>(tree, "defaults.workers", c.workers);
  c.validate();
  return c;
}

void CliConfig::validate() const {
  if (provider_kind != "scripted" && provider_kind != "http") {
    bad("provider.kind must be scripted or http, got " + provider_kind);
  }
  decoding.validate();
  if (k_shots < 0) bad("defaults.k_shots must be >= 0");
  if (n_lemmas < 0) bad("defaults.n_lemmas must be >= 0");
  if (workers < 1) bad("defaults.workers must be >= 1");
  if (step_timeout_ms <= 0) bad("prover.timeout_ms must be positive");
}

nlohmann::ordered_json CliConfig::to_json() const {
  nlohmann::ordered_json j;
  j["provider"] = {{"kind", provider_kind}};
  if (provider_kind == "http") {
    j["provider"]["base_url"] = http.base_url;
    j["provider"]["model"] = http.model_name;
    j["provider"]["rpm_limit"] = http.rpm_limit;
    j["provider"]["token_budget"] = http.token_budget;
    j["provider"]["call_budget"] = http.call_budget;
  }
  j["prover"] = {{"backend", backend == coq::Backend::kMock ? "mock" : "coqtop"},
                 {"timeout_ms", step_timeout_ms}};
  if (backend == coq::Backend::kReal) j["prover"]["command"] = prover_command;
  j["defaults"] = {{"decoding", decoding.to_json()},
                   {"k_shots", k_shots},
                   {"n_lemmas", n_lemmas},
                   {"seed", seed},
                   {"workers", workers}};
  return j;
}

coq::SessionConfig session_config(const CliConfig& config) {
  coq::SessionConfig s;
  s.backend = config.backend;
  s.prover_command = config.prover_command;
  if (!config.prompt_pattern.empty()) s.prompt_pattern = config.prompt_pattern;
  s.timeout_per_step = std::chrono::milliseconds(config.step_timeout_ms);
  s.workdir = config.workdir;
  if (config.backend == coq::Backend::kMock) {
    s.mock_table = config.mock_table.empty()
                       ? std::make_shared<const coq::MockTable>()
                       : std::make_shared<const coq::MockTable>(coq::MockTable::load(config.mock_table));
  }
  s.validate();
  return s;
}

}  // namespace coqharness::cli

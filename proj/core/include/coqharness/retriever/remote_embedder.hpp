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
#include <string>
#include <vector>

#include "coqharness/retriever/index.hpp"

namespace coqharness::retriever {

// HTTP embedding endpoint: POST {"texts": [...]} -> {"vectors": [[...]]}.
struct RemoteEmbedderConfig {
  std::string url;  // e.g. http://localhost:8080/embed
  std::string api_key_env;  // bearer token variable, optional
  std::chrono::seconds timeout{60};
};

class RemoteEmbedder final : public TextEmbedder {
 public:
  explicit RemoteEmbedder(RemoteEmbedderConfig config);
  // Throws ProviderError on transport or schema failures.
  std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) const override;

 private:
  RemoteEmbedderConfig config_;
};

}  // namespace coqharness::retriever

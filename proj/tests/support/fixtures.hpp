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

#include "coqharness/agent/agent.hpp"
#include "coqharness/coq/mock_prover.hpp"
#include "coqharness/corpus/corpus.hpp"

namespace coqharness::testing {

std::filesystem::path fixture_dir();
std::filesystem::path fixture(const std::string& name);
std::string read_text(const std::filesystem::path& path);

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// The eight-theorem toy project with its explicit five-theorem test split.
corpus::Corpus toy_corpus();
std::shared_ptr<const coq::MockTable> toy_mock();
agent::SessionFactory mock_sessions(std::shared_ptr<const coq::MockTable> table);

// n theorems whose statement and proof share a private vocabulary
// (pred_i, alpha_i, beta_i) on top of a common one. All labelled train.
corpus::Corpus synthetic_corpus(std::size_t n);

}  // namespace coqharness::testing

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

#include "fixtures.hpp"

#include <atomic>
#include <fstream>
#include <sstream>

#include <unistd.h>

namespace coqharness::testing {

namespace fs = std::filesystem;

fs::path fixture_dir() { return fs::path(COQHARNESS_FIXTURE_DIR); }

fs::path fixture(const std::string& name) { return fixture_dir() / name; }

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("coqharness-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

corpus::Corpus toy_corpus() {
  auto raw = corpus::ingest_project(fixture("toy"));
  corpus::SplitOptions split;
  split.policy = corpus::SplitPolicy::kExplicit;
  std::istringstream ids(read_text(fixture("toy_test_ids.txt")));
  for (std::string line; std::getline(ids, line);) {
    if (!line.empty()) split.test_ids.push_back(line);
  }
  return corpus::split_corpus(raw, split);
}

std::shared_ptr<const coq::MockTable> toy_mock() {
  return std::make_shared<const coq::MockTable>(coq::MockTable::load(fixture("toy_mock.json")));
}

agent::SessionFactory mock_sessions(std::shared_ptr<const coq::MockTable> table) {
  coq::SessionConfig cfg;
  cfg.backend = coq::Backend::kMock;
  cfg.mock_table = std::move(table);
  return agent::make_session_factory(cfg);
}

corpus::Corpus synthetic_corpus(std::size_t n) {
  std::ostringstream src;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string k = std::to_string(i);
    src << "Lemma syn_" << k << ": forall x, pred_" << k << " (alpha_" << k << " x) (beta_" << k
        << " x).\nProof.\n  intros x.\n  apply pred_" << k << "_intro with (alpha_" << k
        << " x) (beta_" << k << " x).\n  auto.\nQed.\n\n";
  }
  corpus::Corpus c;
  c.root = "synthetic";
  corpus::ingest_source("Synthetic.v", src.str(), c);
  for (const auto& r : c.records) c.split_labels[r.id] = corpus::SplitLabel::kTrain;
  return c;
}

}  // namespace coqharness::testing

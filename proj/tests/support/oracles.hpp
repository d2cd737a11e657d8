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

// Reference implementations the tests compare the library against. They are
// deliberately written a different way (explicit state machine, plain loops)
// so a shared bug is unlikely.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace coqharness::testing {

struct OracleSegmentation {
  std::vector<std::string> sentences;
  bool unterminated_tail = false;
  // "comment" or "string" when the input ends inside one.
  std::optional<std::string> error;
  std::size_t error_offset = 0;
};

OracleSegmentation oracle_segment(std::string_view source);

struct Snippet {
  std::string name;
  std::string source;
};

const std::vector<Snippet>& segmentation_snippets();

double oracle_cosine(const std::vector<double>& a, const std::vector<double>& b);

// max(0, margin + (1 - cos(a,p)) - (1 - cos(a,n))), spelled out.
double oracle_triplet_loss(const std::vector<double>& a, const std::vector<double>& p,
                           const std::vector<double>& n, double margin);

}  // namespace coqharness::testing

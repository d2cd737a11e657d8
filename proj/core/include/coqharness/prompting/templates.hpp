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

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace coqharness::prompting {

// Values for the documented placeholders: statement, lemmas, examples,
// state, error.
using Bindings = std::map<std::string, std::string, std::less<>>;

// Named text sections loaded from a template file:
//
//   # comment (only above the first section)
//   [system]
//   You are ...
//   [query]
//   {statement}
//
// Leading and trailing blank lines of each section are dropped.
class TemplateSet {
 public:
  // Throws HarnessError(kTemplateError) on unknown placeholders, unbalanced
  // braces or missing required sections.
  static TemplateSet parse(std::string_view text);
  static TemplateSet load(const std::filesystem::path& path);
  // The set shipped with the library.
  static const TemplateSet& defaults();

  static const std::vector<std::string>& required_sections();
  static const std::vector<std::string>& placeholders();

  bool has(std::string_view section) const;
  const std::string& raw(std::string_view section) const;
  // Substitutes placeholders; a placeholder without a binding is an error.
  std::string render(std::string_view section, const Bindings& bindings) const;

  // Short content hash identifying this template revision.
  const std::string& version() const { return version_; }

 private:
  std::map<std::string, std::string, std::less<>> sections_;
  std::string version_;
};

}  // namespace coqharness::prompting

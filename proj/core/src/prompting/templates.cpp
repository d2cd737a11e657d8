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

#include "coqharness/prompting/templates.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "coqharness/common/error.hpp"
#include "coqharness/common/hash.hpp"
#include "coqharness/common/text.hpp"

namespace coqharness::prompting {

namespace {

#include "default_prompt_templates.inc"

[[noreturn]] void fail(const std::string& msg) {
  throw HarnessError(ErrorCode::kTemplateError, msg);
}

// Calls on_text for literal runs and on_name for each placeholder.
template <typename Text, typename Name>
void walk(std::string_view section, std::string_view body, Text on_text, Name on_name) {
  std::size_t i = 0;
  while (i < body.size()) {
    char c = body[i];
    if (c == '{' || c == '}') {
      if (i + 1 < body.size() && body[i + 1] == c) {
        on_text(std::string_view(&body[i], 1));
        i += 2;
        continue;
      }
      if (c == '}') fail("stray '}' in section [" + std::string(section) + "]");
      auto close = body.find('}', i + 1);
      if (close == std::string_view::npos) {
        fail("unclosed placeholder in section [" + std::string(section) + "]");
      }
      on_name(body.substr(i + 1, close - i - 1));
      i = close + 1;
      continue;
    }
    std::size_t j = i;
    while (j < body.size() && body[j] != '{' && body[j] != '}') ++j;
    on_text(body.substr(i, j - i));
    i = j;
  }
}

std::string strip_blank_edges(const std::vector<std::string>& lines) {
  std::size_t b = 0, e = lines.size();
  while (b < e && text::trim(lines[b]).empty()) ++b;
  while (e > b && text::trim(lines[e - 1]).empty()) --e;
  std::vector<std::string> kept(lines.begin() + static_cast<std::ptrdiff_t>(b),
                                lines.begin() + static_cast<std::ptrdiff_t>(e));
  return text::join(kept, "\n");
}

}  // namespace

const std::vector<std::string>& TemplateSet::required_sections() {
  static const std::vector<std::string> kRequired = {
      "system",          "system_interactive",
      "example_user",    "example_user_lemmas",
      "query",           "query_lemmas",
      "interactive_state",
      "interactive_error", "repair",
      "strategy_simple_tactics_first", "strategy_no_lemma_use",
      "strategy_verbose_stepwise"};
  return kRequired;
}

const std::vector<std::string>& TemplateSet::placeholders() {
  static const std::vector<std::string> kNames = {"statement", "lemmas", "examples", "state",
                                                  "error"};
  return kNames;
}

TemplateSet TemplateSet::parse(std::string_view source) {
  TemplateSet set;
  std::string current;
  std::vector<std::string> lines;
  bool in_section = false;
  auto flush = [&] {
    if (in_section) set.sections_[current] = strip_blank_edges(lines);
    lines.clear();
  };
  for (const auto& line : text::split_lines(source)) {
    auto t = text::trim(line);
    if (t.size() >= 2 && t.front() == '[' && t.back() == ']' &&
        t.find(' ') == std::string_view::npos) {
      flush();
      current = std::string(t.substr(1, t.size() - 2));
      if (set.sections_.count(current)) fail("duplicate section [" + current + "]");
      in_section = true;
      continue;
    }
    if (!in_section) {
      if (t.empty() || t.front() == '#') continue;
      fail("text before the first section: " + std::string(t));
    }
    lines.push_back(line);
  }
  flush();

  const auto& names = placeholders();
  for (const auto& [name, body] : set.sections_) {
    walk(name, body, [](std::string_view) {},
         [&](std::string_view ph) {
           if (std::find(names.begin(), names.end(), ph) == names.end()) {
             fail("unknown placeholder {" + std::string(ph) + "} in section [" + name + "]");
           }
         });
  }
  for (const auto& req : required_sections()) {
    if (!set.sections_.count(req)) fail("missing required section [" + req + "]");
  }
  set.version_ = sha256_hex(source).substr(0, 12);
  return set;
}

TemplateSet TemplateSet::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw HarnessError(ErrorCode::kIoError, "cannot read template file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

const TemplateSet& TemplateSet::defaults() {
  static const TemplateSet kDefaults = parse(kDefaultPromptTemplates);
  return kDefaults;
}

bool TemplateSet::has(std::string_view section) const {
  return sections_.find(section) != sections_.end();
}

const std::string& TemplateSet::raw(std::string_view section) const {
  auto it = sections_.find(section);
  if (it == sections_.end()) fail("no template section [" + std::string(section) + "]");
  return it->second;
}

std::string TemplateSet::render(std::string_view section, const Bindings& bindings) const {
  std::string out;
  walk(section, raw(section), [&](std::string_view t) { out += t; },
       [&](std::string_view ph) {
         auto it = bindings.find(ph);
         if (it == bindings.end()) {
           fail("placeholder {" + std::string(ph) + "} in section [" + std::string(section) +
                "] has no value");
         }
         out += it->second;
       });
  return out;
}

}  // namespace coqharness::prompting

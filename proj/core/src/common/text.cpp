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

#include "coqharness/common/text.hpp"

#include <cctype>

namespace coqharness::text {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

}  // namespace

std::string_view trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

std::string trim_copy(std::string_view s) { return std::string(trim(s)); }

std::string normalize_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

bool starts_with_word(std::string_view s, std::string_view word) {
  s = trim(s);
  if (s.substr(0, word.size()) != word) return false;
  if (s.size() == word.size()) return true;
  return !is_ident_char(static_cast<unsigned char>(s[word.size()]));
}

std::string_view first_word(std::string_view s) {
  s = trim(s);
  std::size_t e = 0;
  while (e < s.size() && !is_space(s[e])) ++e;
  return s.substr(0, e);
}

std::vector<std::string> split_lines(std::string_view s) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t nl = s.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.emplace_back(s.substr(start));
      break;
    }
    std::string_view line = s.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.emplace_back(line);
    start = nl + 1;
  }
  return lines;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.append(sep);
    out.append(parts[i]);
  }
  return out;
}

bool is_ident_start(unsigned char c) {
  return std::isalpha(c) || c == '_' || c >= 0x80;
}

bool is_ident_char(unsigned char c) {
  return std::isalnum(c) || c == '_' || c == '\'' || c >= 0x80;
}

namespace {

// Walks s, calling on_code for characters outside comments and on_comment for
// characters inside top-level comment bodies.
template <typename Code, typename Comment>
void walk_comments(std::string_view s, Code on_code, Comment on_comment) {
  std::size_t i = 0;
  int depth = 0;
  bool in_string = false;
  while (i < s.size()) {
    char c = s[i];
    if (in_string) {
      if (c == '"') {
        if (i + 1 < s.size() && s[i + 1] == '"') {
          if (depth == 0) on_code(std::string_view("\"\""));
          else on_comment(std::string_view("\"\""));
          i += 2;
          continue;
        }
        in_string = false;
      }
      if (depth == 0) on_code(s.substr(i, 1));
      else on_comment(s.substr(i, 1));
      ++i;
      continue;
    }
    if (c == '(' && i + 1 < s.size() && s[i + 1] == '*') {
      ++depth;
      if (depth > 1) on_comment(std::string_view("(*"));
      i += 2;
      continue;
    }
    if (depth > 0 && c == '*' && i + 1 < s.size() && s[i + 1] == ')') {
      --depth;
      if (depth > 0) on_comment(std::string_view("*)"));
      else on_comment(std::string_view(" "));
      i += 2;
      continue;
    }
    if (c == '"') in_string = true;
    if (depth == 0) on_code(s.substr(i, 1));
    else on_comment(s.substr(i, 1));
    ++i;
  }
}

}  // namespace

std::string strip_comments(std::string_view s) {
  std::string out;
  walk_comments(
      s, [&](std::string_view piece) { out.append(piece); },
      [](std::string_view) {});
  return out;
}

std::string comment_text(std::string_view s) {
  std::string out;
  walk_comments(
      s, [](std::string_view) {},
      [&](std::string_view piece) { out.append(piece); });
  return out;
}

}  // namespace coqharness::text

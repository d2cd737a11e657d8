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

#include <string>
#include <string_view>
#include <vector>

namespace coqharness::text {

std::string_view trim(std::string_view s);
std::string trim_copy(std::string_view s);

// Collapses every whitespace run to one space and trims both ends.
std::string normalize_whitespace(std::string_view s);

std::string to_lower_ascii(std::string_view s);

bool starts_with_word(std::string_view s, std::string_view word);

// First whitespace-delimited word of s (after leading whitespace).
std::string_view first_word(std::string_view s);

std::vector<std::string> split_lines(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

bool is_ident_start(unsigned char c);
bool is_ident_char(unsigned char c);

// Removes every (possibly nested) Coq comment; string literals are respected.
// Unterminated comments are dropped up to end of input.
std::string strip_comments(std::string_view s);

// Concatenated bodies of all top-level comments in s.
std::string comment_text(std::string_view s);

}  // namespace coqharness::text

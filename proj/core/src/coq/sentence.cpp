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

#include "coqharness/coq/sentence.hpp"

#include <array>

#include "coqharness/common/error.hpp"
#include "coqharness/common/text.hpp"

namespace coqharness::coq {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  SegmentedSource run() {
    SegmentedSource out;
    while (true) {
      skip_blank();
      if (pos_ >= src_.size()) break;
      std::size_t start = pos_;
      char c = src_[pos_];
      if (c == '-' || c == '+' || c == '*') {
        while (pos_ < src_.size() && src_[pos_] == c) ++pos_;
        emit(out, start);
        continue;
      }
      if (c == '{' || c == '}') {
        ++pos_;
        emit(out, start);
        continue;
      }
      if (!scan_sentence()) {
        out.unterminated_tail = ByteSpan{start, src_.size()};
        break;
      }
      emit(out, start);
    }
    return out;
  }

 private:
  bool at(std::string_view token) const {
    return src_.substr(pos_, token.size()) == token;
  }

  void emit(SegmentedSource& out, std::size_t start) {
    out.sentences.push_back(
        Sentence{std::string(src_.substr(start, pos_ - start)),
                 ByteSpan{start, pos_}});
  }

  void skip_blank() {
    while (pos_ < src_.size()) {
      if (is_space(src_[pos_])) {
        ++pos_;
      } else if (at("(*")) {
        skip_comment();
      } else {
        break;
      }
    }
  }

  // pos_ at "(*"; leaves pos_ just past the matching "*)".
  void skip_comment() {
    const std::size_t open = pos_;
    int depth = 0;
    while (pos_ < src_.size()) {
      if (at("(*")) {
        ++depth;
        pos_ += 2;
      } else if (at("*)")) {
        pos_ += 2;
        if (--depth == 0) return;
      } else if (src_[pos_] == '"') {
        skip_string();
      } else {
        ++pos_;
      }
    }
    throw LexicalError(ErrorCode::kUnterminatedComment, open,
                       "unterminated comment starting at byte " +
                           std::to_string(open));
  }

  // pos_ at '"'; Coq escapes a quote inside a string by doubling it.
  void skip_string() {
    const std::size_t open = pos_;
    ++pos_;
    while (pos_ < src_.size()) {
      if (src_[pos_] == '"') {
        if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '"') {
          pos_ += 2;
          continue;
        }
        ++pos_;
        return;
      }
      ++pos_;
    }
    throw LexicalError(ErrorCode::kUnterminatedString, open,
                       "unterminated string starting at byte " +
                           std::to_string(open));
  }

  // Returns false when input ends before a terminator.
  bool scan_sentence() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (at("(*")) {
        skip_comment();
      } else if (c == '"') {
        skip_string();
      } else if (c == '.') {
        ++pos_;
        if (pos_ == src_.size() || is_space(src_[pos_])) return true;
      } else {
        ++pos_;
      }
    }
    return false;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

constexpr std::array<std::string_view, 6> kTheoremKeywords = {
    "Lemma", "Theorem", "Fact", "Remark", "Corollary", "Proposition"};

}  // namespace

SegmentedSource segment_source(std::string_view source) {
  return Lexer(source).run();
}

std::vector<Sentence> segment_sentences(std::string_view source) {
  return segment_source(source).sentences;
}

Sentence make_sentence(std::string_view text) {
  return Sentence{std::string(text), ByteSpan{0, text.size()}};
}

std::vector<std::string> skipped_regions(
    std::string_view source, const std::vector<Sentence>& sentences) {
  std::vector<std::string> gaps;
  gaps.reserve(sentences.size() + 1);
  std::size_t cursor = 0;
  for (const auto& s : sentences) {
    gaps.emplace_back(source.substr(cursor, s.span.start - cursor));
    cursor = s.span.end;
  }
  gaps.emplace_back(source.substr(cursor));
  return gaps;
}

bool is_bullet(std::string_view t) {
  t = text::trim(t);
  if (t == "{" || t == "}") return true;
  if (t.empty()) return false;
  char c = t.front();
  if (c != '-' && c != '+' && c != '*') return false;
  for (char x : t) {
    if (x != c) return false;
  }
  return true;
}

bool is_checked_closing_command(std::string_view t) {
  auto body = text::trim_copy(text::strip_comments(t));
  return body == "Qed." || body == "Defined.";
}

bool is_closing_command(std::string_view t) {
  auto stripped = text::strip_comments(t);
  auto body = text::trim(stripped);
  if (body == "Qed." || body == "Defined." || body == "Admitted." ||
      body == "Abort." || body == "Abort All.") {
    return true;
  }
  return text::starts_with_word(body, "Save") ||
         (text::starts_with_word(body, "Abort") && body.back() == '.');
}

bool is_theorem_statement(std::string_view t) {
  auto body = text::trim_copy(text::strip_comments(t));
  for (auto kw : kTheoremKeywords) {
    if (text::starts_with_word(body, kw)) return true;
  }
  return false;
}

std::string statement_name(std::string_view t) {
  auto stripped = text::strip_comments(t);
  std::string_view body = text::trim(stripped);
  std::string_view kw = text::first_word(body);
  body = text::trim(body.substr(kw.size()));
  std::size_t e = 0;
  while (e < body.size() &&
         text::is_ident_char(static_cast<unsigned char>(body[e]))) {
    ++e;
  }
  return std::string(body.substr(0, e));
}

}  // namespace coqharness::coq

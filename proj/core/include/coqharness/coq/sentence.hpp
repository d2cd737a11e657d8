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

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace coqharness::coq {

// Half-open byte range into a source buffer.
struct ByteSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - start; }
  bool operator==(const ByteSpan&) const = default;
};

// One vernacular command (or a goal-selection bullet) including its
// terminator.
struct Sentence {
  std::string text;
  ByteSpan span;

  bool operator==(const Sentence&) const = default;
};

struct SegmentedSource {
  std::vector<Sentence> sentences;
  // Trailing text that starts a sentence but never reaches a terminator.
  std::optional<ByteSpan> unterminated_tail;
};

// Splits Coq source into sentences. A sentence ends at a '.' followed by
// whitespace or end of input; periods inside string literals, nested
// comments and qualified identifiers do not terminate. Bullets (runs of one
// of '-', '+', '*') and braces at sentence start are sentences of their own.
// Comments and whitespace between sentences are skipped; comments inside a
// sentence stay part of its text.
//
// Throws LexicalError (kUnterminatedComment / kUnterminatedString) carrying
// the byte offset of the unclosed opener.
SegmentedSource segment_source(std::string_view source);

// Sentences only; an unterminated tail is ignored.
std::vector<Sentence> segment_sentences(std::string_view source);

// Sentence built from free-standing text (span covers the whole text).
Sentence make_sentence(std::string_view text);

// Inverse of segmentation: the source bytes not covered by any sentence, in
// order. gaps.size() == sentences.size() + 1.
std::vector<std::string> skipped_regions(std::string_view source,
                                         const std::vector<Sentence>& sentences);

bool is_bullet(std::string_view sentence_text);

// Qed. / Defined. / Admitted. / Abort. / Save ident.
bool is_closing_command(std::string_view sentence_text);
bool is_checked_closing_command(std::string_view sentence_text);

// Lemma, Theorem, Fact, Remark, Corollary, Proposition.
bool is_theorem_statement(std::string_view sentence_text);

// Name declared by a theorem-like statement ("" when none can be read).
std::string statement_name(std::string_view sentence_text);

}  // namespace coqharness::coq

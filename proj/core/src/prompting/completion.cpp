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

#include "coqharness/prompting/completion.hpp"

#include <regex>

#include "coqharness/common/error.hpp"
#include "coqharness/common/text.hpp"

namespace coqharness::prompting {

std::string_view completion_kind_name(CompletionKind kind) {
  switch (kind) {
    case CompletionKind::kProof: return "proof";
    case CompletionKind::kRefusal: return "refusal";
    case CompletionKind::kEmpty: return "empty";
    case CompletionKind::kMalformed: return "malformed";
  }
  return "empty";
}

std::optional<CompletionKind> parse_completion_kind(std::string_view name) {
  for (auto k : {CompletionKind::kProof, CompletionKind::kRefusal, CompletionKind::kEmpty,
                 CompletionKind::kMalformed}) {
    if (completion_kind_name(k) == name) return k;
  }
  return std::nullopt;
}

std::size_t ParsedCompletion::step_count() const {
  if (!sentences.empty() &&
      text::trim_copy(text::strip_comments(sentences.front().text)) == "Proof.") {
    return sentences.size() - 1;
  }
  return sentences.size();
}

const std::vector<std::string>& refusal_phrases() {
  static const std::vector<std::string> kPhrases = {
      "provide more information", "more information", "further information",
      "cannot generate",          "can't generate",   "unable to generate",
      "please define",            "please provide",   "not clearly defined",
      "need the definition",      "need more context", "cannot prove this without"};
  return kPhrases;
}

namespace {

bool mentions_request(std::string_view text_in) {
  const std::string lowered = text::to_lower_ascii(text::normalize_whitespace(text_in));
  for (const auto& p : refusal_phrases()) {
    if (lowered.find(p) != std::string::npos) return true;
  }
  return false;
}

bool is_proof_keyword(const coq::Sentence& s) {
  auto body = text::trim_copy(text::strip_comments(s.text));
  return body == "Proof." || text::starts_with_word(body, "Proof") ||
         coq::is_closing_command(body);
}

ParsedCompletion malformed(ParsedCompletion out, std::string detail) {
  out.kind = CompletionKind::kMalformed;
  out.detail = std::move(detail);
  out.proof_script.reset();
  out.sentences.clear();
  return out;
}

}  // namespace

std::string strip_code_fences(std::string_view in) {
  auto lines = text::split_lines(in);
  std::size_t open = lines.size();
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::trim(lines[i]).substr(0, 3) == "```") {
      open = i;
      break;
    }
  }
  if (open == lines.size()) return std::string(in);
  std::vector<std::string> body;
  for (std::size_t i = open + 1; i < lines.size(); ++i) {
    if (text::trim(lines[i]).substr(0, 3) == "```") break;
    body.push_back(lines[i]);
  }
  return text::join(body, "\n");
}

ParsedCompletion parse_completion(std::string_view raw,
                                  std::optional<std::string_view> expected_statement) {
  ParsedCompletion out;
  out.raw = std::string(raw);
  const std::string source = strip_code_fences(raw);
  if (text::trim(source).empty()) {
    out.kind = CompletionKind::kEmpty;
    return out;
  }

  coq::SegmentedSource seg;
  try {
    seg = coq::segment_source(source);
  } catch (const LexicalError& e) {
    return malformed(std::move(out), e.what());
  }
  auto& sentences = seg.sentences;
  const std::string comments = text::comment_text(source);

  // Commentary only, or prose with no proof structure, asking for more input.
  bool has_structure = false;
  for (const auto& s : sentences) has_structure = has_structure || is_proof_keyword(s);
  const std::string code = text::strip_comments(source);
  if (sentences.empty() || !has_structure) {
    if (mentions_request(comments) || (!has_structure && mentions_request(code))) {
      out.kind = CompletionKind::kRefusal;
      out.refusal_text = text::trim_copy(text::normalize_whitespace(comments + " " + code));
      return out;
    }
  }
  if (sentences.empty()) {
    if (text::trim(code).empty()) {
      return malformed(std::move(out), "completion contains only comments");
    }
    return malformed(std::move(out), "completion has no terminated sentence");
  }

  std::size_t first = 0;
  if (coq::is_theorem_statement(sentences.front().text)) {
    if (expected_statement &&
        text::normalize_whitespace(text::strip_comments(sentences.front().text)) !=
            text::normalize_whitespace(text::strip_comments(*expected_statement))) {
      return malformed(std::move(out), "restated theorem does not match the target statement");
    }
    out.dropped_restated_theorem = true;
    first = 1;
  }
  std::size_t last = sentences.size();
  for (std::size_t i = first; i < sentences.size(); ++i) {
    if (coq::is_closing_command(sentences[i].text)) {
      last = i + 1;
      break;
    }
  }
  if (last < sentences.size()) out.dropped_trailing_text = true;
  if (seg.unterminated_tail && last == sentences.size()) {
    auto tail = source.substr(seg.unterminated_tail->start, seg.unterminated_tail->size());
    if (!text::trim(text::strip_comments(tail)).empty()) {
      return malformed(std::move(out), "unterminated sentence: " + text::trim_copy(tail));
    }
  }
  if (first >= last) return malformed(std::move(out), "no proof after the theorem statement");

  std::string script = source.substr(sentences[first].span.start,
                                     sentences[last - 1].span.end - sentences[first].span.start);
  if (!coq::is_closing_command(sentences[last - 1].text)) {
    script += "\nQed.";
    out.appended_qed = true;
  }
  out.kind = CompletionKind::kProof;
  out.sentences = coq::segment_sentences(script);
  out.proof_script = std::move(script);
  return out;
}

}  // namespace coqharness::prompting

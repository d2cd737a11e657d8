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

#include "oracles.hpp"

#include <cmath>

namespace coqharness::testing {

namespace {

enum class State { kBetween, kSentence, kComment, kString };

bool blank(char c) { return c == ' ' || c == '\n' || c == '\t' || c == '\r' || c == '\f' || c == '\v'; }

}  // namespace

OracleSegmentation oracle_segment(std::string_view src) {
  OracleSegmentation out;
  State state = State::kBetween;
  std::vector<State> back;  // where to return after a comment or string
  std::vector<std::size_t> comment_open, string_open;
  int depth = 0;
  std::size_t start = 0;
  std::size_t i = 0;
  const std::size_t n = src.size();
  while (i < n) {
    const char c = src[i];
    const char next = i + 1 < n ? src[i + 1] : '\0';
    switch (state) {
      case State::kBetween:
        if (blank(c)) {
          ++i;
        } else if (c == '(' && next == '*') {
          back.push_back(State::kBetween);
          comment_open.push_back(i);
          state = State::kComment;
          depth = 1;
          i += 2;
        } else if (c == '-' || c == '+' || c == '*') {
          std::size_t j = i;
          while (j < n && src[j] == c) ++j;
          out.sentences.emplace_back(src.substr(i, j - i));
          i = j;
        } else if (c == '{' || c == '}') {
          out.sentences.emplace_back(1, c);
          ++i;
        } else {
          start = i;
          state = State::kSentence;
        }
        break;
      case State::kSentence:
        if (c == '(' && next == '*') {
          back.push_back(State::kSentence);
          comment_open.push_back(i);
          state = State::kComment;
          depth = 1;
          i += 2;
        } else if (c == '"') {
          back.push_back(State::kSentence);
          string_open.push_back(i);
          state = State::kString;
          ++i;
        } else if (c == '.' && (i + 1 == n || blank(next))) {
          out.sentences.emplace_back(src.substr(start, i + 1 - start));
          state = State::kBetween;
          ++i;
        } else {
          ++i;
        }
        break;
      case State::kComment:
        if (c == '(' && next == '*') {
          ++depth;
          i += 2;
        } else if (c == '*' && next == ')') {
          i += 2;
          if (--depth == 0) {
            state = back.back();
            back.pop_back();
            comment_open.pop_back();
          }
        } else if (c == '"') {
          back.push_back(State::kComment);
          string_open.push_back(i);
          state = State::kString;
          ++i;
        } else {
          ++i;
        }
        break;
      case State::kString:
        if (c == '"' && next == '"') {
          i += 2;
        } else if (c == '"') {
          state = back.back();
          back.pop_back();
          string_open.pop_back();
          ++i;
        } else {
          ++i;
        }
        break;
    }
  }
  if (state == State::kString) {
    out.error = "string";
    out.error_offset = string_open.back();
  } else if (state == State::kComment) {
    out.error = "comment";
    out.error_offset = comment_open.front();
  } else if (state == State::kSentence) {
    out.unterminated_tail = true;
  }
  return out;
}

const std::vector<Snippet>& segmentation_snippets() {
  static const std::vector<Snippet> snippets = {
      {"single", "Lemma t: True. Proof. exact I. Qed."},
      {"newline_terminators", "Lemma t: True.\nProof.\n  exact I.\nQed.\n"},
      {"eof_terminator", "Check nat."},
      {"crlf", "Lemma t: True.\r\nProof.\r\nexact I.\r\nQed.\r\n"},
      {"tabs", "intros x.\tsimpl.\tauto."},
      {"qualified_name", "rewrite Nat.add_comm. apply Coq.Init.Logic.eq_refl."},
      {"require_path", "Require Import Coq.Lists.List.\nFrom Coq Require Import Arith.PeanoNat."},
      {"projection", "Definition fst3 (p : nat * nat) := p.1.\nCheck x.(field)."},
      {"decimal", "Check 1.5. Check 2."},
      {"string_with_period", "Definition s := \"a. b. c\"."},
      {"string_escaped_quote", "Definition q := \"say \"\"hi.\"\" now\". Check q."},
      {"comment_between", "(* header. *) Lemma t: True. (* note. *) Proof. exact I. Qed."},
      {"comment_inside", "intros x (* name. it *) y. auto."},
      {"nested_comment", "(* outer (* inner. *) still. *) Check nat."},
      {"deep_nesting", "(* a (* b (* c. *) d. *) e. *)\nCheck bool."},
      {"string_in_comment", "(* a \"*) still comment.\" *) Check unit."},
      {"comment_star_bullet", "(*) not closed? *) Check nat."},
      {"bullets", "split.\n- auto.\n- split.\n  + auto.\n  + auto."},
      {"bullet_runs", "repeat split.\n-- auto.\n** auto.\n+++ auto."},
      {"braces", "split. { auto. } { exact I. }"},
      {"bullet_then_brace", "- { auto. }"},
      {"star_in_sentence", "simpl in *. rewrite <- H in *."},
      {"ellipsis", "intros... auto."},
      {"unterminated_tail", "Lemma t: True. Proof. exact I"},
      {"tail_only_comment", "Check nat. (* trailing *)"},
      {"unterminated_comment", "Check nat. (* open (* nested *)"},
      {"unterminated_string", "Definition s := \"open."},
      {"empty", ""},
      {"only_whitespace", "  \n\t "},
      {"period_before_comment", "auto.(* glued *) Qed."},
      {"notation", "Notation \"x ++ y\" := (app x y) (at level 60)."},
      {"ltac_match",
       "Ltac solve := match goal with | [ H : ?P |- ?P ] => exact H end.\nsolve."},
      // Listings of the kind the analysis discusses.
      {"comp_incl_block",
       "Lemma comp_incl: incl R R' -> incl S S' -> incl (comp R S) (comp R' S').\n"
       "Proof.\n  unfold eeq, comp, incl; intuition.\n"
       "  destruct H1 as [ t ]; exists t; auto.\nQed.\n\n"
       "Lemma comp_eeq: eeq R R' -> eeq S S' -> eeq (comp R S) (comp R' S').\n"
       "Proof. \n  unfold eeq, comp, incl; intuition;\n"
       "  destruct H0 as [ t ]; exists t; auto.\nQed.\n"},
      {"union2_block",
       "Lemma union2_evolve_left:\n  forall l R S S', evolve_1 l R S -> evolve_1 l R (union2 S S').\n"
       "Proof.\n  intros l R S S' H x x' y Hxx' xRy; destruct (H _ _ _ Hxx' xRy) as [ y' ]; \n"
       "  exists y'; auto; left; auto.\nQed.\n"},
      {"g_reverse_block",
       "Lemma G_reverse: forall R, eeq (trans (G R)) (G (trans R)).\nProof.\n"
       "  unfold G, eeq.\n  intros R u v.\n  destruct R as [R Hr].\n  simpl.\n"
       "  split; intros [r H]; cbn in *; exists r;\n  rewrite <- Hr in *;\n"
       "  auto using sym_equal, trans_sym with relations.\n"},
      {"bisim_bullets",
       "Lemma bisimulation_bisim: bisimulation bisim.\nProof.\n  constructor.\n  - intros.\n"
       "    destruct H as [s' H].\n    exists s'.\n    apply stutter_bisim in H.\n    auto.\n"},
      {"refusal_comment",
       "Lemma G_wmon: wmonotonic TX TX G.\n  (* Without further information on what TX and G are, "
       "I cannot generate a valid proof. *)"},
      {"section",
       "Section S.\nVariables (A : Type) (R : A -> A -> Prop).\nHypothesis HR : forall x, R x x.\n"
       "End S."},
      {"primes_and_underscores", "intros x' y'' _H. exact (f_equal _ H')."},
  };
  return snippets;
}

double oracle_cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0 || bb == 0) return 0.0;
  return ab / (std::sqrt(aa) * std::sqrt(bb));
}

double oracle_triplet_loss(const std::vector<double>& a, const std::vector<double>& p,
                           const std::vector<double>& n, double margin) {
  const double d_pos = 1.0 - oracle_cosine(a, p);
  const double d_neg = 1.0 - oracle_cosine(a, n);
  const double v = margin + d_pos - d_neg;
  return v > 0 ? v : 0.0;
}

}  // namespace coqharness::testing

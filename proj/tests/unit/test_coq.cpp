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

#include <gtest/gtest.h>

#include <chrono>

#include "coqharness/common/error.hpp"
#include "coqharness/coq/coqtop_session.hpp"
#include "coqharness/coq/mock_prover.hpp"
#include "coqharness/coq/proof_state.hpp"
#include "coqharness/coq/sentence.hpp"
#include "coqharness/coq/session.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

namespace {

using namespace coqharness;
using namespace coqharness::coq;
using coqharness::testing::fixture;
using coqharness::testing::oracle_segment;
using coqharness::testing::segmentation_snippets;

std::vector<std::string> texts(const std::vector<Sentence>& s) {
  std::vector<std::string> out;
  for (const auto& x : s) out.push_back(x.text);
  return out;
}

std::string rejoin(std::string_view src, const std::vector<Sentence>& sentences) {
  auto gaps = skipped_regions(src, sentences);
  std::string out = gaps.at(0);
  for (std::size_t i = 0; i < sentences.size(); ++i) out += sentences[i].text + gaps.at(i + 1);
  return out;
}

// ---- segmentation -----------------------------------------------------------

TEST(Segmentation, MatchesOracleOnEverySnippet) {
  ASSERT_GE(segmentation_snippets().size(), 30u);
  for (const auto& snip : segmentation_snippets()) {
    SCOPED_TRACE(snip.name);
    auto expected = oracle_segment(snip.source);
    if (expected.error) {
      try {
        segment_source(snip.source);
        ADD_FAILURE() << "expected a lexical error";
      } catch (const LexicalError& e) {
        EXPECT_EQ(e.code(), *expected.error == "comment" ? ErrorCode::kUnterminatedComment
                                                         : ErrorCode::kUnterminatedString);
        EXPECT_EQ(e.offset(), expected.error_offset);
      }
      continue;
    }
    auto got = segment_source(snip.source);
    EXPECT_EQ(texts(got.sentences), expected.sentences);
    EXPECT_EQ(got.unterminated_tail.has_value(), expected.unterminated_tail);
  }
}

TEST(Segmentation, OracleAgreesWithHandTracedExamples) {
  // Hand-traced, so the oracle itself is checked too.
  EXPECT_TRUE(oracle_segment("").sentences.empty());
  EXPECT_EQ(oracle_segment("Proof. intros x. Qed.").sentences,
            (std::vector<std::string>{"Proof.", "intros x.", "Qed."}));
  EXPECT_EQ(oracle_segment("(* a. b. *) Lemma l: Mod.t = Mod.t. Proof. reflexivity. Qed.").sentences,
            (std::vector<std::string>{"Lemma l: Mod.t = Mod.t.", "Proof.", "reflexivity.", "Qed."}));
  EXPECT_EQ(oracle_segment("split.\n- auto.\n- { exact I. }").sentences,
            (std::vector<std::string>{"split.", "-", "auto.", "-", "{", "exact I.", "}"}));
  EXPECT_EQ(oracle_segment("Definition s := \"a. b\". Check s.").sentences,
            (std::vector<std::string>{"Definition s := \"a. b\".", "Check s."}));
}

TEST(Segmentation, SpecExamples) {
  EXPECT_TRUE(segment_sentences("").empty());
  EXPECT_EQ(texts(segment_sentences("Proof. intros x. Qed.")),
            (std::vector<std::string>{"Proof.", "intros x.", "Qed."}));
  auto s = segment_sentences("(* a. b. *) Lemma l: Mod.t = Mod.t. Proof. reflexivity. Qed.");
  ASSERT_EQ(s.size(), 4u);
  EXPECT_EQ(s[0].text, "Lemma l: Mod.t = Mod.t.");
}

TEST(Segmentation, SpansPointIntoSourceAndIncrease) {
  for (const auto& snip : segmentation_snippets()) {
    SCOPED_TRACE(snip.name);
    if (oracle_segment(snip.source).error) continue;
    auto got = segment_source(snip.source);
    std::size_t last_end = 0;
    for (const auto& sen : got.sentences) {
      EXPECT_FALSE(sen.text.empty());
      EXPECT_GE(sen.span.start, last_end);
      EXPECT_LT(sen.span.start, sen.span.end);
      EXPECT_EQ(snip.source.substr(sen.span.start, sen.span.size()), sen.text);
      last_end = sen.span.end;
    }
  }
}

TEST(Segmentation, RoundTripsEverySnippetAndCorpusFile) {
  for (const auto& snip : segmentation_snippets()) {
    if (oracle_segment(snip.source).error) continue;
    auto got = segment_source(snip.source);
    EXPECT_EQ(rejoin(snip.source, got.sentences), snip.source) << snip.name;
  }
  for (const char* f : {"toy/Rel.v", "toy/Bisim.v"}) {
    auto src = coqharness::testing::read_text(fixture(f));
    EXPECT_EQ(rejoin(src, segment_sentences(src)), src) << f;
  }
}

TEST(Segmentation, LexicalErrorsCarryOffsets) {
  try {
    segment_sentences("Check nat. (* open");
    FAIL();
  } catch (const LexicalError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnterminatedComment);
    EXPECT_EQ(e.offset(), 11u);
  }
  try {
    segment_sentences("Definition s := \"x.");
    FAIL();
  } catch (const LexicalError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnterminatedString);
    EXPECT_EQ(e.offset(), 16u);
  }
}

TEST(Segmentation, SentenceClassifiers) {
  EXPECT_TRUE(is_closing_command("Qed."));
  EXPECT_TRUE(is_closing_command("Admitted."));
  EXPECT_TRUE(is_checked_closing_command("Defined."));
  EXPECT_FALSE(is_checked_closing_command("Admitted."));
  EXPECT_TRUE(is_theorem_statement("Lemma x: True."));
  EXPECT_TRUE(is_theorem_statement("Theorem x : True."));
  EXPECT_FALSE(is_theorem_statement("Definition x := 1."));
  EXPECT_EQ(statement_name("Lemma weak_refl: forall x, Weak T x x."), "weak_refl");
  EXPECT_TRUE(is_bullet("--"));
  EXPECT_FALSE(is_bullet("auto."));
}

// ---- proof states -------------------------------------------------------------

const char* kLargeState = R"(  A, X, Y : Type
  TX : reduction_t A X
  TY : reduction_t A Y
  B : relation X
  HB : controlled TX TY B
  F, G : function X Y
  HF : monotonic TX TY F
  HG : wmonotonic TX TY G
  HBF : transparent B F
  HFG : contains F G
  HBG : contains (chaining_l (star B)) G
  R : relation2 X Y
  HRt : evolve_t TX TY R (comp (star B) (F R))
  HRa : evolve_a TX TY R (G R)
  pre_silent :
    forall n : nat,
      evolve_t TX TY (UExp F R n) (comp (star B) (UExp F R (S n)))
  silent : simulation_t TX TY (comp (star B) (UIter F R))
  HFGn : forall n : nat, incl (UExp F R n) (UExp G R n)
  ______________________________________(1/1)
  forall (R0 : relation2 X Y) (n : nat),
    incl (comp (star B) (UExp G R0 n)) (UExp G R0 (S n))
)";

TEST(ProofState, ParsesLargeListing) {
  auto st = parse_proof_state(kLargeState);
  // 17 hypothesis lines; A, X, Y and F, G are grouped.
  EXPECT_EQ(st.hypotheses.size(), 17u);
  EXPECT_EQ(st.hypotheses[0].names, (std::vector<std::string>{"A", "X", "Y"}));
  EXPECT_EQ(st.hypotheses[0].type_text, "Type");
  EXPECT_EQ(st.hypotheses[5].names, (std::vector<std::string>{"F", "G"}));
  ASSERT_EQ(st.goals.size(), 1u);
  EXPECT_EQ(st.goals[0].rfind("forall (R0 : relation2 X Y)", 0), 0u);
  EXPECT_EQ(st.goal_index.total, 1u);
  EXPECT_TRUE(st.has_hypothesis("R"));
  EXPECT_TRUE(st.has_hypothesis("pre_silent"));
  EXPECT_EQ(parse_proof_state(render_proof_state(st)), st);
}

TEST(ProofState, MinimalAndMultiGoal) {
  auto one = parse_proof_state("______(1/1)\nTrue");
  EXPECT_TRUE(one.hypotheses.empty());
  EXPECT_EQ(one.goals, std::vector<std::string>{"True"});

  auto two = parse_proof_state(
      "2 subgoals\n\n  H : P\n  ______________________________________(1/2)\n  P\n"
      "  ______________________________________(2/2)\n  Q\n");
  EXPECT_EQ(two.goal_index.total, 2u);
  EXPECT_EQ(two.goals, (std::vector<std::string>{"P", "Q"}));
  EXPECT_EQ(parse_proof_state(render_proof_state(two)), two);
}

TEST(ProofState, PlainLayout) {
  auto st = parse_proof_state(
      "2 goals\n  x : nat\n  ============================\n  x = x\n\ngoal 2 is:\n True\n");
  EXPECT_EQ(st.goals.size(), 2u);
  EXPECT_EQ(st.goals[1], "True");
}

TEST(ProofState, Malformed) {
  EXPECT_THROW(parse_proof_state("no separator here"), HarnessError);
  EXPECT_THROW(parse_proof_state("  x : nat\n  x : bool\n  ______(1/1)\n  True"), HarnessError);
}

TEST(ProofState, RenderRoundTripsGeneratedStates) {
  for (int k = 0; k < 20; ++k) {
    ProofState st;
    for (int h = 0; h < k % 5; ++h) {
      st.hypotheses.push_back(Hypothesis{{"h" + std::to_string(h)}, "P" + std::to_string(h) + " -> Q",
                                         std::nullopt});
    }
    if (k % 3 == 0) st.hypotheses.push_back(Hypothesis{{"a", "b"}, "nat", std::nullopt});
    const int goals = 1 + k % 3;
    for (int g = 0; g < goals; ++g) st.goals.push_back("G" + std::to_string(g) + " x");
    st.goal_index = GoalIndex{1, static_cast<std::size_t>(goals)};
    EXPECT_EQ(parse_proof_state(render_proof_state(st)), st) << k;
  }
}

// ---- mock prover -------------------------------------------------------------

std::shared_ptr<const MockTable> relation_table() {
  auto t = std::make_shared<MockTable>();
  MockTheorem weak;
  weak.accepted = {{"intros x.", "constructor.", "reflexivity."}};
  t->add_theorem("weak_refl", weak);
  t->add_query("Print G", "G = fun R : relation2 X Y => ...");
  t->add_identifier("incl");
  return t;
}

std::unique_ptr<ProverSession> mock(std::shared_ptr<const MockTable> table,
                                    std::string_view prelude = "") {
  SessionConfig cfg;
  cfg.mock_table = std::move(table);
  cfg.prelude = segment_sentences(prelude);
  return start_session(cfg);
}

TEST(MockProver, TrivialProof) {
  auto s = mock(relation_table());
  auto r = s->execute(make_sentence("Lemma t: True."));
  ASSERT_TRUE(r.ok()) << r.message;
  ASSERT_TRUE(r.state);
  EXPECT_EQ(r.state->goals, std::vector<std::string>{"True"});
  r = s->execute(make_sentence("exact I."));
  EXPECT_TRUE(r.ok());
  EXPECT_FALSE(r.proof_complete);
  r = s->execute(make_sentence("Qed."));
  EXPECT_TRUE(r.ok());
  EXPECT_TRUE(r.proof_complete);
}

TEST(MockProver, IntroArityAndNameCollision) {
  auto s = mock(relation_table(), "Section S. Variable R : relation2 X Y.");
  ASSERT_TRUE(s->execute(make_sentence("Lemma G_reverse: forall R, eeq (trans (G R)) (G (trans R)).")).ok());
  auto before = s->current_state();
  auto r = s->execute(make_sentence("intros R u v."));
  EXPECT_FALSE(r.ok());
  EXPECT_FALSE(r.message.empty());
  // Rolled back: the failed step had no effect.
  EXPECT_EQ(s->current_state(), before);
  r = s->execute(make_sentence("intro R."));
  EXPECT_FALSE(r.ok());
  EXPECT_EQ(r.message, "R is already used.");
  r = s->execute(make_sentence("intros RR."));
  EXPECT_TRUE(r.ok()) << r.message;
}

TEST(MockProver, UnknownReference) {
  auto s = mock(relation_table());
  ASSERT_TRUE(s->execute(make_sentence("Lemma b: forall n, n = n.")).ok());
  auto r = s->execute(make_sentence("apply stutter_bisim."));
  EXPECT_FALSE(r.ok());
  EXPECT_EQ(r.message, "The reference stutter_bisim was not found in the current environment.");
}

TEST(MockProver, PreludeRejected) {
  try {
    mock(relation_table(), "Require Import NoSuchLib.");
    FAIL();
  } catch (const PreludeError& e) {
    EXPECT_EQ(e.step_index(), 0u);
    EXPECT_NE(std::string(e.what()).find("Cannot find"), std::string::npos);
  }
}

TEST(MockProver, QueriesDoNotChangeState) {
  auto s = mock(relation_table());
  ASSERT_TRUE(s->execute(make_sentence("Lemma t: True.")).ok());
  auto before = s->current_state();
  EXPECT_EQ(s->query(QueryCommand::kPrint, "G"), "G = fun R : relation2 X Y => ...");
  EXPECT_EQ(s->current_state(), before);
  try {
    s->query(QueryCommand::kPrint, "undefined_xyz");
    FAIL();
  } catch (const HarnessError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kQueryRejected);
    EXPECT_NE(std::string(e.what()).find("not found"), std::string::npos);
  }
  EXPECT_TRUE(s->execute(make_sentence("exact I.")).ok());
}

TEST(MockProver, QueryAllowList) {
  EXPECT_EQ(parse_query_command("Print"), QueryCommand::kPrint);
  EXPECT_EQ(parse_query_command("Locate"), QueryCommand::kLocate);
  EXPECT_FALSE(parse_query_command("print"));
  EXPECT_FALSE(parse_query_command("Reset"));
}

TEST(CheckProof, AcceptsAndRejects) {
  auto s = mock(relation_table());
  auto ok = check_proof(*s, "Lemma t: True.", "Proof. exact I. Qed.");
  EXPECT_TRUE(ok.accepted);
  auto bad = check_proof(*s, "Lemma t: True.", "Proof. exact O. Qed.");
  EXPECT_FALSE(bad.accepted);
  ASSERT_TRUE(bad.failing_step);
  EXPECT_EQ(bad.failing_step->index, 1u);
  EXPECT_EQ(bad.failing_step->sentence.text, "exact O.");
  EXPECT_FALSE(bad.message.empty());
}

TEST(CheckProof, IncompleteProofIsRejected) {
  auto s = mock(relation_table());
  auto r = check_proof(*s, "Lemma t: True /\\ True.", "Proof. split. exact I. Qed.");
  EXPECT_FALSE(r.accepted);
}

TEST(CheckProof, WeakReflUnderPrelude) {
  const char* prelude =
      "Section W. Variable A : Type. Variable T : relation A.\n"
      "Inductive Weak (T : relation A) : A -> A -> Prop := weak_nil : forall x y, x = y -> Weak T x y.";
  auto s = mock(relation_table(), prelude);
  auto r = check_proof(*s, "Lemma weak_refl: forall x, Weak T x x.",
                       "Proof.\n  intros x.\n  constructor.\n  reflexivity.\nQed.");
  EXPECT_TRUE(r.accepted) << r.message;
}

TEST(CheckProof, SideEffectFreeAndRepeatable) {
  auto s = mock(relation_table());
  auto mark = s->mark();
  auto a = check_proof(*s, "Lemma t: True.", "Proof. exact O. Qed.");
  auto b = check_proof(*s, "Lemma t: True.", "Proof. exact O. Qed.");
  EXPECT_EQ(a, b);
  // The name is still free, so the statement can be opened again.
  auto c = check_proof(*s, "Lemma t: True.", "Proof. exact I. Qed.");
  auto d = check_proof(*s, "Lemma t: True.", "Proof. exact I. Qed.");
  EXPECT_TRUE(c.accepted);
  EXPECT_EQ(c, d);
  EXPECT_EQ(s->current_state(), std::nullopt);
  (void)mark;
}

TEST(CheckProof, LexicalErrorIsDistinct) {
  auto s = mock(relation_table());
  EXPECT_THROW(check_proof(*s, "Lemma t: True.", "Proof. (* open"), LexicalError);
}

TEST(SessionConfig, Validation) {
  SessionConfig cfg;
  cfg.timeout_per_step = std::chrono::milliseconds(0);
  EXPECT_THROW(cfg.validate(), HarnessError);
  cfg.timeout_per_step = std::chrono::milliseconds(10);
  cfg.backend = Backend::kReal;
  cfg.prover_command = "";
  EXPECT_THROW(cfg.validate(), HarnessError);
}

// ---- real backend against a scripted stand-in ---------------------------------

SessionConfig fake_coqtop(std::chrono::milliseconds timeout = std::chrono::milliseconds(5000)) {
  SessionConfig cfg;
  cfg.backend = Backend::kReal;
  cfg.prover_command = "python3 -u " + fixture("fake_coqtop.py").string();
  cfg.timeout_per_step = timeout;
  return cfg;
}

TEST(CoqtopSession, ExecutesAndParsesStates) {
  auto s = start_session(fake_coqtop());
  auto r = s->execute(make_sentence("Lemma t: True /\\ True."));
  ASSERT_TRUE(r.ok()) << r.message;
  ASSERT_TRUE(r.state);
  EXPECT_EQ(r.state->goals, std::vector<std::string>{"True /\\ True"});
  r = s->execute(make_sentence("split."));
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.state->goal_index.total, 2u);
  EXPECT_TRUE(s->execute(make_sentence("exact I.")).ok());
  EXPECT_TRUE(s->execute(make_sentence("exact I.")).ok());
  r = s->execute(make_sentence("Qed."));
  EXPECT_TRUE(r.ok());
  EXPECT_TRUE(r.proof_complete);
}

TEST(CoqtopSession, ErrorsRollBackAndKeepMessageVerbatim) {
  auto s = start_session(fake_coqtop());
  ASSERT_TRUE(s->execute(make_sentence("Lemma t: True.")).ok());
  auto before = s->current_state();
  auto r = s->execute(make_sentence("exact O."));
  EXPECT_FALSE(r.ok());
  EXPECT_NE(r.message.find("has type \"nat\""), std::string::npos);
  EXPECT_EQ(s->current_state(), before);
  EXPECT_TRUE(s->execute(make_sentence("exact I.")).ok());
}

TEST(CoqtopSession, CheckProofAndQueries) {
  auto s = start_session(fake_coqtop());
  auto ok = check_proof(*s, "Lemma t: True.", "Proof. exact I. Qed.");
  EXPECT_TRUE(ok.accepted) << ok.message;
  auto bad = check_proof(*s, "Lemma t: True.", "Proof. exact O. Qed.");
  EXPECT_FALSE(bad.accepted);
  ASSERT_TRUE(bad.failing_step);
  EXPECT_EQ(bad.failing_step->index, 1u);
  auto out = s->query(QueryCommand::kCheck, "nat");
  EXPECT_NE(out.find("Set"), std::string::npos);
  EXPECT_THROW(s->query(QueryCommand::kPrint, "undefined_xyz"), HarnessError);
}

TEST(CoqtopSession, TimeoutRestartsSession) {
  auto s = start_session(fake_coqtop(std::chrono::milliseconds(1500)));
  ASSERT_TRUE(s->execute(make_sentence("Lemma t: True.")).ok());
  auto r = s->execute(make_sentence("hang."));
  EXPECT_FALSE(r.ok());
  EXPECT_EQ(r.message, kTimeoutMessage);
  // Replayed: the proof is still open.
  EXPECT_TRUE(s->execute(make_sentence("exact I.")).ok());
  EXPECT_TRUE(s->execute(make_sentence("Qed.")).proof_complete);
}

TEST(CoqtopSession, SpawnFailure) {
  SessionConfig cfg = fake_coqtop(std::chrono::milliseconds(1000));
  cfg.prover_command = "/nonexistent/coqtop-binary";
  try {
    start_session(cfg);
    FAIL();
  } catch (const HarnessError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSpawnFailure);
  }
}

TEST(CoqtopSession, CleansEmacsMarkup) {
  EXPECT_EQ(CoqtopSession::clean_output("<infomsg>hello</infomsg>\n"), "hello");
  EXPECT_TRUE(CoqtopSession::looks_like_error("Toplevel input, characters 0-3:\n> x\nError: no"));
  EXPECT_FALSE(CoqtopSession::looks_like_error("1 subgoal"));
}

}  // namespace

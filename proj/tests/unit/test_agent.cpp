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

#include <random>
#include <set>

#include "coqharness/agent/agent.hpp"
#include "coqharness/common/error.hpp"
#include "coqharness/common/text.hpp"
#include "coqharness/model/scripted_provider.hpp"
#include "coqharness/retriever/index.hpp"
#include "fixtures.hpp"

namespace {

using namespace coqharness;
using namespace coqharness::agent;
using model::ScriptEntry;
using model::ScriptedProvider;
using prompting::PromptMode;

const char* kWeakRefl = "Proof.\n  intros x.\n  constructor.\n  reflexivity.\nQed.";
const char* kTauto = "Proof.\n  tauto.\nQed.";
const char* kRefusal =
    "(* Without further information on what the definitions are, I cannot generate a valid "
    "proof. Please provide more information. *)";

ScriptEntry entry(std::string theorem, std::vector<std::string> completions,
                  std::optional<int> turn = std::nullopt, std::optional<std::string> variant = std::nullopt) {
  ScriptEntry e;
  e.selector.theorem = std::move(theorem);
  e.selector.turn = turn;
  e.selector.variant = std::move(variant);
  e.completions = std::move(completions);
  return e;
}

struct Harness {
  corpus::Corpus corpus = coqharness::testing::toy_corpus();
  retriever::Index index = retriever::Index::build(corpus.with_label(corpus::SplitLabel::kTrain));
  ScriptedProvider provider;
  AgentDeps deps;

  explicit Harness(std::vector<ScriptEntry> entries, std::string fallback = kTauto)
      : provider(std::move(entries), std::move(fallback)) {
    deps.corpus = &corpus;
    deps.index = &index;
    deps.provider = &provider;
    deps.sessions = coqharness::testing::mock_sessions(coqharness::testing::toy_mock());
  }
  const corpus::TheoremRecord& at(const std::string& name) const {
    for (const auto& r : corpus.records) {
      if (r.name == name) return r;
    }
    throw std::runtime_error("no record " + name);
  }
};

RunConfig config(PromptMode mode, AgentLoop loop, int n) {
  auto c = RunConfig::for_mode(mode, loop);
  c.decoding.n = n;
  c.seed = 7;
  if (prompting::is_few_shot(mode)) c.k_shots = 2;
  return c;
}

void expect_no_leak(const std::vector<AttemptRecord>& records, const corpus::TheoremRecord& target) {
  const auto reference = text::normalize_whitespace(target.proof_text());
  for (const auto& r : records) {
    for (const auto& t : r.turns) {
      for (const auto& m : t.prompt_delta) {
        EXPECT_EQ(text::normalize_whitespace(m.content).find(reference), std::string::npos)
            << r.theorem_id;
      }
    }
  }
}

TEST(OneShot, WeakReflAccepted) {
  Harness h({entry("weak_refl", {kWeakRefl})});
  auto recs = prove_one_shot(h.at("weak_refl"), config(PromptMode::kZs, AgentLoop::kOneShot, 1), h.deps);
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_TRUE(recs[0].accepted);
  EXPECT_TRUE(recs[0].checked);
  EXPECT_FALSE(recs[0].failing_step);
  EXPECT_EQ(recs[0].category, ErrorCategory::kCorrect);
  EXPECT_EQ(recs[0].config_tag, "zs");
  ASSERT_EQ(recs[0].turns.size(), 1u);
  EXPECT_EQ(recs[0].turns[0].completion, kWeakRefl);
  EXPECT_TRUE(recs[0].turns[0].tool_calls.empty());
}

TEST(OneShot, RefusalIsNeverChecked) {
  Harness h({entry("comp_eeq", {kRefusal})});
  auto recs = prove_one_shot(h.at("comp_eeq"), config(PromptMode::kZs, AgentLoop::kOneShot, 2), h.deps);
  ASSERT_EQ(recs.size(), 2u);
  for (const auto& r : recs) {
    EXPECT_EQ(r.completion_kind, "refusal");
    EXPECT_FALSE(r.checked);
    EXPECT_FALSE(r.accepted);
    EXPECT_EQ(r.category, ErrorCategory::kRefusal);
  }
}

TEST(OneShot, IdenticalSamplesAreDeduplicated) {
  Harness h({entry("weak_refl", {kWeakRefl})});
  auto recs = prove_one_shot(h.at("weak_refl"), config(PromptMode::kZs, AgentLoop::kOneShot, 5), h.deps);
  ASSERT_EQ(recs.size(), 5u);
  std::set<std::string> unique;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    EXPECT_EQ(recs[i].candidate_index, i);
    EXPECT_TRUE(recs[i].accepted);
    unique.insert(recs[i].proof_script);
    if (i > 0) {
      EXPECT_EQ(recs[i].duplicate_of, std::optional<std::size_t>(0));
    }
  }
  EXPECT_EQ(unique.size(), 1u);
  EXPECT_FALSE(recs[0].duplicate_of);
}

TEST(OneShot, FailingStepAndHallucination) {
  Harness h({entry("bisim_sym",
                   {"Proof.\n  unfold bisimulation, bisim.\n  intros s t H.\n  apply stutter_bisim in H.\n  auto.\nQed."})});
  auto recs = prove_one_shot(h.at("bisim_sym"), config(PromptMode::kZs, AgentLoop::kOneShot, 1), h.deps);
  ASSERT_EQ(recs.size(), 1u);
  ASSERT_TRUE(recs[0].failing_step);
  EXPECT_EQ(recs[0].failing_step->sentence, "apply stutter_bisim in H.");
  EXPECT_EQ(recs[0].failing_step->error_message,
            "The reference stutter_bisim was not found in the current environment.");
  EXPECT_EQ(recs[0].category, ErrorCategory::kHallucinatedReference);
}

TEST(OneShot, ExampleSelectionPerMode) {
  Harness h({});
  const auto& target = h.at("bisim_sym");
  auto rand = make_prompt(target, config(PromptMode::kFsRand, AgentLoop::kOneShot, 1), h.deps);
  EXPECT_EQ(rand.example_count(), 2u);
  auto sim = make_prompt(target, config(PromptMode::kFsSim, AgentLoop::kOneShot, 1), h.deps);
  EXPECT_EQ(sim.example_count(), 2u);
  auto top = retriever::retrieve(h.index, target, 2);
  ASSERT_EQ(top.size(), 2u);
  EXPECT_EQ(sim.example_ids, (std::vector<std::string>{top[0].id, top[1].id}));
  for (const auto& id : rand.example_ids) EXPECT_EQ(h.corpus.label(id), corpus::SplitLabel::kTrain);
  // Same seed, same examples.
  EXPECT_EQ(make_prompt(target, config(PromptMode::kFsRand, AgentLoop::kOneShot, 1), h.deps), rand);

  auto lem = make_prompt(h.at("bisim_refl"), config(PromptMode::kZsLem, AgentLoop::kOneShot, 1), h.deps);
  // bisim_refl is third in its file.
  const auto& last = lem.messages.back().content;
  EXPECT_NE(last.find("bisim_sym"), std::string::npos);
  EXPECT_NE(last.find("true_intro"), std::string::npos);
  EXPECT_TRUE(make_prompt(target, config(PromptMode::kZsLem, AgentLoop::kOneShot, 1), h.deps)
                  .messages.back().content.find("true_intro") == std::string::npos);
  auto no_index = h.deps;
  no_index.index = nullptr;
  EXPECT_THROW(make_prompt(target, config(PromptMode::kFsSim, AgentLoop::kOneShot, 1), no_index),
               HarnessError);
}

TEST(OneShot, ProviderFailureIsData) {
  struct Failing : model::Provider {
    model::CompletionResult complete(const prompting::ChatPrompt&, const model::DecodingParams&) override {
      throw ProviderError(503, "unavailable");
    }
    std::string name() const override { return "failing"; }
  } failing;
  Harness h({});
  h.deps.provider = &failing;
  auto recs = prove_one_shot(h.at("weak_refl"), config(PromptMode::kZs, AgentLoop::kOneShot, 3), h.deps);
  ASSERT_EQ(recs.size(), 3u);
  for (const auto& r : recs) {
    EXPECT_EQ(r.completion_kind, "provider_error");
    EXPECT_FALSE(r.accepted);
  }
}

TEST(Interactive, QueryThenProof) {
  Harness h({entry("bisim_sym", {"QUERY Print bisim"}, 0),
             entry("bisim_sym", {"unfold bisimulation, bisim."}, 1),
             entry("bisim_sym", {"intros s t H.\nsymmetry; exact H."}, 2)});
  auto cfg = config(PromptMode::kZs, AgentLoop::kInteractive, 1);
  auto r = prove_interactive(h.at("bisim_sym"), cfg, h.deps);
  EXPECT_TRUE(r.accepted) << r.message();
  EXPECT_EQ(r.category, ErrorCategory::kCorrect);
  EXPECT_EQ(r.tool_call_count(), 1u);
  ASSERT_EQ(r.turns.size(), 3u);
  ASSERT_EQ(r.turns[0].tool_calls.size(), 1u);
  EXPECT_EQ(r.turns[0].tool_calls[0].command, "Print");
  EXPECT_EQ(r.turns[0].tool_calls[0].argument, "bisim");
  EXPECT_FALSE(r.turns[0].tool_calls[0].rejected);
  // The verbatim query output is the next user message.
  ASSERT_EQ(r.turns[1].prompt_delta.size(), 1u);
  EXPECT_EQ(r.turns[1].prompt_delta[0].content, "bisim = fun s t : state => s = t\n     : state -> state -> Prop");
  // The first prompt already carries the rendered proof state.
  EXPECT_NE(r.turns[0].prompt_delta.back().content.find("bisimulation bisim"), std::string::npos);
  EXPECT_NE(r.proof_script.find("symmetry; exact H."), std::string::npos);
  EXPECT_LE(static_cast<int>(r.turns.size()), cfg.budgets.max_turns);
  expect_no_leak({r}, h.at("bisim_sym"));
}

TEST(Interactive, NameClashIsFedBack) {
  corpus::Corpus c;
  corpus::ingest_source("G.v",
                        "Section S.\n  Variable X : Type.\n  Variable R : relation X.\n"
                        "  Lemma G_reverse: forall R : relation X, eeq (trans (G R)) (G (trans R)).\n"
                        "  Proof. intros RR. auto. Qed.\nEnd S.\n",
                        c);
  ASSERT_EQ(c.records.size(), 1u);
  c.split_labels[c.records[0].id] = corpus::SplitLabel::kTest;
  ScriptedProvider provider({entry("G_reverse", {"intro R."}, 0), entry("G_reverse", {"intro RR."}, 1)},
                            "I need to think about this");
  AgentDeps deps;
  deps.corpus = &c;
  deps.provider = &provider;
  deps.sessions = coqharness::testing::mock_sessions(std::make_shared<coq::MockTable>());
  auto r = prove_interactive(c.records[0], config(PromptMode::kZs, AgentLoop::kInteractive, 1), deps);
  ASSERT_GE(r.turns.size(), 2u);
  ASSERT_EQ(r.turns[1].prompt_delta.size(), 1u);
  EXPECT_NE(r.turns[1].prompt_delta[0].content.find("R is already used."), std::string::npos);
  ASSERT_GE(r.turns.size(), 3u);
  // intro RR. went through: the next feedback is a plain state with RR in it.
  EXPECT_EQ(r.turns[2].prompt_delta[0].content.find("R is already used."), std::string::npos);
  EXPECT_NE(r.turns[2].prompt_delta[0].content.find("RR"), std::string::npos);
  EXPECT_EQ(r.proof_script, "intro RR.");
}

TEST(Interactive, StallStopsAfterTwoTurns) {
  Harness h({}, "Let me think about this carefully");
  auto r = prove_interactive(h.at("bisim_refl"), config(PromptMode::kZs, AgentLoop::kInteractive, 1), h.deps);
  EXPECT_FALSE(r.accepted);
  EXPECT_EQ(r.turns.size(), static_cast<std::size_t>(kMaxStalledTurns));
  EXPECT_EQ(r.category, ErrorCategory::kOther);
}

TEST(Interactive, RefusalStops) {
  Harness h({}, kRefusal);
  auto r = prove_interactive(h.at("bisim_refl"), config(PromptMode::kZs, AgentLoop::kInteractive, 1), h.deps);
  EXPECT_EQ(r.turns.size(), 1u);
  EXPECT_EQ(r.category, ErrorCategory::kRefusal);
}

TEST(Interactive, TurnBudgetIsResource) {
  Harness h({}, "apply nothing_here.");
  auto cfg = config(PromptMode::kZs, AgentLoop::kInteractive, 1);
  cfg.budgets.max_turns = 3;
  auto r = prove_interactive(h.at("bisim_refl"), cfg, h.deps);
  EXPECT_EQ(r.turns.size(), 3u);
  EXPECT_FALSE(r.accepted);
  EXPECT_EQ(r.category, ErrorCategory::kResource);
  EXPECT_NE(r.error_message.find("max_turns"), std::string::npos);
}

TEST(Interactive, QueryBudgetAndUnknownCommands) {
  Harness h({entry("bisim_refl", {"QUERY Frobnicate bisim"}, 0)}, "QUERY Print bisim");
  auto cfg = config(PromptMode::kZs, AgentLoop::kInteractive, 1);
  cfg.budgets.max_queries = 2;
  auto r = prove_interactive(h.at("bisim_refl"), cfg, h.deps);
  EXPECT_EQ(r.tool_call_count(), 2u);
  EXPECT_TRUE(r.turns[0].tool_calls[0].rejected);
  EXPECT_EQ(r.turns.size(), 3u);
  EXPECT_EQ(r.category, ErrorCategory::kResource);
}

TEST(Interactive, BudgetsHoldOnRandomDialogues) {
  const std::vector<std::string> pool{
      "QUERY Print bisim",  "QUERY Check nat",   "QUERY Frobnicate x", "Let me think",
      "apply nothing_here.", "intros s.",        "reflexivity.",       "intros s. reflexivity.",
      "Proof.",             "intros s t u v.",   kRefusal,             "auto. auto. auto. auto. auto. auto."};
  std::mt19937_64 g(2024);
  int accepted = 0;
  for (int run = 0; run < 100; ++run) {
    std::vector<ScriptEntry> entries;
    for (int t = 0; t < 12; ++t) {
      entries.push_back(entry("bisim_refl", {pool[g() % pool.size()]}, t));
    }
    Harness h(entries, "Let me think");
    auto cfg = config(PromptMode::kZs, AgentLoop::kInteractive, 1);
    cfg.budgets.max_turns = 1 + static_cast<int>(g() % 8);
    cfg.budgets.max_queries = static_cast<int>(g() % 4);
    auto r = prove_interactive(h.at("bisim_refl"), cfg, h.deps);
    EXPECT_LE(static_cast<int>(r.turns.size()), cfg.budgets.max_turns) << run;
    EXPECT_LE(static_cast<int>(r.tool_call_count()), cfg.budgets.max_queries) << run;
    EXPECT_EQ(r.accepted, r.category == ErrorCategory::kCorrect) << run;
    if (r.error_message.rfind("budget exhausted", 0) == 0) {
      EXPECT_EQ(r.category, ErrorCategory::kResource) << run;
    }
    if (r.accepted) ++accepted;
  }
  EXPECT_GT(accepted, 0);
}

TEST(Repair, HallucinationFixedInRoundOne) {
  Harness h({entry("bisim_sym",
                   {"Proof.\n  unfold bisimulation, bisim.\n  intros s t H.\n  apply stutter_bisim in H.\n  auto.\nQed."},
                   0),
             entry("bisim_sym", {"Proof.\n  unfold bisimulation, bisim.\n  intros s t H.\n  auto.\nQed."}, 1)});
  auto cfg = config(PromptMode::kZs, AgentLoop::kRepair, 1);
  auto recs = repair_loop(h.at("bisim_sym"), cfg, h.deps);
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_FALSE(recs[0].accepted);
  EXPECT_EQ(recs[0].category, ErrorCategory::kHallucinatedReference);
  EXPECT_TRUE(recs[1].accepted);
  EXPECT_EQ(recs[1].round, 1);
  ASSERT_EQ(recs[1].turns.size(), 1u);
  const auto& delta = recs[1].turns[0].prompt_delta;
  ASSERT_EQ(delta.size(), 2u);
  EXPECT_EQ(delta[0].role, prompting::Role::kAssistant);
  EXPECT_NE(delta[1].content.find("The reference stutter_bisim was not found"), std::string::npos);
  EXPECT_NE(delta[1].content.find("apply stutter_bisim in H."), std::string::npos);
}

TEST(Repair, AcceptedInRoundZeroStopsEarly) {
  Harness h({entry("weak_refl", {kWeakRefl, kTauto, kTauto})});
  auto recs = repair_loop(h.at("weak_refl"), config(PromptMode::kZs, AgentLoop::kRepair, 3), h.deps);
  EXPECT_EQ(recs.size(), 3u);
}

TEST(Repair, AllRoundsFail) {
  Harness h({entry("bisim_refl", {"Proof. apply nothing_here. Qed.", "Proof. intros s t u. Qed.",
                                  "Proof. apply nothing_here. Qed."},
                   0)},
            "Proof. tauto. Qed.");
  auto cfg = config(PromptMode::kZs, AgentLoop::kRepair, 3);
  cfg.repair_rounds = 3;
  auto recs = repair_loop(h.at("bisim_refl"), cfg, h.deps);
  // 3 samples, 2 unique failing scripts, 3 rounds.
  EXPECT_EQ(recs.size(), 3u + 3u * 2u);
  for (const auto& r : recs) EXPECT_FALSE(r.accepted);
  for (int round = 1; round <= 3; ++round) {
    EXPECT_EQ(std::count_if(recs.begin(), recs.end(), [&](const AttemptRecord& r) { return r.round == round; }), 2);
  }
  expect_no_leak(recs, h.at("bisim_refl"));
}

TEST(Ensemble, Shares) {
  EXPECT_EQ(ensemble_shares(5, 1), (std::vector<int>{3, 2}));
  EXPECT_EQ(ensemble_shares(5, 2), (std::vector<int>{3, 1, 1}));
  EXPECT_EQ(ensemble_shares(6, 2), (std::vector<int>{2, 2, 2}));
  EXPECT_EQ(ensemble_shares(1, 2), (std::vector<int>{1, 0, 0}));
}

TEST(Ensemble, SimpleTacticsVariantProvesWhatBaseMisses) {
  Harness h({entry("trans_incl", {"Proof. auto. Qed."}, std::nullopt, "simple-tactics-first"),
             entry("trans_incl", {"Proof.\n  intros x y z H1 H2.\n  apply H1.\nQed."})});
  auto base_cfg = config(PromptMode::kZs, AgentLoop::kOneShot, 5);
  auto base = prove_one_shot(h.at("trans_incl"), base_cfg, h.deps);
  EXPECT_TRUE(std::none_of(base.begin(), base.end(), [](const AttemptRecord& r) { return r.accepted; }));

  auto cfg = config(PromptMode::kZs, AgentLoop::kEnsemble, 5);
  cfg.strategies = {prompting::parse_strategy("simple-tactics-first")};
  auto recs = run_ensemble(h.at("trans_incl"), cfg, h.deps);
  ASSERT_EQ(recs.size(), 5u);
  int base_n = 0, variant_n = 0;
  for (const auto& r : recs) {
    if (r.variant_id == "base") {
      ++base_n;
      EXPECT_FALSE(r.accepted);
    } else {
      ++variant_n;
      EXPECT_EQ(r.variant_id, "simple-tactics-first");
      EXPECT_TRUE(r.accepted);
    }
  }
  EXPECT_EQ(base_n, 3);
  EXPECT_EQ(variant_n, 2);

  cfg.strategies.clear();
  try {
    run_ensemble(h.at("trans_incl"), cfg, h.deps);
    FAIL();
  } catch (const HarnessError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfigMismatch);
  }
}

TEST(Ensemble, MonotoneOverBase) {
  auto script = ScriptedProvider::load(coqharness::testing::fixture("toy_script.json"));
  Harness h({});
  h.deps.provider = &script;
  auto tests = h.corpus.with_label(corpus::SplitLabel::kTest);
  for (auto mode : {PromptMode::kZs, PromptMode::kFsRand}) {
    auto base_cfg = config(mode, AgentLoop::kOneShot, 3);
    auto ens_cfg = config(mode, AgentLoop::kEnsemble, 3);
    ens_cfg.strategies = {prompting::parse_strategy("no-lemma-use"), prompting::parse_strategy("example-reorder:3")};
    std::set<std::string> base_proven, ens_proven;
    for (const auto& r : prove_all(tests, base_cfg, h.deps)) {
      if (r.accepted) base_proven.insert(r.theorem_id);
    }
    for (const auto& r : prove_all(tests, ens_cfg, h.deps)) {
      if (r.accepted) ens_proven.insert(r.theorem_id);
    }
    for (const auto& id : base_proven) {
      if (ens_proven.count(id) == 0) {
        // Only possible if the base share shrank below the accepted index.
        auto base = prove_one_shot(h.corpus.at(id), base_cfg, h.deps);
        auto first_ok = std::find_if(base.begin(), base.end(), [](const auto& r) { return r.accepted; });
        EXPECT_GE(static_cast<int>(first_ok - base.begin()), ensemble_shares(3, 2)[0]) << id;
      }
    }
  }
}

TEST(ProveAll, DeterministicAcrossWorkers) {
  auto script = ScriptedProvider::load(coqharness::testing::fixture("toy_script.json"));
  Harness h({});
  h.deps.provider = &script;
  auto tests = h.corpus.with_label(corpus::SplitLabel::kTest);
  for (auto mode : {PromptMode::kFsSim, PromptMode::kFsLem}) {
    auto cfg = config(mode, AgentLoop::kOneShot, 3);
    const auto one = attempts_to_jsonl(prove_all(tests, cfg, h.deps, 1));
    EXPECT_EQ(attempts_to_jsonl(prove_all(tests, cfg, h.deps, 1)), one);
    EXPECT_EQ(attempts_to_jsonl(prove_all(tests, cfg, h.deps, 4)), one);
    auto back = attempts_from_jsonl(one);
    EXPECT_EQ(attempts_to_jsonl(back), one);
    for (const auto* t : tests) {
      std::vector<AttemptRecord> mine;
      for (const auto& r : back) {
        if (r.theorem_id == t->id) mine.push_back(r);
      }
      expect_no_leak(mine, *t);
    }
  }
}

TEST(RunConfig, ValidationAndManifest) {
  auto c = RunConfig::for_mode(PromptMode::kFsSim);
  EXPECT_EQ(c.k_shots, 6);
  EXPECT_EQ(c.decoding.n, 5);
  EXPECT_EQ(c.budgets, (Budgets{30, 10, std::chrono::milliseconds(0)}));
  EXPECT_EQ(c.repair_rounds, 2);
  c.k_shots = 0;
  EXPECT_THROW(c.validate(), HarnessError);
  auto z = RunConfig::for_mode(PromptMode::kZs);
  z.k_shots = 2;
  EXPECT_THROW(z.validate(), HarnessError);
  auto r = RunConfig::for_mode(PromptMode::kZs, AgentLoop::kRepair);
  r.repair_rounds = 0;
  EXPECT_THROW(r.validate(), HarnessError);
  auto t = RunConfig::for_mode(PromptMode::kZs, AgentLoop::kInteractive);
  t.budgets.max_turns = 0;
  EXPECT_THROW(t.validate(), HarnessError);

  auto manifest = load_manifest(coqharness::testing::fixture("toy_manifest.json"));
  ASSERT_EQ(manifest.size(), 5u);
  EXPECT_EQ(manifest[2].effective_tag(), "fs-sim");
  EXPECT_EQ(parse_manifest(manifest_to_json(manifest)), manifest);
  EXPECT_EQ(manifest_hash(parse_manifest(manifest_to_json(manifest))), manifest_hash(manifest));
  EXPECT_THROW(parse_manifest(nlohmann::json::parse(R"({"configs": [{"mode": "nope"}]})")), HarnessError);
}

}  // namespace

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

#include <algorithm>

#include "coqharness/common/error.hpp"
#include "coqharness/corpus/corpus.hpp"
#include "coqharness/prompting/completion.hpp"
#include "coqharness/prompting/prompt.hpp"
#include "coqharness/prompting/templates.hpp"
#include "fixtures.hpp"

namespace {

using namespace coqharness;
using namespace coqharness::prompting;

struct Fixture {
  corpus::Corpus c = coqharness::testing::synthetic_corpus(8);
  const corpus::TheoremRecord& target() const { return c.records.back(); }
  std::vector<PromptExample> examples(std::size_t k) const {
    std::vector<PromptExample> out;
    for (std::size_t i = 0; i < k; ++i) out.push_back(make_example(c.records[i]));
    return out;
  }
};

PromptConfig cfg(PromptMode mode) {
  PromptConfig p;
  p.mode = mode;
  return p;
}

bool well_formed(const ChatPrompt& p, const corpus::TheoremRecord& target) {
  if (p.messages.size() < 2 || p.messages.front().role != Role::kSystem) return false;
  for (std::size_t i = 1; i < p.messages.size(); ++i) {
    if (p.messages[i].content.empty() || p.messages[i].role == Role::kSystem) return false;
    const Role want = (i % 2 == 1) ? Role::kUser : Role::kAssistant;
    if (p.messages[i].role != want) return false;
  }
  return p.messages.back().role == Role::kUser &&
         p.messages.back().content.find(target.statement.text) != std::string::npos;
}

TEST(BuildPrompt, ZeroShotHasTwoMessages) {
  Fixture f;
  auto p = build_prompt(cfg(PromptMode::kZs), f.target(), {}, {});
  ASSERT_EQ(p.messages.size(), 2u);
  EXPECT_TRUE(well_formed(p, f.target()));
  EXPECT_EQ(p.config_tag, "zs");
  EXPECT_EQ(p.variant_id, "base");
  EXPECT_EQ(p.theorem_id, f.target().id);
  // The statement ends at its period: no proof text follows.
  EXPECT_EQ(p.messages.back().content.find("Proof."), std::string::npos);
}

TEST(BuildPrompt, FewShotSixExamplesAlternate) {
  Fixture f;
  auto p = build_prompt(cfg(PromptMode::kFsRand), f.target(), f.examples(6), {});
  ASSERT_EQ(p.messages.size(), 2u + 2u * 6u);
  EXPECT_TRUE(well_formed(p, f.target()));
  const auto assistants = std::count_if(p.messages.begin(), p.messages.end(),
                                        [](const ChatMessage& m) { return m.role == Role::kAssistant; });
  EXPECT_EQ(static_cast<std::size_t>(assistants), p.example_count());
  EXPECT_EQ(p.messages[2].content, f.c.records[0].proof_text());
}

TEST(BuildPrompt, LemmasPrecedeTheTarget) {
  Fixture f;
  std::vector<LemmaRef> lemmas{make_lemma(f.c.records[5]), make_lemma(f.c.records[6])};
  auto p = build_prompt(cfg(PromptMode::kFsLem), f.target(), f.examples(2), lemmas);
  EXPECT_TRUE(well_formed(p, f.target()));
  const auto& last = p.messages.back().content;
  const auto at_target = last.find(f.target().statement.text);
  for (const char* name : {"syn_5", "syn_6"}) {
    auto pos = last.find(name);
    ASSERT_NE(pos, std::string::npos) << name;
    EXPECT_LT(pos, at_target);
  }
  auto z = build_prompt(cfg(PromptMode::kZsLem), f.target(), {}, lemmas);
  EXPECT_EQ(z.messages.size(), 2u);
  EXPECT_NE(z.messages.back().content.find("syn_6"), std::string::npos);
}

TEST(BuildPrompt, ConfigMismatches) {
  Fixture f;
  auto expect_mismatch = [&](PromptMode mode, std::size_t k, bool lemmas) {
    std::vector<LemmaRef> l;
    if (lemmas) l.push_back(make_lemma(f.c.records[0]));
    try {
      build_prompt(cfg(mode), f.target(), f.examples(k), l);
      ADD_FAILURE() << prompt_mode_name(mode);
    } catch (const HarnessError& e) {
      EXPECT_EQ(e.code(), ErrorCode::kConfigMismatch);
    }
  };
  expect_mismatch(PromptMode::kZs, 2, false);
  expect_mismatch(PromptMode::kFsSim, 0, false);
  expect_mismatch(PromptMode::kFsRand, 2, true);
  expect_mismatch(PromptMode::kZs, 0, true);
}

TEST(BuildPrompt, DeterministicAndLeakFree) {
  Fixture f;
  auto ex = f.examples(7);
  ex.push_back(make_example(f.target()));
  auto a = build_prompt(cfg(PromptMode::kFsSim), f.target(), ex, {});
  EXPECT_EQ(a, build_prompt(cfg(PromptMode::kFsSim), f.target(), ex, {}));
  EXPECT_EQ(a.dropped_example_ids, std::vector<std::string>{f.target().id});
  EXPECT_FALSE(prompt_leaks(a, f.target().proof_text()));
  for (const auto& m : a.messages) {
    EXPECT_EQ(m.content.find(f.target().proof_text()), std::string::npos);
  }
}

TEST(BuildPrompt, ContextLimitDropsLastExamples) {
  Fixture f;
  auto full = build_prompt(cfg(PromptMode::kFsSim), f.target(), f.examples(4), {});
  auto limited_cfg = cfg(PromptMode::kFsSim);
  limited_cfg.context_char_limit = full.total_chars() - 1;
  auto p = build_prompt(limited_cfg, f.target(), f.examples(4), {});
  EXPECT_EQ(p.example_count(), 3u);
  EXPECT_EQ(p.dropped_example_ids, std::vector<std::string>{f.c.records[3].id});
  EXPECT_LE(p.total_chars(), limited_cfg.context_char_limit);
  limited_cfg.context_char_limit = 10;
  EXPECT_THROW(build_prompt(limited_cfg, f.target(), f.examples(4), {}), HarnessError);
}

TEST(BuildPrompt, ModeNames) {
  for (auto m : {PromptMode::kZs, PromptMode::kFsRand, PromptMode::kFsSim, PromptMode::kZsLem,
                 PromptMode::kFsLem}) {
    EXPECT_EQ(parse_prompt_mode(prompt_mode_name(m)), m);
  }
  EXPECT_EQ(prompt_mode_name(PromptMode::kFsLem), "fs+lem");
  EXPECT_FALSE(parse_prompt_mode("fewshot"));
}

TEST(Diversify, Basics) {
  Fixture f;
  auto base = build_prompt(cfg(PromptMode::kFsRand), f.target(), f.examples(6), {});
  const auto copy = base;
  EXPECT_TRUE(diversify(base, {}).empty());
  auto vs = diversify(base, {parse_strategy("simple-tactics-first"), parse_strategy("no-lemma-use"),
                             parse_strategy("verbose-stepwise")});
  ASSERT_EQ(vs.size(), 3u);
  EXPECT_EQ(base, copy);
  EXPECT_EQ(vs[0].variant_id, "simple-tactics-first");
  const auto& sys = vs[0].messages.front().content;
  EXPECT_NE(sys.find("auto"), std::string::npos);
  EXPECT_NE(sys.find("reflexivity"), std::string::npos);
  for (const auto& v : vs) {
    EXPECT_NE(v.messages.front(), base.messages.front());
    EXPECT_TRUE(std::equal(v.messages.begin() + 1, v.messages.end(), base.messages.begin() + 1));
  }
}

TEST(Diversify, ExampleReorderPermutes) {
  Fixture f;
  auto base = build_prompt(cfg(PromptMode::kFsRand), f.target(), f.examples(6), {});
  auto vs = diversify(base, {parse_strategy("example-reorder:1"), parse_strategy("example-reorder(2)")});
  ASSERT_EQ(vs.size(), 2u);
  auto sorted = [](std::vector<std::string> v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  EXPECT_EQ(sorted(vs[0].example_ids), sorted(vs[1].example_ids));
  EXPECT_EQ(sorted(vs[0].example_ids), sorted(base.example_ids));
  EXPECT_NE(vs[0].example_ids, vs[1].example_ids);
  EXPECT_EQ(vs[0].messages.front(), base.messages.front());
  EXPECT_EQ(vs[0].messages.back(), base.messages.back());
  // Each user turn still sits in front of its own proof.
  for (std::size_t i = 0; i < 6; ++i) {
    const auto& rec = f.c.at(vs[0].example_ids[i]);
    EXPECT_EQ(vs[0].messages[2 + 2 * i].content, rec.proof_text());
  }
}

TEST(Diversify, UnknownStrategy) {
  try {
    parse_strategy("be-clever");
    FAIL();
  } catch (const HarnessError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownStrategy);
  }
  EXPECT_EQ(parse_strategy("example-reorder:7").id(), "example-reorder:7");
}

TEST(ParseCompletion, WeakReflProof) {
  auto p = parse_completion("Proof. intros x. constructor. reflexivity. Qed.");
  EXPECT_EQ(p.kind, CompletionKind::kProof);
  EXPECT_EQ(p.step_count(), 4u);
  EXPECT_EQ(*p.proof_script, "Proof. intros x. constructor. reflexivity. Qed.");
}

TEST(ParseCompletion, RefusalAndEmpty) {
  auto r = parse_completion(
      "(* Without further information on what TX and G are, I cannot generate a valid proof. "
      "Please provide more information or define the related functions and types. *)");
  EXPECT_EQ(r.kind, CompletionKind::kRefusal);
  ASSERT_TRUE(r.refusal_text);
  EXPECT_FALSE(r.proof_script);
  EXPECT_EQ(parse_completion("").kind, CompletionKind::kEmpty);
  EXPECT_EQ(parse_completion("   \n").kind, CompletionKind::kEmpty);
  EXPECT_EQ(parse_completion("I am sorry, please define TX first.").kind, CompletionKind::kRefusal);
}

TEST(ParseCompletion, Repairs) {
  auto fenced = parse_completion("Sure:\n```coq\nProof.\n  auto.\nQed.\n```\nHope it helps.");
  EXPECT_EQ(fenced.kind, CompletionKind::kProof);
  EXPECT_EQ(*fenced.proof_script, "Proof.\n  auto.\nQed.");

  auto no_qed = parse_completion("Proof. auto.");
  EXPECT_EQ(no_qed.kind, CompletionKind::kProof);
  EXPECT_TRUE(no_qed.appended_qed);
  EXPECT_EQ(no_qed.sentences.back().text, "Qed.");

  auto restated = parse_completion("Lemma t: True.\nProof. exact I. Qed.", "Lemma t:  True.");
  EXPECT_EQ(restated.kind, CompletionKind::kProof);
  EXPECT_TRUE(restated.dropped_restated_theorem);
  EXPECT_EQ(*restated.proof_script, "Proof. exact I. Qed.");

  auto wrong = parse_completion("Lemma t: False.\nProof. exact I. Qed.", "Lemma t: True.");
  EXPECT_EQ(wrong.kind, CompletionKind::kMalformed);

  auto trailing = parse_completion("Proof. auto. Qed. This works because.");
  EXPECT_TRUE(trailing.dropped_trailing_text);
  EXPECT_EQ(*trailing.proof_script, "Proof. auto. Qed.");
}

TEST(ParseCompletion, Malformed) {
  EXPECT_EQ(parse_completion("Proof. (* open").kind, CompletionKind::kMalformed);
  EXPECT_EQ(parse_completion("(* just a note *)").kind, CompletionKind::kMalformed);
  auto m = parse_completion("Proof. intros x");
  EXPECT_EQ(m.kind, CompletionKind::kMalformed);
  EXPECT_FALSE(m.detail.empty());
}

TEST(ParseCompletion, WellFormedScriptsPassThrough) {
  auto c = coqharness::testing::toy_corpus();
  for (const auto& r : c.records) {
    auto p = parse_completion(r.proof_text(), r.statement.text);
    ASSERT_EQ(p.kind, CompletionKind::kProof) << r.id;
    EXPECT_EQ(*p.proof_script, r.proof_text());
    EXPECT_FALSE(p.appended_qed);
  }
}

TEST(Templates, DefaultsAndErrors) {
  const auto& t = TemplateSet::defaults();
  for (const auto& s : TemplateSet::required_sections()) EXPECT_TRUE(t.has(s)) << s;
  EXPECT_FALSE(t.version().empty());
  EXPECT_EQ(t.render("query", {{"statement", "Lemma x: True."}}), "Lemma x: True.");
  EXPECT_THROW(t.render("query", {}), HarnessError);
  auto expect_template_error = [](std::string_view text) {
    try {
      TemplateSet::parse(text);
      ADD_FAILURE() << text;
    } catch (const HarnessError& e) {
      EXPECT_EQ(e.code(), ErrorCode::kTemplateError);
    }
  };
  expect_template_error("[system]\nhello {nope}\n");
  expect_template_error("[system]\nhello {statement\n");
  expect_template_error("[system]\nonly a system section\n");
}

TEST(Templates, CustomTextIsUsed) {
  std::string text;
  for (const auto& s : TemplateSet::required_sections()) {
    text += "[" + s + "]\n" + TemplateSet::defaults().raw(s) + "\n";
  }
  auto pos = text.find("[system]\n");
  text.insert(pos + 9, "CUSTOM MARKER. ");
  auto custom = TemplateSet::parse(text);
  EXPECT_NE(custom.version(), TemplateSet::defaults().version());
  Fixture f;
  auto p = build_prompt(cfg(PromptMode::kZs), f.target(), {}, {}, custom);
  EXPECT_EQ(p.messages.front().content.rfind("CUSTOM MARKER.", 0), 0u);
}

}  // namespace

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

#include "coqharness/agent/agent.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <map>
#include <regex>
#include <thread>

#include "coqharness/common/error.hpp"
#include "coqharness/common/random.hpp"
#include "coqharness/common/text.hpp"
#include "coqharness/coq/proof_state.hpp"
#include "coqharness/prompting/completion.hpp"

namespace coqharness::agent {

using prompting::ChatMessage;
using prompting::ChatPrompt;
using prompting::Role;
using Clock = std::chrono::steady_clock;

namespace {

const prompting::TemplateSet& templates_of(const AgentDeps& deps) {
  return deps.templates ? *deps.templates : prompting::TemplateSet::defaults();
}

const eval::FailureClassifier& classifier_of(const AgentDeps& deps) {
  return deps.classifier ? *deps.classifier : eval::FailureClassifier::defaults();
}

std::chrono::milliseconds since(Clock::time_point t0) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0);
}

AttemptRecord blank_record(const corpus::TheoremRecord& target, const ChatPrompt& prompt,
                           std::size_t candidate_index) {
  AttemptRecord r;
  r.theorem_id = target.id;
  r.config_tag = prompt.config_tag;
  r.variant_id = prompt.variant_id;
  r.candidate_index = candidate_index;
  r.dropped_example_ids = prompt.dropped_example_ids;
  return r;
}

std::string describe_failure(const AttemptRecord& r) {
  if (r.failing_step) {
    return "Failing step " + std::to_string(r.failing_step->index + 1) + ": " +
           r.failing_step->sentence + "\nError: " + r.failing_step->error_message;
  }
  return r.error_message.empty() ? std::string("The reply did not contain a proof script.")
                                 : r.error_message;
}

// Parses completions and checks proof candidates against one lazily started
// session, reusing the verdict for scripts already checked.
class CandidateChecker {
 public:
  CandidateChecker(const corpus::TheoremRecord& target, const AgentDeps& deps)
      : target_(target), deps_(deps) {}

  void evaluate(AttemptRecord& r, const std::string& completion) {
    auto parsed = prompting::parse_completion(completion, target_.statement.text);
    r.completion_kind = std::string(prompting::completion_kind_name(parsed.kind));
    r.appended_qed = parsed.appended_qed;
    if (parsed.kind == prompting::CompletionKind::kMalformed) r.error_message = parsed.detail;
    if (parsed.kind == prompting::CompletionKind::kProof) {
      r.proof_script = *parsed.proof_script;
      check(r);
    }
    classifier_of(deps_).finalize(r, target_);
  }

 private:
  struct Verdict {
    std::size_t candidate_index;
    bool accepted;
    std::optional<FailingStepInfo> failing_step;
    std::string error_message;
    bool prover_rejected;
  };

  void check(AttemptRecord& r) {
    if (auto it = verdicts_.find(r.proof_script); it != verdicts_.end()) {
      const Verdict& v = it->second;
      r.checked = true;
      r.duplicate_of = v.candidate_index;
      r.accepted = v.accepted;
      r.failing_step = v.failing_step;
      r.error_message = v.error_message;
      r.prover_rejected = v.prover_rejected;
      return;
    }
    if (prelude_error_) {
      r.error_message = *prelude_error_;
      return;
    }
    auto t0 = Clock::now();
    try {
      if (!session_) session_ = deps_.sessions(target_);
      auto res = coq::check_proof(*session_, target_.statement.text, r.proof_script);
      r.checked = true;
      r.accepted = res.accepted;
      r.prover_rejected = !res.accepted;
      if (res.failing_step) {
        r.failing_step = FailingStepInfo{res.failing_step->index, res.failing_step->sentence.text,
                                         res.message};
      } else if (!res.accepted) {
        r.error_message =
            res.statement_rejected ? "Statement rejected: " + res.message : res.message;
      }
    } catch (const PreludeError& e) {
      prelude_error_ = std::string("Prelude rejected: ") + e.what();
      r.error_message = *prelude_error_;
      return;
    } catch (const HarnessError& e) {
      if (e.code() != ErrorCode::kSessionDead && e.code() != ErrorCode::kTimeout) throw;
      session_.reset();
      r.error_message = e.what();
    }
    r.timings.check = since(t0);
    verdicts_.emplace(r.proof_script, Verdict{r.candidate_index, r.accepted, r.failing_step,
                                              r.error_message, r.prover_rejected});
  }

  const corpus::TheoremRecord& target_;
  const AgentDeps& deps_;
  std::unique_ptr<coq::ProverSession> session_;
  std::optional<std::string> prelude_error_;
  std::map<std::string, Verdict> verdicts_;
};

std::vector<AttemptRecord> sample_and_check(const corpus::TheoremRecord& target,
                                            const RunConfig& config, const AgentDeps& deps,
                                            const ChatPrompt& prompt, int samples,
                                            std::size_t first_index, CandidateChecker& checker) {
  model::DecodingParams params = config.decoding;
  params.n = samples;
  std::vector<AttemptRecord> records;
  auto t0 = Clock::now();
  model::CompletionResult res;
  try {
    res = deps.provider->complete(prompt, params);
  } catch (const ProviderError& e) {
    for (int i = 0; i < samples; ++i) {
      auto r = blank_record(target, prompt, first_index + static_cast<std::size_t>(i));
      r.completion_kind = "provider_error";
      r.error_message = e.what();
      r.turns.push_back(Turn{prompt.messages, "", {}});
      classifier_of(deps).finalize(r, target);
      records.push_back(std::move(r));
    }
    return records;
  }
  const auto model_time = since(t0);
  for (std::size_t i = 0; i < res.completions.size(); ++i) {
    auto r = blank_record(target, prompt, first_index + i);
    r.turns.push_back(Turn{prompt.messages, res.completions[i], {}});
    r.timings.model = model_time;
    checker.evaluate(r, res.completions[i]);
    records.push_back(std::move(r));
  }
  return records;
}

// First line of the form "QUERY <command> <argument>".
std::optional<std::pair<std::string, std::string>> find_query_line(const std::string& reply) {
  static const std::regex kQuery(R"(^\s*QUERY\s+(\S+)\s+(.*\S)\s*$)");
  for (const auto& line : text::split_lines(prompting::strip_code_fences(reply))) {
    std::smatch m;
    if (std::regex_match(line, m, kQuery)) return std::make_pair(m[1].str(), m[2].str());
  }
  return std::nullopt;
}

}  // namespace

SessionFactory make_session_factory(coq::SessionConfig base) {
  base.validate();
  return [base](const corpus::TheoremRecord& target) {
    coq::SessionConfig cfg = base;
    cfg.prelude = coq::segment_sentences(target.preceding_source);
    return coq::start_session(cfg);
  };
}

ChatPrompt make_prompt(const corpus::TheoremRecord& target, const RunConfig& config,
                       const AgentDeps& deps, bool interactive) {
  config.validate();
  if (!deps.corpus) throw HarnessError(ErrorCode::kConfigMismatch, "agent needs a corpus");
  const auto& corpus = *deps.corpus;
  const std::size_t n_lemmas = static_cast<std::size_t>(config.n_lemmas);
  const bool lemmas_on = prompting::uses_lemmas(config.mode);

  std::vector<prompting::LemmaRef> lemmas;
  if (lemmas_on) {
    for (const auto* l : corpus::preceding_lemmas(corpus, target.id, n_lemmas)) {
      lemmas.push_back(prompting::make_lemma(*l));
    }
  }

  std::vector<prompting::PromptExample> examples;
  if (prompting::is_few_shot(config.mode)) {
    const std::size_t k = static_cast<std::size_t>(config.k_shots);
    std::vector<const corpus::TheoremRecord*> chosen;
    if (config.example_selection() == ExampleSelection::kRandom) {
      std::vector<const corpus::TheoremRecord*> pool;
      for (const auto* r : corpus.with_label(corpus::SplitLabel::kTrain)) {
        if (r->id != target.id) pool.push_back(r);
      }
      DeterministicRng rng(derive_seed(config.seed, "examples|" + target.id));
      rng.shuffle(pool);
      pool.resize(std::min(pool.size(), k));
      chosen = std::move(pool);
    } else {
      if (!deps.index) {
        throw HarnessError(ErrorCode::kConfigMismatch,
                           "similarity example selection needs a retrieval index");
      }
      if (config.use_embedding && !deps.embedded) {
        throw HarnessError(ErrorCode::kConfigMismatch, "use_embedding is set but no embedding is loaded");
      }
      auto hits = retriever::retrieve(*deps.index, target, k,
                                      config.use_embedding ? deps.embedded : nullptr);
      for (const auto& h : hits) {
        const auto* r = corpus.find(h.id);
        if (r && corpus.label(r->id) == corpus::SplitLabel::kTrain) chosen.push_back(r);
      }
    }
    for (const auto* r : chosen) {
      std::vector<const corpus::TheoremRecord*> ex_lemmas;
      if (lemmas_on) ex_lemmas = corpus::preceding_lemmas(corpus, r->id, n_lemmas);
      examples.push_back(prompting::make_example(*r, ex_lemmas));
    }
  }
  return prompting::build_prompt(config.prompt_config(interactive), target, examples, lemmas,
                                 templates_of(deps));
}

std::vector<AttemptRecord> prove_one_shot(const corpus::TheoremRecord& target,
                                          const RunConfig& config, const AgentDeps& deps,
                                          const ChatPrompt& prompt, int samples,
                                          std::size_t first_candidate_index) {
  CandidateChecker checker(target, deps);
  return sample_and_check(target, config, deps, prompt, samples, first_candidate_index, checker);
}

std::vector<AttemptRecord> prove_one_shot(const corpus::TheoremRecord& target,
                                          const RunConfig& config, const AgentDeps& deps) {
  auto prompt = make_prompt(target, config, deps);
  return prove_one_shot(target, config, deps, prompt, config.decoding.n);
}

AttemptRecord prove_interactive(const corpus::TheoremRecord& target, const RunConfig& config,
                                const AgentDeps& deps) {
  const auto& templates = templates_of(deps);
  ChatPrompt prompt = make_prompt(target, config, deps, true);
  AttemptRecord rec = blank_record(target, prompt, 0);
  auto finish = [&]() -> AttemptRecord {
    classifier_of(deps).finalize(rec, target);
    return rec;
  };

  std::unique_ptr<coq::ProverSession> session;
  try {
    session = deps.sessions(target);
  } catch (const PreludeError& e) {
    rec.error_message = std::string("Prelude rejected: ") + e.what();
    return finish();
  }
  const coq::Checkpoint before = session->mark();
  auto opened = session->execute(coq::make_sentence(target.statement.text));
  if (!opened.ok()) {
    rec.error_message = "Statement rejected: " + opened.message;
    rec.prover_rejected = true;
    return finish();
  }

  std::optional<coq::ProofState> state = session->current_state();
  auto state_text = [&] {
    return state ? coq::render_proof_state(*state) : std::string("No more goals.");
  };
  prompt.messages.back().content +=
      "\n\n" + templates.render("interactive_state", {{"state", state_text()}});

  model::DecodingParams params = config.decoding;
  params.n = 1;
  const auto started = Clock::now();
  std::vector<ChatMessage> pending = prompt.messages;
  std::vector<std::string> script;
  int turns = 0, queries = 0, stalls = 0;
  bool completed = false;
  auto exhausted = [&](const std::string& what) {
    rec.error_message = "budget exhausted: " + what;
    rec.failing_step.reset();
    rec.prover_rejected = false;
  };

  for (;;) {
    if (turns >= config.budgets.max_turns) {
      exhausted("max_turns (" + std::to_string(config.budgets.max_turns) + ")");
      break;
    }
    if (config.budgets.wall_clock.count() > 0 && Clock::now() - started >= config.budgets.wall_clock) {
      exhausted("wall_clock");
      break;
    }
    std::string reply;
    auto t0 = Clock::now();
    try {
      auto res = deps.provider->complete(prompt, params);
      reply = res.completions.empty() ? std::string() : res.completions.front();
    } catch (const ProviderError& e) {
      rec.completion_kind = "provider_error";
      rec.error_message = e.what();
      rec.failing_step.reset();
      rec.prover_rejected = false;
      break;
    }
    rec.timings.model += since(t0);
    ++turns;
    Turn turn{std::move(pending), reply, {}};
    pending.clear();
    prompt.messages.push_back(ChatMessage{Role::kAssistant, reply.empty() ? "(empty reply)" : reply});

    std::string feedback;
    bool stop = false;
    if (auto q = find_query_line(reply)) {
      stalls = 0;
      if (queries >= config.budgets.max_queries) {
        exhausted("max_queries (" + std::to_string(config.budgets.max_queries) + ")");
        rec.turns.push_back(std::move(turn));
        break;
      }
      ++queries;
      ToolCall call{q->first, q->second, "", false};
      if (auto cmd = coq::parse_query_command(q->first)) {
        try {
          call.response = session->query(*cmd, q->second);
        } catch (const HarnessError& e) {
          if (e.code() != ErrorCode::kQueryRejected) throw;
          call.rejected = true;
          call.response = e.what();
        }
      } else {
        call.rejected = true;
        call.response = "Unknown query command " + q->first +
                        "; use one of Print, Check, Search, About, Locate.";
      }
      feedback = call.response.empty() ? std::string("(no output)") : call.response;
      turn.tool_calls.push_back(std::move(call));
    } else {
      auto parsed = prompting::parse_completion(reply, target.statement.text);
      std::vector<coq::Sentence> sentences;
      std::string lexical_error;
      if (parsed.kind == prompting::CompletionKind::kRefusal) {
        rec.completion_kind = "refusal";
        rec.error_message.clear();
        rec.failing_step.reset();
        rec.prover_rejected = false;
        stop = true;
      } else {
        try {
          sentences = coq::segment_sentences(prompting::strip_code_fences(reply));
        } catch (const LexicalError& e) {
          lexical_error = e.what();
        }
        if (!sentences.empty() && coq::is_theorem_statement(sentences.front().text)) {
          sentences.erase(sentences.begin());
        }
      }
      if (stop) {
        // refusal ends the dialogue
      } else if (!lexical_error.empty()) {
        stalls = 0;
        rec.error_message = lexical_error;
        feedback = templates.render("interactive_error",
                                    {{"error", lexical_error}, {"state", state_text()}});
      } else if (sentences.empty()) {
        if (++stalls >= kMaxStalledTurns) {
          rec.completion_kind = "empty";
          rec.error_message = "model stalled: no tactic or query in " +
                              std::to_string(kMaxStalledTurns) + " consecutive turns";
          rec.failing_step.reset();
          rec.prover_rejected = false;
          stop = true;
        } else {
          feedback = templates.render("interactive_state", {{"state", state_text()}});
        }
      } else {
        stalls = 0;
        rec.completion_kind = "proof";
        std::optional<std::string> error;
        const std::size_t run = std::min(sentences.size(), kMaxTacticsPerTurn);
        for (std::size_t i = 0; i < run && !completed; ++i) {
          auto t1 = Clock::now();
          auto step = session->execute(sentences[i]);
          rec.timings.check += since(t1);
          if (!step.ok()) {
            rec.failing_step = FailingStepInfo{script.size(), sentences[i].text, step.message};
            rec.error_message.clear();
            rec.prover_rejected = true;
            error = sentences[i].text + "\n" + step.message;
            break;
          }
          script.push_back(sentences[i].text);
          rec.failing_step.reset();
          rec.error_message.clear();
          rec.prover_rejected = false;
          completed = step.proof_complete;
        }
        state = session->current_state();
        if (!error && !completed && !state) {
          auto qed = session->execute(coq::make_sentence("Qed."));
          if (qed.ok() && qed.proof_complete) {
            script.push_back("Qed.");
            completed = true;
          }
          state = session->current_state();
        }
        if (completed) {
          stop = true;
        } else if (error) {
          feedback = templates.render("interactive_error", {{"error", *error}, {"state", state_text()}});
        } else {
          feedback = templates.render("interactive_state", {{"state", state_text()}});
          if (sentences.size() > run) {
            feedback += "\n\nOnly the first " + std::to_string(kMaxTacticsPerTurn) +
                        " sentences of your reply were run.";
          }
        }
      }
    }
    rec.turns.push_back(std::move(turn));
    if (stop) break;
    ChatMessage fb{Role::kUser, feedback};
    prompt.messages.push_back(fb);
    pending.push_back(std::move(fb));
  }

  rec.proof_script = text::join(script, "\n");
  if (completed) {
    // The stepwise run closed the proof; confirm it as one script.
    session->rewind(before);
    auto t1 = Clock::now();
    auto res = coq::check_proof(*session, target.statement.text, rec.proof_script);
    rec.timings.check += since(t1);
    rec.checked = true;
    rec.accepted = res.accepted;
    rec.prover_rejected = !res.accepted;
    rec.error_message.clear();
    rec.failing_step.reset();
    if (res.failing_step) {
      rec.failing_step =
          FailingStepInfo{res.failing_step->index, res.failing_step->sentence.text, res.message};
    } else if (!res.accepted) {
      rec.error_message = res.message;
    }
  }
  return finish();
}

std::vector<AttemptRecord> repair_loop(const corpus::TheoremRecord& target,
                                       const RunConfig& config, const AgentDeps& deps) {
  const auto& templates = templates_of(deps);
  ChatPrompt base = make_prompt(target, config, deps);
  CandidateChecker checker(target, deps);
  auto records = sample_and_check(target, config, deps, base, config.decoding.n, 0, checker);
  auto any_accepted = [&] {
    return std::any_of(records.begin(), records.end(), [](const AttemptRecord& r) { return r.accepted; });
  };
  if (any_accepted()) return records;

  struct Lineage {
    std::vector<ChatMessage> messages;
  };
  std::vector<Lineage> lineages;
  for (const auto& r : records) {
    if (r.completion_kind != "proof" || !r.checked || r.duplicate_of) continue;
    Lineage l{base.messages};
    l.messages.push_back(ChatMessage{Role::kAssistant, r.proof_script});
    l.messages.push_back(
        ChatMessage{Role::kUser, templates.render("repair", {{"error", describe_failure(r)}})});
    lineages.push_back(std::move(l));
  }

  model::DecodingParams params = config.decoding;
  params.n = 1;
  std::size_t next_index = records.size();
  for (int round = 1; round <= config.repair_rounds && !lineages.empty(); ++round) {
    for (auto& lineage : lineages) {
      ChatPrompt p = base;
      p.messages = lineage.messages;
      std::vector<ChatMessage> delta(lineage.messages.end() - 2, lineage.messages.end());
      AttemptRecord r = blank_record(target, p, next_index++);
      r.round = round;
      std::string reply;
      try {
        auto t0 = Clock::now();
        auto res = deps.provider->complete(p, params);
        r.timings.model = since(t0);
        reply = res.completions.empty() ? std::string() : res.completions.front();
        r.turns.push_back(Turn{delta, reply, {}});
        checker.evaluate(r, reply);
      } catch (const ProviderError& e) {
        r.completion_kind = "provider_error";
        r.error_message = e.what();
        r.turns.push_back(Turn{delta, "", {}});
        classifier_of(deps).finalize(r, target);
      }
      const bool accepted = r.accepted;
      const std::string assistant =
          !r.proof_script.empty() ? r.proof_script : (reply.empty() ? "(empty reply)" : reply);
      lineage.messages.push_back(ChatMessage{Role::kAssistant, assistant});
      lineage.messages.push_back(
          ChatMessage{Role::kUser, templates.render("repair", {{"error", describe_failure(r)}})});
      records.push_back(std::move(r));
      if (accepted) return records;
    }
  }
  return records;
}

std::vector<int> ensemble_shares(int n, std::size_t strategies) {
  const int members = static_cast<int>(strategies) + 1;
  std::vector<int> shares(static_cast<std::size_t>(members), n / members);
  shares[0] += n % members;
  return shares;
}

std::vector<AttemptRecord> run_ensemble(const corpus::TheoremRecord& target,
                                        const RunConfig& config, const AgentDeps& deps) {
  if (config.strategies.empty()) {
    throw HarnessError(ErrorCode::kConfigMismatch, "ensemble needs at least one strategy");
  }
  ChatPrompt base = make_prompt(target, config, deps);
  std::vector<ChatPrompt> members{base};
  for (auto& v : prompting::diversify(base, config.strategies, templates_of(deps))) {
    members.push_back(std::move(v));
  }
  const auto shares = ensemble_shares(config.decoding.n, config.strategies.size());
  CandidateChecker checker(target, deps);
  std::vector<AttemptRecord> records;
  for (std::size_t m = 0; m < members.size(); ++m) {
    if (shares[m] == 0) continue;
    auto part = sample_and_check(target, config, deps, members[m], shares[m], records.size(), checker);
    for (auto& r : part) records.push_back(std::move(r));
  }
  return records;
}

std::vector<AttemptRecord> prove_theorem(const corpus::TheoremRecord& target,
                                         const RunConfig& config, const AgentDeps& deps) {
  config.validate();
  if (!deps.provider) throw HarnessError(ErrorCode::kConfigMismatch, "agent needs a provider");
  if (!deps.sessions) throw HarnessError(ErrorCode::kConfigMismatch, "agent needs a session factory");
  switch (config.loop) {
    case AgentLoop::kOneShot: return prove_one_shot(target, config, deps);
    case AgentLoop::kInteractive: return {prove_interactive(target, config, deps)};
    case AgentLoop::kRepair: return repair_loop(target, config, deps);
    case AgentLoop::kEnsemble: return run_ensemble(target, config, deps);
  }
  return {};
}

std::vector<AttemptRecord> prove_all(const std::vector<const corpus::TheoremRecord*>& targets,
                                     const RunConfig& config, const AgentDeps& deps,
                                     std::size_t workers) {
  const std::size_t n = targets.size();
  std::vector<std::vector<AttemptRecord>> results(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      try {
        results[i] = prove_theorem(*targets[i], config, deps);
      } catch (...) {
        errors[i] = std::current_exception();
        failed.store(true);
      }
    }
  };
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<AttemptRecord> out;
  for (auto& part : results) {
    for (auto& r : part) out.push_back(std::move(r));
  }
  return out;
}

}  // namespace coqharness::agent

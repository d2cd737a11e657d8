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

#include "coqharness/coq/mock_prover.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "coqharness/common/error.hpp"
#include "coqharness/common/text.hpp"

namespace coqharness::coq {

namespace {

using nlohmann::json;

const std::set<std::string>& builtin_libraries() {
  static const std::set<std::string> kLibs = {
      "Arith", "Lia", "Omega", "List", "Lists", "Bool", "Relations",
      "Relation_Definitions", "Relation_Operators", "Setoid", "Morphisms",
      "Program", "Classes", "Equivalence", "RelationClasses", "Utf8", "ZArith",
      "PeanoNat", "Nat", "Logic", "Classical", "FunctionalExtensionality",
      "Psatz", "String", "Ascii", "Decidable", "Wf", "Sorting", "Permutation",
      "Ensembles", "Init", "Datatypes", "Peano", "Compare_dec", "EqNat", "NArith",
      "QArith", "Reals", "Sets", "Structures", "Vectors", "Streams", "Eqdep",
      "JMeq", "ProofIrrelevance", "Classical_Prop", "Basics", "Tactics",
      "Coq", "Stdlib", "ssreflect", "ssrbool", "ssrfun"};
  return kLibs;
}

const std::set<std::string>& builtin_identifiers() {
  static const std::set<std::string> kIds = {
      "I", "O", "S", "eq_refl", "conj", "or_introl", "or_intror", "ex_intro",
      "True", "False", "nat", "bool", "true", "false", "tt", "unit", "eq",
      "and", "or", "not", "iff", "le", "lt", "ge", "gt", "plus", "mult",
      "sym_equal", "sym_eq", "trans_equal", "eq_sym", "eq_trans", "f_equal",
      "proj1", "proj2", "le_n", "le_S", "list", "nil", "cons", "app", "length",
      "map", "plus_n_O", "plus_n_Sm", "Prop", "Set", "Type", "option", "Some",
      "None", "prod", "pair", "fst", "snd", "sum", "inl", "inr", "ex", "sig",
      "exist", "refl_equal", "relations", "core", "arith"};
  return kIds;
}

const std::set<std::string>& builtin_modules() {
  static const std::set<std::string> kMods = {"Nat", "List", "Bool", "N", "Z",
                                              "Peano", "Coq", "PeanoNat"};
  return kMods;
}

// Tactics whose arguments name terms that must exist.
const std::set<std::string>& reference_tactics() {
  static const std::set<std::string> kTactics = {
      "apply", "eapply", "exact", "eexact", "rewrite", "erewrite", "unfold",
      "destruct", "induction", "inversion", "specialize", "generalize", "elim",
      "case", "pose", "exploit", "apply*", "rapply", "inversion_clear",
      "clear", "revert", "subst", "fold", "simpl_rewrite"};
  return kTactics;
}

const std::set<std::string>& argument_keywords() {
  static const std::set<std::string> kWords = {
      "in", "at", "as", "with", "using", "proof", "fun", "forall", "exists",
      "let", "match", "end", "return", "if", "then", "else", "by", "eqn",
      "Type", "Prop", "Set", "_"};
  return kWords;
}

std::string norm_sentence(std::string_view s) {
  return text::normalize_whitespace(text::strip_comments(s));
}

int delimiter_delta(char c) {
  if (c == '(' || c == '[' || c == '{') return 1;
  if (c == ')' || c == ']' || c == '}') return -1;
  return 0;
}

bool balanced(std::string_view s) {
  std::vector<char> stack;
  for (char c : s) {
    if (c == '(' || c == '[' || c == '{') stack.push_back(c);
    if (c == ')' || c == ']' || c == '}') {
      if (stack.empty()) return false;
      char open = stack.back();
      stack.pop_back();
      if ((c == ')' && open != '(') || (c == ']' && open != '[') ||
          (c == '}' && open != '{')) {
        return false;
      }
    }
  }
  return stack.empty();
}

std::vector<std::string> split_top_level(std::string_view s, char sep) {
  std::vector<std::string> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    depth += delimiter_delta(s[i]);
    if (depth == 0 && s[i] == sep) {
      out.emplace_back(text::trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  out.emplace_back(text::trim(s.substr(start)));
  return out;
}

std::optional<std::size_t> find_top_level(std::string_view s, std::string_view token,
                                          std::size_t from = 0) {
  int depth = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i >= from && depth == 0 && s.substr(i, token.size()) == token) return i;
    depth += delimiter_delta(s[i]);
  }
  return std::nullopt;
}

std::optional<std::size_t> find_top_level_arrow(std::string_view s) {
  int depth = 0;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    depth += delimiter_delta(s[i]);
    if (depth == 0 && s[i] == '-' && s[i + 1] == '>' && (i == 0 || s[i - 1] != '<')) {
      return i;
    }
  }
  return std::nullopt;
}

std::vector<std::string> identifiers_in(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    auto c = static_cast<unsigned char>(s[i]);
    if (text::is_ident_start(c)) {
      std::size_t b = i;
      while (i < s.size() &&
             (text::is_ident_char(static_cast<unsigned char>(s[i])) ||
              (s[i] == '.' && i + 1 < s.size() &&
               text::is_ident_start(static_cast<unsigned char>(s[i + 1]))))) {
        ++i;
      }
      out.emplace_back(s.substr(b, i - b));
    } else if (s[i] == '?' ) {
      // existential / intro-pattern variable: skip the name
      ++i;
      while (i < s.size() && text::is_ident_char(static_cast<unsigned char>(s[i]))) ++i;
    } else if (std::isdigit(c)) {
      while (i < s.size() && text::is_ident_char(static_cast<unsigned char>(s[i]))) ++i;
    } else {
      ++i;
    }
  }
  return out;
}

bool is_plain_ident(std::string_view s) {
  if (s.empty() || !text::is_ident_start(static_cast<unsigned char>(s[0]))) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return text::is_ident_char(static_cast<unsigned char>(c));
  });
}

std::string replace_word(const std::string& s, const std::string& from,
                         const std::string& to) {
  if (from == to) return s;
  std::string out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (s.compare(i, from.size(), from) == 0 &&
        (i == 0 || !text::is_ident_char(static_cast<unsigned char>(s[i - 1]))) &&
        (i + from.size() == s.size() ||
         !text::is_ident_char(static_cast<unsigned char>(s[i + from.size()])))) {
      out += to;
      i += from.size();
    } else {
      out += s[i++];
    }
  }
  return out;
}

struct Binder {
  std::string name;
  std::optional<std::string> type;
};

// Parses "x y (z w : T) {u : U}" binder lists.
std::vector<Binder> parse_binders(std::string_view s) {
  std::vector<Binder> out;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (c == ' ' || c == '\n' || c == '\t' || c == '`' || c == '!') {
      ++i;
      continue;
    }
    if (c == '(' || c == '{' || c == '[') {
      int depth = 0;
      std::size_t b = i;
      for (; i < s.size(); ++i) {
        depth += delimiter_delta(s[i]);
        if (depth == 0) break;
      }
      std::string_view group = s.substr(b + 1, i - b - 1);
      ++i;
      auto colon = find_top_level(group, ":");
      if (!colon) continue;
      std::string type = text::trim_copy(group.substr(*colon + 1));
      for (const auto& n : identifiers_in(group.substr(0, *colon))) {
        out.push_back(Binder{n, type});
      }
      continue;
    }
    std::size_t b = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '(' && s[i] != '{') ++i;
    std::string name(s.substr(b, i - b));
    if (is_plain_ident(name)) out.push_back(Binder{name, std::nullopt});
  }
  return out;
}

std::string render_binders(const std::vector<Binder>& binders) {
  std::vector<std::string> parts;
  for (const auto& b : binders) {
    parts.push_back(b.type ? "(" + b.name + " : " + *b.type + ")" : b.name);
  }
  return text::join(parts, " ");
}

struct Peel {
  std::optional<std::string> binder;
  std::string type;
  std::string rest;
};

std::optional<Peel> peel_one(const std::string& goal) {
  std::string s = text::trim_copy(goal);
  while (s.size() >= 2 && s.front() == '(' && s.back() == ')' &&
         balanced(std::string_view(s).substr(1, s.size() - 2))) {
    s = text::trim_copy(std::string_view(s).substr(1, s.size() - 2));
  }
  if (text::starts_with_word(s, "forall")) {
    std::string_view after = std::string_view(s).substr(6);
    auto comma = find_top_level(after, ",");
    if (!comma) return std::nullopt;
    auto binders = parse_binders(after.substr(0, *comma));
    std::string body = text::trim_copy(after.substr(*comma + 1));
    if (binders.empty()) return std::nullopt;
    Peel p;
    p.binder = binders.front().name;
    p.type = binders.front().type.value_or("_");
    binders.erase(binders.begin());
    p.rest = binders.empty() ? body
                             : "forall " + render_binders(binders) + ", " + body;
    return p;
  }
  if (auto arrow = find_top_level_arrow(s)) {
    Peel p;
    p.type = text::trim_copy(std::string_view(s).substr(0, *arrow));
    p.rest = text::trim_copy(std::string_view(s).substr(*arrow + 2));
    return p;
  }
  if (s.size() > 1 && s[0] == '~') {
    return Peel{std::nullopt, text::trim_copy(std::string_view(s).substr(1)),
                "False"};
  }
  return std::nullopt;
}

std::string fresh_name(const std::string& base, const std::set<std::string>& taken) {
  if (!taken.count(base)) return base;
  for (int k = 0;; ++k) {
    std::string candidate = base + std::to_string(k);
    if (!taken.count(candidate)) return candidate;
  }
}

std::set<std::string> names_of(const std::vector<Hypothesis>& hyps) {
  std::set<std::string> out;
  for (const auto& h : hyps) out.insert(h.names.begin(), h.names.end());
  return out;
}

// Renames leading forall binders that would shadow a hypothesis, as the
// prover's goal display does (R becomes R0).
std::string rename_shadowing_binders(const std::string& goal,
                                     const std::vector<Hypothesis>& hyps) {
  std::string s = text::trim_copy(goal);
  if (!text::starts_with_word(s, "forall")) return s;
  std::string_view after = std::string_view(s).substr(6);
  auto comma = find_top_level(after, ",");
  if (!comma) return s;
  auto binders = parse_binders(after.substr(0, *comma));
  std::string body = text::trim_copy(after.substr(*comma + 1));
  auto taken = names_of(hyps);
  bool changed = false;
  for (auto& b : binders) {
    if (taken.count(b.name)) {
      std::string fresh = fresh_name(b.name, taken);
      body = replace_word(body, b.name, fresh);
      b.name = fresh;
      changed = true;
    }
    taken.insert(b.name);
  }
  if (!changed) return s;
  return "forall " + render_binders(binders) + ", " + body;
}

std::vector<Hypothesis> parse_hypotheses_json(const json& arr) {
  std::vector<Hypothesis> out;
  for (const auto& h : arr) {
    Hypothesis hyp;
    hyp.names = h.at("names").get<std::vector<std::string>>();
    hyp.type_text = h.value("type", std::string());
    if (h.contains("value")) hyp.value = h.at("value").get<std::string>();
    out.push_back(std::move(hyp));
  }
  return out;
}

std::string strip_terminator(std::string_view s) {
  s = text::trim(s);
  if (!s.empty() && s.back() == '.') s.remove_suffix(1);
  return text::trim_copy(s);
}

// Strips attributes and locality prefixes before the command keyword.
std::string_view skip_prefixes(std::string_view body) {
  while (true) {
    body = text::trim(body);
    if (body.substr(0, 2) == "#[") {
      auto close = body.find(']');
      if (close == std::string_view::npos) return body;
      body = body.substr(close + 1);
      continue;
    }
    bool stripped = false;
    for (std::string_view w : {"Local", "Global", "Polymorphic", "Monomorphic",
                               "Program", "Private"}) {
      if (text::starts_with_word(body, w)) {
        body = body.substr(w.size());
        stripped = true;
        break;
      }
    }
    if (!stripped) return body;
  }
}

std::string not_found(const std::string& ident) {
  return "The reference " + ident + " was not found in the current environment.";
}

}  // namespace

MockTable MockTable::from_json(const json& doc) {
  MockTable table;
  try {
    if (!doc.is_object()) {
      throw HarnessError(ErrorCode::kConfigError, "mock table must be an object");
    }
    if (doc.contains("identifiers")) {
      for (const auto& id : doc.at("identifiers")) table.identifiers_.insert(id.get<std::string>());
    }
    if (doc.contains("libraries")) {
      for (const auto& id : doc.at("libraries")) table.libraries_.insert(id.get<std::string>());
    }
    if (doc.contains("queries")) {
      for (const auto& [k, v] : doc.at("queries").items()) {
        table.queries_[text::normalize_whitespace(k)] = v.get<std::string>();
      }
    }
    if (doc.contains("theorems")) {
      for (const auto& [name, t] : doc.at("theorems").items()) {
        MockTheorem th;
        if (t.contains("goal")) th.goal = t.at("goal").get<std::string>();
        if (t.contains("hypotheses")) th.hypotheses = parse_hypotheses_json(t.at("hypotheses"));
        if (t.contains("accepted")) {
          for (const auto& script : t.at("accepted")) {
            std::vector<std::string> steps;
            for (const auto& step : script) steps.push_back(norm_sentence(step.get<std::string>()));
            th.accepted.push_back(std::move(steps));
          }
        }
        if (t.contains("errors")) {
          for (const auto& [k, v] : t.at("errors").items()) {
            th.errors[norm_sentence(k)] = v.get<std::string>();
          }
        }
        if (t.contains("states")) {
          for (const auto& st : t.at("states")) {
            MockScriptedState ss;
            for (const auto& step : st.at("after")) ss.after.push_back(norm_sentence(step.get<std::string>()));
            if (st.contains("hypotheses")) ss.hypotheses = parse_hypotheses_json(st.at("hypotheses"));
            ss.goals = st.value("goals", std::vector<std::string>{});
            th.states.push_back(std::move(ss));
          }
        }
        if (t.contains("default_error")) th.default_error = t.at("default_error").get<std::string>();
        table.theorems_[name] = std::move(th);
      }
    }
  } catch (const json::exception& e) {
    throw HarnessError(ErrorCode::kConfigError, std::string("mock table: ") + e.what());
  }
  return table;
}

MockTable MockTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw HarnessError(ErrorCode::kConfigError,
                       "cannot open mock table " + path.string());
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw HarnessError(ErrorCode::kConfigError,
                       "mock table " + path.string() + ": " + e.what());
  }
  return from_json(doc);
}

const MockTheorem* MockTable::find_theorem(const std::string& name) const {
  auto it = theorems_.find(name);
  return it == theorems_.end() ? nullptr : &it->second;
}

std::optional<std::string> MockTable::find_query(const std::string& key) const {
  auto it = queries_.find(text::normalize_whitespace(key));
  if (it == queries_.end()) return std::nullopt;
  return it->second;
}

std::size_t count_introducible(const std::string& goal) {
  std::size_t n = 0;
  std::string g = goal;
  while (auto p = peel_one(g)) {
    ++n;
    g = p->rest;
  }
  return n;
}

MockProverSession::MockProverSession(std::shared_ptr<const MockTable> table)
    : table_(table ? std::move(table) : std::make_shared<MockTable>()) {}

void MockProverSession::run_prelude(const std::vector<Sentence>& prelude) {
  trusted_ = true;
  for (std::size_t i = 0; i < prelude.size(); ++i) {
    StepResult r = execute(prelude[i]);
    if (!r.ok()) {
      trusted_ = false;
      throw PreludeError(i, r.message);
    }
  }
  trusted_ = false;
  // A prelude ending inside an unfinished proof would leave the target
  // statement nested; drop it like the prover's Abort.
  current_.proof.reset();
}

Checkpoint MockProverSession::mark() {
  Checkpoint id = next_checkpoint_++;
  checkpoints_[id] = current_;
  return id;
}

void MockProverSession::rewind(Checkpoint checkpoint) {
  auto it = checkpoints_.find(checkpoint);
  if (it == checkpoints_.end()) {
    throw HarnessError(ErrorCode::kSessionDead,
                       "unknown checkpoint " + std::to_string(checkpoint));
  }
  current_ = it->second;
}

std::optional<ProofState> MockProverSession::current_state() {
  if (!current_.proof || current_.proof->goals.empty()) return std::nullopt;
  const auto& p = *current_.proof;
  return ProofState{p.hypotheses, p.goals, GoalIndex{1, p.goals.size()}};
}

StepResult MockProverSession::ok_with_state() const {
  StepResult r;
  if (current_.proof && !current_.proof->goals.empty()) {
    const auto& p = *current_.proof;
    r.state = ProofState{p.hypotheses, p.goals, GoalIndex{1, p.goals.size()}};
    r.message = render_proof_state(*r.state);
  } else if (current_.proof) {
    r.message = "No more goals.";
  }
  return r;
}

namespace {

StepResult error_result(std::string message) {
  StepResult r;
  r.outcome = StepOutcome::kError;
  r.message = std::move(message);
  return r;
}

}  // namespace

StepResult MockProverSession::execute(const Sentence& sentence) {
  std::string body = text::trim_copy(text::strip_comments(sentence.text));
  if (body.empty()) return StepResult{};
  if (!balanced(body)) {
    return error_result("Syntax error: unbalanced parentheses or brackets.");
  }
  if (current_.proof) return execute_in_proof(body);
  return execute_vernacular(body);
}

StepResult MockProverSession::open_proof(const std::string& name,
                                         const std::string& statement,
                                         bool definition_style) {
  if (name.empty()) return error_result("Syntax error: [identifier] expected.");
  if (current_.globals.count(name) || table_->identifiers().count(name)) {
    return error_result(name + " already exists.");
  }
  OpenProof proof;
  proof.name = name;
  proof.entry = table_->find_theorem(name);
  proof.hypotheses = current_.section_hypotheses;

  // "Lemma name binders : goal." - binders become hypotheses.
  std::string_view rest = skip_prefixes(statement);
  rest = text::trim(rest.substr(text::first_word(rest).size()));
  rest = text::trim(rest.substr(name.size()));
  auto colon = find_top_level(rest, ":");
  std::string goal;
  if (colon) {
    for (const auto& b : parse_binders(rest.substr(0, *colon))) {
      proof.hypotheses.push_back(Hypothesis{{b.name}, b.type.value_or("_"), std::nullopt});
    }
    goal = strip_terminator(rest.substr(*colon + 1));
  }
  if (definition_style && goal.empty()) {
    return error_result("Syntax error: ':' expected after [binders].");
  }
  if (proof.entry) {
    proof.hypotheses.insert(proof.hypotheses.end(), proof.entry->hypotheses.begin(),
                            proof.entry->hypotheses.end());
    if (proof.entry->goal) goal = *proof.entry->goal;
  }
  if (goal.empty()) return error_result("Syntax error: ':' expected after [ident].");
  proof.goals.push_back(rename_shadowing_binders(text::normalize_whitespace(goal),
                                                 proof.hypotheses));
  current_.proof = std::move(proof);
  return ok_with_state();
}

StepResult MockProverSession::execute_vernacular(const std::string& body) {
  std::string_view cmd_text = skip_prefixes(body);
  std::string word(text::first_word(cmd_text));
  if (!word.empty() && word.back() == '.') word.pop_back();

  if (is_bullet(body)) {
    return error_result("No focused proof (No proof-editing in progress).");
  }
  if (is_theorem_statement(cmd_text) || word == "Example" ||
      ((word == "Definition" || word == "Instance") &&
       !find_top_level(cmd_text, ":="))) {
    return open_proof(statement_name(cmd_text), std::string(cmd_text),
                      !is_theorem_statement(cmd_text));
  }
  if (word == "Goal") {
    OpenProof proof;
    proof.name = "Unnamed_thm";
    proof.hypotheses = current_.section_hypotheses;
    proof.goals.push_back(
        strip_terminator(std::string_view(cmd_text).substr(4)));
    current_.proof = std::move(proof);
    return ok_with_state();
  }
  if (auto qc = parse_query_command(word)) {
    std::string arg = strip_terminator(std::string_view(cmd_text).substr(word.size()));
    bool rejected = false;
    auto out = run_query(word, arg, rejected);
    StepResult r;
    if (rejected) return error_result(*out);
    r.message = out.value_or("");
    return r;
  }
  if (word == "Proof" || word == "Qed" || word == "Defined" || word == "Admitted") {
    return error_result("No focused proof (No proof-editing in progress).");
  }
  if (word == "Require" || word == "From") {
    std::string_view libs_text = cmd_text;
    std::string prefix;
    if (word == "From") {
      libs_text = text::trim(libs_text.substr(4));
      prefix = std::string(text::first_word(libs_text));
    }
    std::istringstream in(strip_terminator(libs_text));
    std::string lib;
    while (in >> lib) {
      if (lib == "Require" || lib == "Import" || lib == "Export" || lib == "From" ||
          lib == prefix) {
        continue;
      }
      std::string root = lib.substr(0, lib.find('.'));
      bool known = builtin_libraries().count(root) || table_->libraries().count(lib) ||
                   table_->libraries().count(root) ||
                   (!prefix.empty() && (builtin_libraries().count(prefix) ||
                                        table_->libraries().count(prefix)));
      if (!known) {
        return error_result("Cannot find a physical path bound to logical path " +
                            lib + ".");
      }
    }
    return StepResult{};
  }
  if (word == "Section") {
    current_.section_marks.push_back(current_.section_hypotheses.size());
    return StepResult{};
  }
  if (word == "End") {
    if (!current_.section_marks.empty()) {
      current_.section_hypotheses.resize(current_.section_marks.back());
      current_.section_marks.pop_back();
    }
    return StepResult{};
  }
  if (word == "Variable" || word == "Variables" || word == "Hypothesis" ||
      word == "Hypotheses" || word == "Context") {
    std::string decl = strip_terminator(std::string_view(cmd_text).substr(word.size()));
    std::vector<Binder> binders;
    auto colon = find_top_level(decl, ":");
    if (colon && decl.find('(') != 0 && decl.find('{') != 0) {
      std::string type = text::trim_copy(std::string_view(decl).substr(*colon + 1));
      for (const auto& n : identifiers_in(std::string_view(decl).substr(0, *colon))) {
        binders.push_back(Binder{n, type});
      }
    } else {
      binders = parse_binders(decl);
    }
    auto taken = names_of(current_.section_hypotheses);
    for (const auto& b : binders) {
      if (taken.count(b.name)) return error_result(b.name + " already exists.");
    }
    // Consecutive names sharing a type display as one group.
    for (std::size_t i = 0; i < binders.size();) {
      Hypothesis h{{binders[i].name}, binders[i].type.value_or("_"), std::nullopt};
      std::size_t j = i + 1;
      while (j < binders.size() && binders[j].type == binders[i].type) {
        h.names.push_back(binders[j].name);
        ++j;
      }
      current_.section_hypotheses.push_back(std::move(h));
      i = j;
    }
    return StepResult{};
  }
  static const std::set<std::string> kDeclaring = {
      "Definition", "Fixpoint", "CoFixpoint", "Inductive", "CoInductive",
      "Record", "Structure", "Class", "Instance", "Let", "Ltac", "Parameter",
      "Parameters", "Axiom", "Axioms", "Conjecture", "Variant", "Abbreviation"};
  if (kDeclaring.count(word)) {
    std::string rest = strip_terminator(std::string_view(cmd_text).substr(word.size()));
    auto ids = identifiers_in(rest);
    if (ids.empty()) return error_result("Syntax error: [identifier] expected.");
    current_.globals.insert(ids.front());
    if (word == "Parameters" || word == "Axioms") {
      if (auto colon = find_top_level(rest, ":")) {
        for (const auto& n : identifiers_in(std::string_view(rest).substr(0, *colon))) {
          current_.globals.insert(n);
        }
      }
    }
    if (auto def = find_top_level(rest, ":=")) {
      std::string_view ctors = std::string_view(rest).substr(*def + 2);
      if (word == "Inductive" || word == "CoInductive" || word == "Variant") {
        for (const auto& alt : split_top_level(ctors, '|')) {
          auto cids = identifiers_in(alt);
          if (!cids.empty()) current_.globals.insert(cids.front());
        }
      } else if (word == "Record" || word == "Structure" || word == "Class") {
        auto brace = ctors.find('{');
        auto head = identifiers_in(ctors.substr(0, brace));
        if (!head.empty()) current_.globals.insert(head.front());
        if (brace != std::string_view::npos) {
          for (const auto& field : split_top_level(
                   ctors.substr(brace + 1, ctors.rfind('}') - brace - 1), ';')) {
            auto fids = identifiers_in(field);
            if (!fids.empty()) current_.globals.insert(fids.front());
          }
        }
      }
    }
    return StepResult{};
  }
  if (!word.empty() && std::islower(static_cast<unsigned char>(word[0]))) {
    return error_result("Syntax error: illegal begin of vernac.");
  }
  return StepResult{};
}

StepResult MockProverSession::execute_in_proof(const std::string& body) {
  auto& proof = *current_.proof;
  std::string word(text::first_word(body));
  if (!word.empty() && word.back() == '.') word.pop_back();

  if (word == "Proof" && !is_bullet(body)) return ok_with_state();
  if (word == "Show") return ok_with_state();
  if (word == "Qed" || word == "Defined" || word == "Save") {
    if (!trusted_ && !proof.goals.empty()) {
      return error_result(" (in proof " + proof.name +
                          "): Attempt to save an incomplete proof");
    }
    current_.globals.insert(proof.name);
    current_.proof.reset();
    StepResult r;
    r.proof_complete = true;
    r.message = proof.name + " is defined";
    return r;
  }
  if (word == "Admitted") {
    current_.globals.insert(proof.name);
    current_.proof.reset();
    StepResult r;
    r.message = proof.name + " is declared";
    return r;
  }
  if (word == "Abort") {
    current_.proof.reset();
    return StepResult{};
  }
  if (parse_query_command(word)) {
    std::string arg = strip_terminator(std::string_view(body).substr(word.size()));
    bool rejected = false;
    auto out = run_query(word, arg, rejected);
    if (rejected) return error_result(*out);
    StepResult r = ok_with_state();
    r.message = out.value_or("");
    return r;
  }
  if (is_theorem_statement(body)) {
    return error_result("Nested proofs are discouraged and not allowed by default.");
  }
  if (trusted_) {
    proof.steps.push_back(norm_sentence(body));
    return ok_with_state();
  }
  return execute_tactic(norm_sentence(body));
}

StepResult MockProverSession::execute_tactic(const std::string& norm) {
  auto& proof = *current_.proof;
  if (proof.goals.empty()) return error_result("No such goal.");

  const MockTheorem* entry = proof.entry;
  if (entry) {
    if (auto it = entry->errors.find(norm); it != entry->errors.end()) {
      return error_result(it->second);
    }
  }

  std::vector<std::string> candidate = proof.steps;
  candidate.push_back(norm);

  if (entry) {
    bool is_prefix = false;
    bool is_complete = false;
    for (const auto& script : entry->accepted) {
      if (script.size() >= candidate.size() &&
          std::equal(candidate.begin(), candidate.end(), script.begin())) {
        is_prefix = true;
        if (script.size() == candidate.size()) is_complete = true;
      }
    }
    if (is_prefix) {
      OpenProof next = proof;
      next.steps = candidate;
      // Track introduced names so later states stay plausible; a failed
      // intro here just leaves the display unchanged.
      OpenProof introduced = next;
      if (!try_intro(norm, introduced)) next = std::move(introduced);
      if (is_complete) next.goals.clear();
      for (const auto& st : entry->states) {
        if (st.after == candidate) {
          next.hypotheses = st.hypotheses;
          next.goals = st.goals;
        }
      }
      current_.proof = std::move(next);
      return ok_with_state();
    }
  }

  // Generic behaviour shared by every theorem.
  std::string word(text::first_word(norm));
  if (!word.empty() && word.back() == '.') word.pop_back();
  const std::string& goal = proof.goals.front();
  std::string arg = strip_terminator(std::string_view(norm).substr(word.size()));

  if (word == "intro" || word == "intros") {
    OpenProof next = proof;
    if (auto err = try_intro(norm, next)) return error_result(*err);
    next.steps = candidate;
    current_.proof = std::move(next);
    return ok_with_state();
  }

  auto close_goal = [&]() {
    proof.steps = candidate;
    proof.goals.erase(proof.goals.begin());
    return ok_with_state();
  };

  auto hyp_type = [&](const std::string& name) -> std::optional<std::string> {
    for (const auto& h : proof.hypotheses) {
      if (std::find(h.names.begin(), h.names.end(), name) != h.names.end()) {
        return text::normalize_whitespace(h.type_text);
      }
    }
    return std::nullopt;
  };
  std::string goal_norm = text::normalize_whitespace(goal);

  static const std::set<std::string> kTrueClosers = {
      "exact I", "apply I", "trivial", "auto", "constructor", "easy", "tauto",
      "intuition", "firstorder", "eauto"};
  std::string tactic_body = strip_terminator(norm);
  if (goal_norm == "True" && kTrueClosers.count(tactic_body)) return close_goal();

  static const std::set<std::string> kAssumptionLike = {"assumption", "auto", "trivial",
                                                        "easy", "eauto", "tauto"};
  if (kAssumptionLike.count(tactic_body)) {
    for (const auto& h : proof.hypotheses) {
      if (text::normalize_whitespace(h.type_text) == goal_norm) return close_goal();
    }
  }
  if (tactic_body == "reflexivity" || tactic_body == "auto" || tactic_body == "easy" ||
      tactic_body == "trivial") {
    auto eq = find_top_level(goal_norm, " = ");
    if (eq && goal_norm.substr(0, *eq) == goal_norm.substr(*eq + 3)) return close_goal();
  }
  if ((word == "exact" || word == "apply") && is_plain_ident(arg)) {
    if (auto t = hyp_type(arg); t && *t == goal_norm) return close_goal();
    static const std::map<std::string, std::string> kLiteralTypes = {
        {"O", "nat"}, {"0", "nat"}, {"true", "bool"}, {"false", "bool"},
        {"tt", "unit"}, {"I", "True"}};
    auto lit = kLiteralTypes.find(arg);
    std::optional<std::string> t = lit != kLiteralTypes.end()
                                       ? std::optional<std::string>(lit->second)
                                       : hyp_type(arg);
    if (word == "exact" && t && *t != "_" && *t != goal_norm) {
      return error_result("The term \"" + arg + "\" has type \"" + *t +
                          "\" while it is expected to have type \"" + goal_norm +
                          "\".");
    }
  }
  if (auto missing = unknown_reference(norm, proof)) {
    return error_result(not_found(*missing));
  }
  if (entry && entry->default_error) return error_result(*entry->default_error);
  return error_result("Tactic failure: " + tactic_body + " cannot solve or "
                      "transform the goal as written.");
}

std::optional<std::string> MockProverSession::try_intro(const std::string& norm,
                                                        OpenProof& proof) const {
  std::string word(text::first_word(norm));
  if (!word.empty() && word.back() == '.') word.pop_back();
  if (word != "intro" && word != "intros") return std::string("not an intro");
  std::string args = strip_terminator(std::string_view(norm).substr(word.size()));
  std::vector<std::string> names;
  bool opaque = false;
  {
    std::istringstream in(args);
    std::string tok;
    while (in >> tok) {
      if (is_plain_ident(tok)) names.push_back(tok);
      else opaque = true;
    }
  }
  if (opaque) {
    // Intro patterns: only the arity is checked.
    std::size_t count = 0;
    int depth = 0;
    std::istringstream in(args);
    std::string tok;
    while (in >> tok) {
      if (depth == 0) ++count;
      for (char c : tok) depth += delimiter_delta(c);
    }
    if (count > count_introducible(proof.goals.front())) {
      return std::string("No product even after head-reduction.");
    }
    std::string goal = proof.goals.front();
    for (std::size_t i = 0; i < count; ++i) goal = peel_one(goal)->rest;
    proof.goals.front() = goal;
    return std::nullopt;
  }

  std::set<std::string> taken = names_of(proof.hypotheses);
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (taken.count(names[i]) ||
        std::find(names.begin(), names.begin() + i, names[i]) != names.begin() + i) {
      return names[i] + " is already used.";
    }
  }
  std::size_t available = count_introducible(proof.goals.front());
  std::size_t wanted = names.size();
  if (word == "intro" && wanted == 0) wanted = 1;
  if (word == "intros" && names.empty()) wanted = available;
  if (wanted > available) return std::string("No product even after head-reduction.");

  std::string goal = proof.goals.front();
  for (std::size_t i = 0; i < wanted; ++i) {
    auto p = peel_one(goal);
    std::string name;
    if (i < names.size()) {
      name = names[i];
    } else {
      name = fresh_name(p->binder.value_or("H"), taken);
    }
    taken.insert(name);
    goal = p->binder ? replace_word(p->rest, *p->binder, name) : p->rest;
    proof.hypotheses.push_back(Hypothesis{{name}, p->type, std::nullopt});
  }
  proof.goals.front() = goal;
  return std::nullopt;
}

bool MockProverSession::is_known(const std::string& ident, const OpenProof& proof) const {
  if (current_.globals.count(ident) || table_->identifiers().count(ident) ||
      builtin_identifiers().count(ident)) {
    return true;
  }
  for (const auto& h : proof.hypotheses) {
    if (std::find(h.names.begin(), h.names.end(), ident) != h.names.end()) return true;
    for (const auto& id : identifiers_in(h.type_text)) {
      if (id == ident) return true;
    }
  }
  for (const auto& g : proof.goals) {
    for (const auto& id : identifiers_in(g)) {
      if (id == ident) return true;
    }
  }
  auto dot = ident.find('.');
  if (dot != std::string::npos) {
    std::string root = ident.substr(0, dot);
    return builtin_modules().count(root) || table_->identifiers().count(root) ||
           current_.globals.count(root);
  }
  return false;
}

std::optional<std::string> MockProverSession::unknown_reference(
    const std::string& norm, const OpenProof& proof) const {
  std::string body = strip_terminator(norm);
  for (auto piece : split_top_level(body, ';')) {
    // Tactic combinators in front of the tactic proper.
    std::string_view p = piece;
    bool again = true;
    while (again) {
      again = false;
      p = text::trim(p);
      for (std::string_view w : {"try", "repeat", "progress", "now", "solve", "first"}) {
        if (text::starts_with_word(p, w)) {
          p = p.substr(w.size());
          again = true;
        }
      }
    }
    std::string head(text::first_word(p));
    std::string_view args = text::trim(p.substr(head.size()));
    std::vector<std::string> checked;
    if (reference_tactics().count(head)) {
      std::string_view a = args;
      if (auto as = a.find(" as "); as != std::string_view::npos) a = a.substr(0, as);
      if (auto with = a.find(" with "); with != std::string_view::npos) a = a.substr(0, with);
      if (auto eqn = a.find(" eqn:"); eqn != std::string_view::npos) a = a.substr(0, eqn);
      checked = identifiers_in(a);
    }
    if (auto using_pos = args.find("using "); using_pos != std::string_view::npos &&
        (head == "auto" || head == "eauto" || head == "intuition" || head == "firstorder")) {
      std::string_view u = args.substr(using_pos + 6);
      if (auto with = u.find(" with "); with != std::string_view::npos) u = u.substr(0, with);
      auto more = identifiers_in(u);
      checked.insert(checked.end(), more.begin(), more.end());
    }
    for (const auto& id : checked) {
      if (argument_keywords().count(id)) continue;
      if (!is_known(id, proof)) return id;
    }
  }
  return std::nullopt;
}

std::optional<std::string> MockProverSession::run_query(const std::string& command,
                                                        const std::string& argument,
                                                        bool& rejected) const {
  rejected = false;
  std::string arg = text::normalize_whitespace(argument);
  if (auto scripted = table_->find_query(command + " " + arg)) return scripted;

  static const std::map<std::string, std::string> kBuiltinTypes = {
      {"nat", "Set"}, {"bool", "Set"}, {"True", "Prop"}, {"False", "Prop"},
      {"I", "True"}, {"O", "nat"}, {"S", "nat -> nat"}, {"unit", "Set"},
      {"tt", "unit"}, {"Prop", "Type"}, {"Set", "Type"}};
  auto builtin = kBuiltinTypes.find(arg);
  std::optional<std::string> type;
  if (builtin != kBuiltinTypes.end()) type = builtin->second;
  bool known = builtin != kBuiltinTypes.end();
  if (current_.proof) {
    for (const auto& h : current_.proof->hypotheses) {
      if (std::find(h.names.begin(), h.names.end(), arg) != h.names.end()) {
        known = true;
        type = h.type_text;
      }
    }
  }
  for (const auto& h : current_.section_hypotheses) {
    if (std::find(h.names.begin(), h.names.end(), arg) != h.names.end()) {
      known = true;
      type = h.type_text;
    }
  }
  known = known || current_.globals.count(arg) || table_->identifiers().count(arg) ||
          builtin_identifiers().count(arg);

  if (command == "Search") return std::string();
  if (command == "Locate") {
    if (!known) return "No object of basename " + arg;
    return "Constant " + arg;
  }
  if (!is_plain_ident(arg) && command == "Check") {
    return arg + "\n     : _";
  }
  if (!known) {
    rejected = true;
    return not_found(arg);
  }
  if (command == "Check") return arg + "\n     : " + type.value_or("_");
  if (command == "About") return arg + " : " + type.value_or("_");
  // Print
  return arg + " : " + type.value_or("_");
}

std::string MockProverSession::query(QueryCommand command, std::string_view argument) {
  if (text::trim(argument).empty()) {
    throw HarnessError(ErrorCode::kQueryRejected, "empty query argument");
  }
  bool rejected = false;
  auto out = run_query(std::string(query_command_name(command)),
                       std::string(argument), rejected);
  if (rejected) throw HarnessError(ErrorCode::kQueryRejected, *out);
  return out.value_or("");
}

}  // namespace coqharness::coq

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

#include "coqharness/coq/proof_state.hpp"

#include <algorithm>
#include <regex>
#include <set>

#include "coqharness/common/error.hpp"
#include "coqharness/common/text.hpp"

namespace coqharness::coq {

namespace {

constexpr std::string_view kSeparatorBar = "______________________________________";

std::size_t indentation(std::string_view line) {
  std::size_t i = 0;
  while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
  return i;
}

[[noreturn]] void malformed(const std::string& detail) {
  throw HarnessError(ErrorCode::kMalformedState,
                     "malformed proof state: " + detail);
}

struct SeparatorMatch {
  bool matched = false;
  std::optional<GoalIndex> index;
};

SeparatorMatch match_separator(const std::string& line) {
  static const std::regex kEmacs(R"(^\s*_{3,}\s*\((\d+)/(\d+)\)\s*$)");
  static const std::regex kPlain(R"(^\s*={3,}\s*$)");
  std::smatch m;
  if (std::regex_match(line, m, kEmacs)) {
    return {true, GoalIndex{std::stoul(m[1].str()), std::stoul(m[2].str())}};
  }
  if (std::regex_match(line, kPlain)) return {true, std::nullopt};
  return {};
}

bool is_goal_n_is(const std::string& line) {
  static const std::regex kGoalN(R"(^\s*goal \d+ is:\s*$)");
  return std::regex_match(line, kGoalN);
}

bool is_header(const std::string& line) {
  static const std::regex kHeader(
      R"(^\s*\d+ (focused )?(sub)?goals?(\s*\(.*\))?\s*$)");
  static const std::regex kShelved(R"(^\s*\((shelved|unfocused).*\)\s*$)");
  return std::regex_match(line, kHeader) || std::regex_match(line, kShelved);
}

// Splits "A, X, Y : Type" into names and the text after the colon. Returns
// nullopt when the line does not start with an identifier list and a colon.
struct HypHead {
  std::vector<std::string> names;
  std::string rest;
  bool is_definition = false;
};

std::optional<HypHead> read_hyp_head(std::string_view line) {
  HypHead head;
  std::size_t i = indentation(line);
  while (true) {
    if (i >= line.size() ||
        !text::is_ident_start(static_cast<unsigned char>(line[i]))) {
      return std::nullopt;
    }
    std::size_t b = i;
    while (i < line.size() &&
           text::is_ident_char(static_cast<unsigned char>(line[i]))) {
      ++i;
    }
    head.names.emplace_back(line.substr(b, i - b));
    while (i < line.size() && line[i] == ' ') ++i;
    if (i < line.size() && line[i] == ',') {
      ++i;
      while (i < line.size() && line[i] == ' ') ++i;
      continue;
    }
    break;
  }
  if (i >= line.size() || line[i] != ':') return std::nullopt;
  ++i;
  if (i < line.size() && line[i] == '=') {
    head.is_definition = true;
    ++i;
  }
  // "x : T" requires a space or end after the colon; "x:T" also parses.
  head.rest = std::string(text::trim(line.substr(i)));
  return head;
}

// Splits "v : T" of a local definition at the last top-level " : ".
void split_definition(const std::string& body, Hypothesis& hyp) {
  int depth = 0;
  std::optional<std::size_t> split;
  for (std::size_t i = 0; i < body.size(); ++i) {
    char c = body[i];
    if (c == '(' || c == '[' || c == '{') ++depth;
    if (c == ')' || c == ']' || c == '}') --depth;
    if (depth == 0 && c == ':' && i > 0 && body[i - 1] == ' ' &&
        i + 1 < body.size() && body[i + 1] == ' ') {
      split = i;
    }
  }
  if (!split) {
    hyp.value = body;
    return;
  }
  hyp.value = text::trim_copy(std::string_view(body).substr(0, *split - 1));
  hyp.type_text = text::trim_copy(std::string_view(body).substr(*split + 1));
}

std::string strip_trailing(std::string_view s) {
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return std::string(s);
}

std::string finish_goal(const std::vector<std::string>& lines) {
  std::size_t first = 0;
  std::size_t last = lines.size();
  while (first < last && text::trim(lines[first]).empty()) ++first;
  while (last > first && text::trim(lines[last - 1]).empty()) --last;
  std::size_t dedent = std::string::npos;
  for (std::size_t i = first; i < last; ++i) {
    if (text::trim(lines[i]).empty()) continue;
    dedent = std::min(dedent, indentation(lines[i]));
  }
  std::vector<std::string> kept;
  for (std::size_t i = first; i < last; ++i) {
    std::string_view l = lines[i];
    l.remove_prefix(std::min(dedent, indentation(l)));
    kept.push_back(strip_trailing(l));
  }
  return text::join(kept, "\n");
}

}  // namespace

std::vector<std::string> ProofState::hypothesis_names() const {
  std::vector<std::string> out;
  for (const auto& h : hypotheses) {
    out.insert(out.end(), h.names.begin(), h.names.end());
  }
  return out;
}

bool ProofState::has_hypothesis(std::string_view name) const {
  for (const auto& h : hypotheses) {
    if (std::find(h.names.begin(), h.names.end(), name) != h.names.end()) {
      return true;
    }
  }
  return false;
}

bool is_no_more_goals(std::string_view raw) {
  return raw.find("No more goals") != std::string_view::npos ||
         raw.find("No more subgoals") != std::string_view::npos ||
         raw.find("All the remaining goals are on the shelf") !=
             std::string_view::npos;
}

ProofState parse_proof_state(std::string_view raw) {
  auto lines = text::split_lines(raw);
  std::size_t first_sep = lines.size();
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (match_separator(lines[i]).matched) {
      first_sep = i;
      break;
    }
  }
  if (first_sep == lines.size()) malformed("no goal separator found");

  ProofState state;
  std::optional<std::size_t> base_indent;
  std::vector<std::string> pending_type;
  bool pending_definition = false;
  auto flush = [&]() {
    if (state.hypotheses.empty()) return;
    auto& hyp = state.hypotheses.back();
    std::string body = text::join(pending_type, "\n");
    if (pending_definition) {
      split_definition(body, hyp);
    } else {
      hyp.type_text = body;
    }
    pending_type.clear();
  };

  for (std::size_t i = 0; i < first_sep; ++i) {
    const std::string& line = lines[i];
    if (text::trim(line).empty() || is_header(line)) continue;
    std::size_t ind = indentation(line);
    auto head = read_hyp_head(line);
    bool starts_new =
        head && (!base_indent || ind <= *base_indent || state.hypotheses.empty());
    if (starts_new) {
      flush();
      if (!base_indent) base_indent = ind;
      state.hypotheses.push_back(Hypothesis{head->names, "", std::nullopt});
      pending_definition = head->is_definition;
      if (!head->rest.empty()) pending_type.push_back(head->rest);
      continue;
    }
    if (state.hypotheses.empty()) {
      malformed("unreadable hypothesis line: " + line);
    }
    pending_type.push_back(text::trim_copy(line));
  }
  flush();

  std::set<std::string> seen;
  for (const auto& name : state.hypothesis_names()) {
    if (!seen.insert(name).second) malformed("duplicate hypothesis " + name);
  }

  std::vector<std::string> goal_lines;
  bool have_goal = false;
  std::optional<GoalIndex> index;
  auto close_goal = [&]() {
    if (!have_goal) return;
    std::string goal = finish_goal(goal_lines);
    if (goal.empty()) malformed("empty goal");
    state.goals.push_back(std::move(goal));
    goal_lines.clear();
  };
  for (std::size_t i = first_sep; i < lines.size(); ++i) {
    auto sep = match_separator(lines[i]);
    if (sep.matched || is_goal_n_is(lines[i])) {
      close_goal();
      have_goal = true;
      if (sep.index && !index) index = sep.index;
      continue;
    }
    goal_lines.push_back(lines[i]);
  }
  close_goal();

  if (index) {
    if (index->total == 0 || index->current == 0 ||
        index->current > index->total) {
      malformed("bad goal index");
    }
    state.goal_index = *index;
  } else {
    state.goal_index = GoalIndex{1, state.goals.size()};
  }
  if (state.goals.empty()) malformed("no goals");
  return state;
}

std::string render_proof_state(const ProofState& state) {
  std::string out;
  for (const auto& hyp : state.hypotheses) {
    out += "  ";
    out += text::join(hyp.names, ", ");
    std::string body;
    if (hyp.value) {
      out += " := ";
      body = *hyp.value;
      if (!hyp.type_text.empty()) body += " : " + hyp.type_text;
    } else {
      out += " : ";
      body = hyp.type_text;
    }
    auto lines = text::split_lines(body);
    out += lines.front();
    for (std::size_t i = 1; i < lines.size(); ++i) {
      out += "\n      ";
      out += lines[i];
    }
    out += "\n";
  }
  const std::size_t total = state.goal_index.total;
  for (std::size_t g = 0; g < state.goals.size(); ++g) {
    std::size_t k = state.goal_index.current + g;
    out += "  ";
    out += kSeparatorBar;
    out += "(" + std::to_string(k) + "/" + std::to_string(std::max(total, k)) +
           ")\n";
    for (const auto& line : text::split_lines(state.goals[g])) {
      out += "  " + line + "\n";
    }
  }
  return out;
}

}  // namespace coqharness::coq

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

#include "coqharness/corpus/corpus.hpp"

#include <fnmatch.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "coqharness/common/error.hpp"
#include "coqharness/common/hash.hpp"
#include "coqharness/common/random.hpp"
#include "coqharness/common/text.hpp"

namespace coqharness::corpus {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

constexpr std::string_view kFormat = "coqharness-corpus";
constexpr int kVersion = 1;

std::string_view split_label_name(SplitLabel label) {
  switch (label) {
    case SplitLabel::kTrain: return "train";
    case SplitLabel::kTest: return "test";
    case SplitLabel::kExcluded: return "excluded";
  }
  return "train";
}

std::optional<SplitLabel> parse_split_label(std::string_view name) {
  if (name == "train") return SplitLabel::kTrain;
  if (name == "test") return SplitLabel::kTest;
  if (name == "excluded") return SplitLabel::kExcluded;
  return std::nullopt;
}

std::optional<SplitPolicy> parse_split_policy(std::string_view name) {
  if (name == "by_index") return SplitPolicy::kByIndex;
  if (name == "by_file") return SplitPolicy::kByFile;
  if (name == "explicit") return SplitPolicy::kExplicit;
  return std::nullopt;
}

std::string_view split_policy_name(SplitPolicy policy) {
  switch (policy) {
    case SplitPolicy::kByIndex: return "by_index";
    case SplitPolicy::kByFile: return "by_file";
    case SplitPolicy::kExplicit: return "explicit";
  }
  return "by_index";
}

std::string TheoremRecord::proof_text() const {
  std::vector<std::string> parts;
  parts.reserve(proof.size());
  for (const auto& s : proof) parts.push_back(s.text);
  return text::join(parts, "\n");
}

std::size_t TheoremRecord::tactic_count() const {
  std::size_t n = 0;
  for (const auto& s : proof) {
    auto body = text::trim_copy(text::strip_comments(s.text));
    if (coq::is_closing_command(body) || text::starts_with_word(body, "Proof")) continue;
    ++n;
  }
  return n;
}

const TheoremRecord* Corpus::find(std::string_view id) const {
  for (const auto& r : records) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

const TheoremRecord& Corpus::at(std::string_view id) const {
  if (auto* r = find(id)) return *r;
  throw HarnessError(ErrorCode::kUnknownId, "unknown theorem id " + std::string(id));
}

SplitLabel Corpus::label(std::string_view id) const {
  auto it = split_labels.find(std::string(id));
  if (it == split_labels.end()) {
    throw HarnessError(ErrorCode::kUnknownId, "unknown theorem id " + std::string(id));
  }
  return it->second;
}

std::vector<const TheoremRecord*> Corpus::with_label(SplitLabel wanted) const {
  std::vector<const TheoremRecord*> out;
  for (const auto& r : records) {
    if (label(r.id) == wanted) out.push_back(&r);
  }
  return out;
}

namespace {

bool is_obligation_command(std::string_view body) {
  body = text::trim(body);
  return text::starts_with_word(body, "Program") ||
         text::starts_with_word(body, "Obligation") ||
         text::starts_with_word(body, "Next") ||
         text::starts_with_word(body, "Solve");
}

bool is_abandoned(std::string_view closing) {
  auto body = text::trim_copy(text::strip_comments(closing));
  return text::starts_with_word(body, "Admitted") || text::starts_with_word(body, "Abort");
}

}  // namespace

void ingest_source(std::string_view file, std::string_view source, Corpus& corpus) {
  coq::SegmentedSource seg;
  try {
    seg = coq::segment_source(source);
  } catch (const LexicalError& e) {
    corpus.warnings.push_back(IngestWarning{std::string(file), e.offset(),
                                            std::string("file skipped: ") + e.what()});
    return;
  }
  const auto& sentences = seg.sentences;
  std::set<std::string> used_ids;
  for (const auto& r : corpus.records) used_ids.insert(r.id);

  std::size_t index_in_file = 0;
  std::size_t i = 0;
  while (i < sentences.size()) {
    const auto& s = sentences[i];
    std::string body = text::trim_copy(text::strip_comments(s.text));
    if (is_obligation_command(body)) {
      corpus.warnings.push_back(IngestWarning{std::string(file), s.span.start,
                                              "Program/Obligation proof skipped"});
      ++i;
      continue;
    }
    if (!coq::is_theorem_statement(body)) {
      ++i;
      continue;
    }
    int depth = 1;
    std::size_t j = i + 1;
    for (; j < sentences.size(); ++j) {
      const auto& t = sentences[j].text;
      if (coq::is_theorem_statement(t)) ++depth;
      if (coq::is_closing_command(t) && --depth == 0) break;
    }
    if (j >= sentences.size()) {
      corpus.warnings.push_back(IngestWarning{std::string(file), s.span.start,
                                              "proof not closed before end of file"});
      break;
    }
    TheoremRecord rec;
    rec.name = coq::statement_name(body);
    rec.file = std::string(file);
    rec.id = rec.file + ":" + rec.name;
    if (used_ids.count(rec.id)) rec.id += "@" + std::to_string(index_in_file);
    used_ids.insert(rec.id);
    rec.statement = s;
    rec.proof.assign(sentences.begin() + static_cast<std::ptrdiff_t>(i) + 1,
                     sentences.begin() + static_cast<std::ptrdiff_t>(j) + 1);
    rec.preceding_source = std::string(source.substr(0, s.span.start));
    rec.index_in_file = index_in_file++;
    corpus.split_labels[rec.id] =
        is_abandoned(sentences[j].text) ? SplitLabel::kExcluded : SplitLabel::kTrain;
    corpus.records.push_back(std::move(rec));
    i = j + 1;
  }
}

Corpus ingest_project(const fs::path& root, const IngestOptions& options) {
  if (!fs::is_directory(root)) {
    throw HarnessError(ErrorCode::kNoSourcesFound,
                       "corpus root is not a directory: " + root.string());
  }
  auto excluded = [&](const std::string& rel) {
    std::string name = fs::path(rel).filename().string();
    for (const auto& g : options.exclude_globs) {
      if (fnmatch(g.c_str(), rel.c_str(), 0) == 0 ||
          fnmatch(g.c_str(), name.c_str(), 0) == 0) {
        return true;
      }
    }
    return false;
  };
  std::vector<std::string> files;
  auto consider = [&](const fs::directory_entry& entry) {
    if (!entry.is_regular_file() || entry.path().extension() != ".v") return;
    std::string rel = fs::relative(entry.path(), root).generic_string();
    if (!excluded(rel)) files.push_back(rel);
  };
  if (options.follow_subdirs) {
    for (const auto& e : fs::recursive_directory_iterator(root)) consider(e);
  } else {
    for (const auto& e : fs::directory_iterator(root)) consider(e);
  }
  if (files.empty()) {
    throw HarnessError(ErrorCode::kNoSourcesFound, "no .v files under " + root.string());
  }
  std::sort(files.begin(), files.end());

  Corpus corpus;
  corpus.root = root.generic_string();
  for (const auto& rel : files) {
    std::ifstream in(root / rel, std::ios::binary);
    if (!in) {
      corpus.warnings.push_back(IngestWarning{rel, std::nullopt, "cannot read file"});
      continue;
    }
    std::stringstream buf;
    buf << in.rdbuf();
    ingest_source(rel, buf.str(), corpus);
  }
  return corpus;
}

Corpus split_corpus(const Corpus& corpus, const SplitOptions& options) {
  Corpus out = corpus;
  std::vector<std::string> eligible;
  for (const auto& r : corpus.records) {
    if (corpus.label(r.id) != SplitLabel::kExcluded) eligible.push_back(r.id);
  }
  if (eligible.size() < 2) {
    throw HarnessError(ErrorCode::kTooFewRecords,
                       "need at least 2 non-excluded records to split, have " +
                           std::to_string(eligible.size()));
  }
  if (options.policy != SplitPolicy::kExplicit &&
      !(options.test_fraction > 0.0 && options.test_fraction < 1.0)) {
    throw HarnessError(ErrorCode::kConfigError, "test_fraction must lie in (0, 1)");
  }
  for (const auto& id : eligible) out.split_labels[id] = SplitLabel::kTrain;

  const std::size_t n = eligible.size();
  const auto target = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(options.test_fraction * static_cast<double>(n))),
      1, n - 1);
  DeterministicRng rng(options.seed);

  switch (options.policy) {
    case SplitPolicy::kByIndex: {
      std::vector<std::string> order = eligible;
      rng.shuffle(order);
      for (std::size_t k = 0; k < target; ++k) out.split_labels[order[k]] = SplitLabel::kTest;
      break;
    }
    case SplitPolicy::kByFile: {
      std::map<std::string, std::vector<std::string>> by_file;
      for (const auto& id : eligible) by_file[corpus.at(id).file].push_back(id);
      if (by_file.size() < 2) {
        throw HarnessError(ErrorCode::kTooFewRecords,
                           "by_file split needs eligible records in at least 2 files");
      }
      std::vector<std::string> files;
      for (const auto& [f, ids] : by_file) files.push_back(f);
      rng.shuffle(files);
      std::size_t in_test = 0;
      for (std::size_t k = 0; k + 1 < files.size() && in_test < target; ++k) {
        for (const auto& id : by_file[files[k]]) out.split_labels[id] = SplitLabel::kTest;
        in_test += by_file[files[k]].size();
      }
      break;
    }
    case SplitPolicy::kExplicit: {
      std::size_t in_test = 0;
      for (const auto& id : options.test_ids) {
        corpus.at(id);
        if (corpus.label(id) == SplitLabel::kExcluded) continue;
        if (out.split_labels[id] != SplitLabel::kTest) ++in_test;
        out.split_labels[id] = SplitLabel::kTest;
      }
      if (in_test == 0 || in_test == n) {
        throw HarnessError(ErrorCode::kTooFewRecords,
                           "explicit split must leave at least one record on each side");
      }
      break;
    }
  }
  return out;
}

std::vector<const TheoremRecord*> preceding_lemmas(const Corpus& corpus,
                                                   std::string_view id, std::size_t n) {
  const TheoremRecord& target = corpus.at(id);
  std::vector<const TheoremRecord*> before;
  for (const auto& r : corpus.records) {
    if (r.file == target.file && r.index_in_file < target.index_in_file) {
      before.push_back(&r);
    }
  }
  std::sort(before.begin(), before.end(),
            [](const TheoremRecord* a, const TheoremRecord* b) {
              return a->index_in_file < b->index_in_file;
            });
  if (before.size() > n) before.erase(before.begin(), before.end() - static_cast<std::ptrdiff_t>(n));
  return before;
}

namespace {

ordered_json sentence_json(const coq::Sentence& s) {
  ordered_json j;
  j["text"] = s.text;
  j["start"] = s.span.start;
  j["end"] = s.span.end;
  return j;
}

coq::Sentence sentence_from(const ordered_json& j) {
  coq::Sentence s;
  s.text = j.at("text").get<std::string>();
  s.span.start = j.at("start").get<std::size_t>();
  s.span.end = j.at("end").get<std::size_t>();
  if (s.span.end < s.span.start) throw std::invalid_argument("span end before start");
  return s;
}

std::string dump_line(const ordered_json& j) {
  return j.dump(-1, ' ', false, ordered_json::error_handler_t::replace);
}

}  // namespace

std::string serialize_corpus(const Corpus& corpus) {
  std::string out;
  ordered_json header;
  header["format"] = kFormat;
  header["version"] = kVersion;
  header["root"] = corpus.root;
  header["warnings"] = ordered_json::array();
  for (const auto& w : corpus.warnings) {
    ordered_json jw;
    jw["file"] = w.file;
    jw["offset"] = w.offset ? ordered_json(*w.offset) : ordered_json(nullptr);
    jw["message"] = w.message;
    header["warnings"].push_back(jw);
  }
  out += dump_line(header);
  out += '\n';
  for (const auto& r : corpus.records) {
    ordered_json j;
    j["id"] = r.id;
    j["name"] = r.name;
    j["file"] = r.file;
    j["index_in_file"] = r.index_in_file;
    j["split"] = split_label_name(corpus.label(r.id));
    j["statement"] = sentence_json(r.statement);
    j["proof"] = ordered_json::array();
    for (const auto& s : r.proof) j["proof"].push_back(sentence_json(s));
    j["preceding_source"] = r.preceding_source;
    out += dump_line(j);
    out += '\n';
  }
  return out;
}

Corpus parse_corpus(std::string_view jsonl) {
  Corpus corpus;
  auto lines = text::split_lines(jsonl);
  bool saw_header = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    if (text::trim(lines[i]).empty()) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(lines[i]);
    } catch (const std::exception& e) {
      throw SchemaViolation(line_no, e.what());
    }
    try {
      if (!saw_header) {
        if (j.at("format").get<std::string>() != kFormat) {
          throw std::invalid_argument("not a corpus file");
        }
        if (j.at("version").get<int>() != kVersion) {
          throw std::invalid_argument("unsupported corpus version");
        }
        corpus.root = j.at("root").get<std::string>();
        for (const auto& w : j.at("warnings")) {
          IngestWarning iw;
          iw.file = w.at("file").get<std::string>();
          if (!w.at("offset").is_null()) iw.offset = w.at("offset").get<std::size_t>();
          iw.message = w.at("message").get<std::string>();
          corpus.warnings.push_back(std::move(iw));
        }
        saw_header = true;
        continue;
      }
      TheoremRecord r;
      r.id = j.at("id").get<std::string>();
      r.name = j.at("name").get<std::string>();
      r.file = j.at("file").get<std::string>();
      r.index_in_file = j.at("index_in_file").get<std::size_t>();
      auto label = parse_split_label(j.at("split").get<std::string>());
      if (!label) throw std::invalid_argument("bad split label");
      r.statement = sentence_from(j.at("statement"));
      for (const auto& s : j.at("proof")) r.proof.push_back(sentence_from(s));
      r.preceding_source = j.at("preceding_source").get<std::string>();
      if (r.proof.empty() || !coq::is_closing_command(r.proof.back().text)) {
        throw std::invalid_argument("proof must end with a closing command");
      }
      if (!coq::is_theorem_statement(r.statement.text)) {
        throw std::invalid_argument("statement is not theorem-like");
      }
      if (corpus.split_labels.count(r.id)) throw std::invalid_argument("duplicate id " + r.id);
      corpus.split_labels[r.id] = *label;
      corpus.records.push_back(std::move(r));
    } catch (const SchemaViolation&) {
      throw;
    } catch (const std::exception& e) {
      throw SchemaViolation(line_no, e.what());
    }
  }
  if (!saw_header) throw SchemaViolation(1, "missing corpus header");
  return corpus;
}

void save_corpus(const Corpus& corpus, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw HarnessError(ErrorCode::kIoError, "cannot write " + path.string());
  out << serialize_corpus(corpus);
  if (!out) throw HarnessError(ErrorCode::kIoError, "write failed for " + path.string());
}

Corpus load_corpus(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw HarnessError(ErrorCode::kIoError, "cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_corpus(buf.str());
}

std::string corpus_hash(const Corpus& corpus) {
  return sha256_hex(serialize_corpus(corpus));
}

}  // namespace coqharness::corpus

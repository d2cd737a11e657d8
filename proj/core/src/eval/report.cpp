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

#include "coqharness/eval/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "coqharness/common/error.hpp"

namespace coqharness::eval {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::string_view kReportFormat = "coqharness-report";
constexpr std::string_view kAttemptsFormat = "coqharness-attempts";

std::string percent(double share) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", share);
  return buf;
}

std::string short_hash(const std::string& h) { return h.size() > 12 ? h.substr(0, 12) : h; }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw HarnessError(ErrorCode::kIoError, "cannot write " + path.string());
  out << content;
  if (!out.flush()) throw HarnessError(ErrorCode::kIoError, "write failed: " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw HarnessError(ErrorCode::kIoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string table_row(const std::string& label, const std::vector<std::string>& cells) {
  std::string row = "| " + label + " |";
  for (const auto& c : cells) row += " " + c + " |";
  return row + "\n";
}

std::string table_header(const std::string& corner, const std::vector<std::string>& tags) {
  std::string out = table_row(corner, tags);
  out += "|---|";
  for (std::size_t i = 0; i < tags.size(); ++i) out += "---:|";
  return out + "\n";
}

template <typename F>
std::vector<std::string> per_tag(const EvalReport& r, F f) {
  std::vector<std::string> cells;
  for (const auto& tag : r.config_order) cells.push_back(f(r.metrics(tag)));
  return cells;
}

std::string file_stem_for(const std::string& tag) {
  std::string out;
  for (char c : tag) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '.' || c == '_' || c == '+' || c == '-';
    out += ok ? c : '_';
  }
  if (out.empty() || out.front() == '.') out.insert(out.begin(), '_');
  return out;
}

}  // namespace

std::string_view report_format_name(ReportFormat format) {
  switch (format) {
    case ReportFormat::kMarkdown: return "markdown";
    case ReportFormat::kCsv: return "csv";
    case ReportFormat::kJson: return "json";
  }
  return "?";
}

std::optional<ReportFormat> parse_report_format(std::string_view name) {
  if (name == "markdown" || name == "md") return ReportFormat::kMarkdown;
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "json") return ReportFormat::kJson;
  return std::nullopt;
}

ordered_json report_to_json(const EvalReport& report) {
  ordered_json j;
  j["format"] = kReportFormat;
  j["version"] = 1;
  j["manifest_hash"] = report.manifest_hash;
  j["corpus_hash"] = report.corpus_hash;
  j["n_test_theorems"] = report.n_test_theorems;
  j["configs"] = report.config_order;
  ordered_json per = ordered_json::object();
  for (const auto& tag : report.config_order) {
    const auto& m = report.metrics(tag);
    ordered_json e;
    e["n_attempts"] = m.n_attempts;
    e["n_correct_proofs"] = m.n_correct_proofs;
    e["n_raw_accepted"] = m.n_raw_accepted;
    e["n_proven_theorems"] = m.n_proven_theorems;
    e["n_missed_simple"] = m.n_missed_simple;
    e["refusal_share_pct"] = m.refusal_share();
    ordered_json tax = ordered_json::object();
    for (auto c : agent::all_error_categories()) {
      auto it = m.taxonomy.find(c);
      tax[std::string(agent::error_category_name(c))] = it == m.taxonomy.end() ? 0 : it->second;
    }
    e["taxonomy"] = std::move(tax);
    e["proven_ids"] = m.proven_ids;
    per[tag] = std::move(e);
  }
  j["per_config"] = std::move(per);
  ordered_json co = ordered_json::object();
  for (const auto& a : report.config_order) {
    ordered_json row = ordered_json::object();
    for (const auto& b : report.config_order) row[b] = report.coincidence_at(a, b);
    co[a] = std::move(row);
  }
  j["coincidence"] = std::move(co);
  j["effective_config"] = report.effective_config;
  return j;
}

EvalReport report_from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != kReportFormat) {
      throw SchemaViolation(0, "not a coqharness report");
    }
    EvalReport r;
    r.manifest_hash = j.at("manifest_hash").get<std::string>();
    r.corpus_hash = j.at("corpus_hash").get<std::string>();
    r.n_test_theorems = j.at("n_test_theorems").get<std::size_t>();
    r.config_order = j.at("configs").get<std::vector<std::string>>();
    for (const auto& tag : r.config_order) {
      const auto& e = j.at("per_config").at(tag);
      ConfigMetrics m;
      m.n_attempts = e.at("n_attempts").get<std::size_t>();
      m.n_correct_proofs = e.at("n_correct_proofs").get<std::size_t>();
      m.n_raw_accepted = e.at("n_raw_accepted").get<std::size_t>();
      m.n_proven_theorems = e.at("n_proven_theorems").get<std::size_t>();
      m.n_missed_simple = e.at("n_missed_simple").get<std::size_t>();
      for (const auto& [name, n] : e.at("taxonomy").items()) {
        auto c = agent::parse_error_category(name);
        if (!c) throw SchemaViolation(0, "unknown category " + name);
        m.taxonomy[*c] = n.get<std::size_t>();
      }
      m.proven_ids = e.at("proven_ids").get<std::set<std::string>>();
      r.per_config[tag] = std::move(m);
    }
    for (const auto& a : r.config_order) {
      for (const auto& b : r.config_order) {
        r.coincidence[{a, b}] = j.at("coincidence").at(a).at(b).get<std::size_t>();
      }
    }
    r.effective_config = ordered_json::parse(j.at("effective_config").dump());
    return r;
  } catch (const json::exception& e) {
    throw SchemaViolation(0, std::string("report json: ") + e.what());
  }
}

std::string render_coincidence(const EvalReport& report) {
  const auto& tags = report.config_order;
  if (tags.size() < 2) {
    throw HarnessError(ErrorCode::kTooFewConfigs, "coincidence table needs at least two configs");
  }
  std::string out = table_header("", tags);
  for (std::size_t i = 0; i < tags.size(); ++i) {
    std::vector<std::string> cells;
    for (std::size_t k = 0; k < tags.size(); ++k) {
      cells.push_back(k < i ? std::to_string(report.coincidence_at(tags[i], tags[k])) : "-");
    }
    out += table_row(tags[i], cells);
  }
  return out;
}

std::string render_taxonomy(const EvalReport& report) {
  std::string out = table_header("Category", report.config_order);
  for (auto c : agent::all_error_categories()) {
    out += table_row(std::string(agent::error_category_name(c)), per_tag(report, [c](const ConfigMetrics& m) {
                       auto it = m.taxonomy.find(c);
                       return std::to_string(it == m.taxonomy.end() ? 0 : it->second);
                     }));
  }
  out += table_row("refusal share", per_tag(report, [](const ConfigMetrics& m) {
                     return percent(m.refusal_share());
                   }));
  out += table_row("missed_simple", per_tag(report, [](const ConfigMetrics& m) {
                     return std::to_string(m.n_missed_simple);
                   }));
  out += "\nCategories are assigned by pattern rules over prover messages "
         "(failure_patterns.txt), an automated stand-in for manual annotation. "
         "missed_simple marks failures on theorems whose reference proof has at most two tactics.\n";
  return out;
}

namespace {

// Flags the settings that are harness choices rather than measured inputs.
std::string harness_notes(const EvalReport& report) {
  bool multi_turn = false, embedding = false;
  const auto configs = report.effective_config.find("configs");
  if (configs != report.effective_config.end() && configs->is_array()) {
    for (const auto& c : *configs) {
      if (c.value("loop", std::string("one_shot")) != "one_shot") multi_turn = true;
      if (c.value("use_embedding", false)) embedding = true;
    }
  }
  std::string out = "- Prompt wording comes from reconstructed templates (prompt_templates.txt).\n";
  if (multi_turn) {
    out += "- The interactive, repair and ensemble loops follow a harness-designed turn protocol.\n";
  }
  if (embedding) {
    out += "- Similarity used a trained embedding whose margin, distance and negative sampling are "
           "harness defaults.\n";
  }
  return out;
}

}  // namespace

std::string render_markdown(const EvalReport& report) {
  std::string out = "# Evaluation report\n\n";
  out += "Test theorems: " + std::to_string(report.n_test_theorems) + "  \n";
  out += "Manifest: `" + short_hash(report.manifest_hash) + "`  Corpus: `" +
         short_hash(report.corpus_hash) + "`\n\n";
  out += "## Results\n\n";
  out += table_header("", report.config_order);
  out += table_row("#Correct Proof", per_tag(report, [](const ConfigMetrics& m) {
                     return std::to_string(m.n_correct_proofs);
                   }));
  out += table_row("#Proven Theorems", per_tag(report, [](const ConfigMetrics& m) {
                     return std::to_string(m.n_proven_theorems);
                   }));
  out += table_row("#Accepted samples (raw)", per_tag(report, [](const ConfigMetrics& m) {
                     return std::to_string(m.n_raw_accepted);
                   }));
  out += table_row("#Attempts", per_tag(report, [](const ConfigMetrics& m) {
                     return std::to_string(m.n_attempts);
                   }));
  out += "\n#Correct Proof counts distinct accepted scripts per theorem; the raw row counts every "
         "accepted sample.\n\n";
  out += "## Failure taxonomy\n\n" + render_taxonomy(report);
  if (report.config_order.size() >= 2) {
    out += "\n## Coinciding proven theorems\n\n" + render_coincidence(report);
  }
  out += "\n## Notes\n\n" + harness_notes(report);
  return out;
}

std::string render_csv(const EvalReport& report) {
  std::string out = "table,row,column,value\n";
  auto line = [&](std::string_view table, const std::string& row, const std::string& col,
                  const std::string& value) {
    out += std::string(table) + "," + csv_field(row) + "," + csv_field(col) + "," + value + "\n";
  };
  for (const auto& tag : report.config_order) {
    const auto& m = report.metrics(tag);
    line("metrics", "n_attempts", tag, std::to_string(m.n_attempts));
    line("metrics", "n_correct_proofs", tag, std::to_string(m.n_correct_proofs));
    line("metrics", "n_raw_accepted", tag, std::to_string(m.n_raw_accepted));
    line("metrics", "n_proven_theorems", tag, std::to_string(m.n_proven_theorems));
    line("metrics", "n_missed_simple", tag, std::to_string(m.n_missed_simple));
    line("metrics", "refusal_share_pct", tag, json(m.refusal_share()).dump());
  }
  for (const auto& tag : report.config_order) {
    const auto& m = report.metrics(tag);
    for (auto c : agent::all_error_categories()) {
      auto it = m.taxonomy.find(c);
      line("taxonomy", std::string(agent::error_category_name(c)), tag,
           std::to_string(it == m.taxonomy.end() ? 0 : it->second));
    }
  }
  for (const auto& a : report.config_order) {
    for (const auto& b : report.config_order) {
      line("coincidence", a, b, std::to_string(report.coincidence_at(a, b)));
    }
  }
  return out;
}

void emit_report(const EvalReport& report, const fs::path& out_dir,
                 const std::set<ReportFormat>& formats) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw HarnessError(ErrorCode::kIoError, "cannot create " + out_dir.string() + ": " + ec.message());
  for (auto f : formats) {
    switch (f) {
      case ReportFormat::kMarkdown: write_file(out_dir / "report.md", render_markdown(report)); break;
      case ReportFormat::kCsv: write_file(out_dir / "report.csv", render_csv(report)); break;
      case ReportFormat::kJson: write_file(out_dir / "report.json", report_to_json(report).dump(2) + "\n"); break;
    }
  }
}

void write_attempts(const EvalRun& run, const fs::path& out_dir) {
  const fs::path dir = out_dir / "attempts";
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw HarnessError(ErrorCode::kIoError, "cannot create " + dir.string() + ": " + ec.message());
  ordered_json meta;
  meta["format"] = kAttemptsFormat;
  meta["version"] = 1;
  meta["configs"] = run.report.config_order;
  meta["manifest_hash"] = run.report.manifest_hash;
  meta["corpus_hash"] = run.report.corpus_hash;
  meta["n_test_theorems"] = run.report.n_test_theorems;
  ordered_json files = ordered_json::object();
  std::set<std::string> used;
  for (const auto& tag : run.report.config_order) {
    std::string stem = file_stem_for(tag);
    for (int i = 2; used.count(stem) || stem == "meta"; ++i) stem = file_stem_for(tag) + "_" + std::to_string(i);
    used.insert(stem);
    files[tag] = stem + ".jsonl";
    auto it = run.attempts.find(tag);
    write_file(dir / (stem + ".jsonl"),
               it == run.attempts.end() ? std::string() : agent::attempts_to_jsonl(it->second));
  }
  meta["files"] = std::move(files);
  meta["effective_config"] = run.report.effective_config;
  write_file(dir / "meta.json", meta.dump(2) + "\n");
}

EvalReport recompute_report(const fs::path& attempts_dir) {
  if (!fs::is_directory(attempts_dir)) {
    throw HarnessError(ErrorCode::kIoError, "not a directory: " + attempts_dir.string());
  }
  AttemptsByConfig attempts;
  const fs::path meta_path = attempts_dir / "meta.json";
  if (fs::exists(meta_path)) {
    ordered_json meta;
    try {
      meta = ordered_json::parse(read_file(meta_path));
      if (meta.at("format").get<std::string>() != kAttemptsFormat) {
        throw SchemaViolation(0, "meta.json is not a coqharness attempts index");
      }
      const auto order = meta.at("configs").get<std::vector<std::string>>();
      for (const auto& tag : order) {
        const auto file = meta.at("files").at(tag).get<std::string>();
        attempts[tag] = agent::attempts_from_jsonl(read_file(attempts_dir / file));
      }
      auto report = aggregate(order, attempts, meta.at("n_test_theorems").get<std::size_t>(),
                              meta.at("manifest_hash").get<std::string>(),
                              meta.at("corpus_hash").get<std::string>());
      report.effective_config = meta.at("effective_config");
      return report;
    } catch (const json::exception& e) {
      throw SchemaViolation(0, std::string("meta.json: ") + e.what());
    }
  }
  // No index: group whatever attempt files are present by their config tag.
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(attempts_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::set<std::string> theorems;
  for (const auto& f : files) {
    for (auto& a : agent::attempts_from_jsonl(read_file(f))) {
      theorems.insert(a.theorem_id);
      attempts[a.config_tag].push_back(std::move(a));
    }
  }
  if (attempts.empty()) throw HarnessError(ErrorCode::kIoError, "no attempt records in " + attempts_dir.string());
  std::vector<std::string> order;
  for (const auto& [tag, _] : attempts) order.push_back(tag);
  return aggregate(order, attempts, theorems.size(), "", "");
}

}  // namespace coqharness::eval

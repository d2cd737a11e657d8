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

#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "coqharness/eval/evaluation.hpp"

namespace coqharness::eval {

enum class ReportFormat { kMarkdown, kCsv, kJson };

std::string_view report_format_name(ReportFormat format);
std::optional<ReportFormat> parse_report_format(std::string_view name);

nlohmann::ordered_json report_to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);

// Lower triangle filled, dashes on and above the diagonal. Needs two configs.
std::string render_coincidence(const EvalReport& report);
std::string render_taxonomy(const EvalReport& report);
std::string render_markdown(const EvalReport& report);
// Long format: table,row,column,value.
std::string render_csv(const EvalReport& report);

// Writes report.md / report.csv / report.json into out_dir.
void emit_report(const EvalReport& report, const std::filesystem::path& out_dir,
                 const std::set<ReportFormat>& formats = {ReportFormat::kMarkdown,
                                                          ReportFormat::kCsv,
                                                          ReportFormat::kJson});

// attempts/<tag>.jsonl plus attempts/meta.json with what aggregate() needs.
void write_attempts(const EvalRun& run, const std::filesystem::path& out_dir);
EvalReport recompute_report(const std::filesystem::path& attempts_dir);

}  // namespace coqharness::eval

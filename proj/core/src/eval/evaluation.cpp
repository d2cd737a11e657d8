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

#include "coqharness/eval/evaluation.hpp"

#include <algorithm>

#include "coqharness/common/error.hpp"
#include "coqharness/eval/classifier.hpp"

namespace coqharness::eval {

double ConfigMetrics::refusal_share() const {
  if (n_attempts == 0) return 0.0;
  auto it = taxonomy.find(ErrorCategory::kRefusal);
  const std::size_t refusals = it == taxonomy.end() ? 0 : it->second;
  return 100.0 * static_cast<double>(refusals) / static_cast<double>(n_attempts);
}

ConfigMetrics compute_metrics(const std::vector<agent::AttemptRecord>& attempts) {
  ConfigMetrics m;
  for (auto c : agent::all_error_categories()) m.taxonomy[c] = 0;
  std::set<std::pair<std::string, std::string>> distinct;
  for (const auto& a : attempts) {
    ++m.n_attempts;
    ++m.taxonomy[a.category ? *a.category : classify_failure(a)];
    if (a.missed_simple) ++m.n_missed_simple;
    if (!a.accepted) continue;
    ++m.n_raw_accepted;
    distinct.emplace(a.theorem_id, a.proof_script);
    m.proven_ids.insert(a.theorem_id);
  }
  m.n_correct_proofs = distinct.size();
  m.n_proven_theorems = m.proven_ids.size();
  return m;
}

std::size_t EvalReport::coincidence_at(const std::string& a, const std::string& b) const {
  auto it = coincidence.find({a, b});
  if (it == coincidence.end()) throw HarnessError(ErrorCode::kUnknownId, "no coincidence entry for " + a + "/" + b);
  return it->second;
}

const ConfigMetrics& EvalReport::metrics(const std::string& tag) const {
  auto it = per_config.find(tag);
  if (it == per_config.end()) throw HarnessError(ErrorCode::kUnknownId, "unknown config tag: " + tag);
  return it->second;
}

EvalReport aggregate(const std::vector<std::string>& config_order, const AttemptsByConfig& attempts,
                     std::size_t n_test_theorems, std::string manifest_hash,
                     std::string corpus_hash) {
  EvalReport report;
  report.config_order = config_order;
  report.n_test_theorems = n_test_theorems;
  report.manifest_hash = std::move(manifest_hash);
  report.corpus_hash = std::move(corpus_hash);
  static const std::vector<agent::AttemptRecord> kNone;
  for (const auto& tag : config_order) {
    auto it = attempts.find(tag);
    report.per_config[tag] = compute_metrics(it == attempts.end() ? kNone : it->second);
  }
  for (const auto& a : config_order) {
    for (const auto& b : config_order) {
      const auto& pa = report.per_config[a].proven_ids;
      const auto& pb = report.per_config[b].proven_ids;
      std::size_t n = 0;
      for (const auto& id : pa) n += pb.count(id);
      report.coincidence[{a, b}] = n;
    }
  }
  return report;
}

EvalRun run_eval(const corpus::Corpus& corpus, const std::vector<agent::RunConfig>& manifest,
                 agent::AgentDeps deps, std::size_t workers) {
  if (manifest.empty()) throw SchemaViolation(0, "manifest has no configs");
  std::vector<std::string> order;
  for (const auto& c : manifest) {
    c.validate();
    auto tag = c.effective_tag();
    if (std::find(order.begin(), order.end(), tag) != order.end()) {
      throw SchemaViolation(0, "duplicate config tag " + tag);
    }
    order.push_back(std::move(tag));
  }
  const auto targets = corpus.with_label(corpus::SplitLabel::kTest);
  if (targets.empty()) throw HarnessError(ErrorCode::kTooFewRecords, "corpus has no test split");

  deps.corpus = &corpus;
  EvalRun run;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    auto config = manifest[i];
    config.tag = order[i];
    run.attempts[order[i]] = agent::prove_all(targets, config, deps, workers);
  }
  run.report = aggregate(order, run.attempts, targets.size(), agent::manifest_hash(manifest),
                         corpus::corpus_hash(corpus));
  run.report.effective_config["configs"] = agent::manifest_to_json(manifest)["configs"];
  return run;
}

}  // namespace coqharness::eval

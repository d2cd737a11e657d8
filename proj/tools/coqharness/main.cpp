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

// coqharness: corpus extraction, retrieval, proving and evaluation.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "cli_config.hpp"
#include "coqharness/agent/agent.hpp"
#include "coqharness/common/error.hpp"
#include "coqharness/corpus/corpus.hpp"
#include "coqharness/eval/classifier.hpp"
#include "coqharness/eval/evaluation.hpp"
#include "coqharness/eval/report.hpp"
#include "coqharness/model/cache.hpp"
#include "coqharness/model/http_provider.hpp"
#include "coqharness/model/scripted_provider.hpp"
#include "coqharness/prompting/templates.hpp"
#include "coqharness/retriever/embedding.hpp"
#include "coqharness/retriever/index.hpp"

namespace fs = std::filesystem;
using namespace coqharness;
using nlohmann::json;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kProvider = 3, kProverUnavailable = 4 };

bool g_verbose = false;

void info(const std::string& msg) { std::cerr << "coqharness: " << msg << "\n"; }
void debug(const std::string& msg) {
  if (g_verbose) info(msg);
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kProviderError:
    case ErrorCode::kBudgetExceeded:
    case ErrorCode::kCacheMiss:
      return kProvider;
    case ErrorCode::kSpawnFailure:
    case ErrorCode::kSessionDead:
      return kProverUnavailable;
    case ErrorCode::kConfigError:
    case ErrorCode::kConfigMismatch:
    case ErrorCode::kSchemaViolation:
    case ErrorCode::kUnknownStrategy:
    case ErrorCode::kTemplateError:
    case ErrorCode::kScriptParseError:
    case ErrorCode::kUnknownId:
    case ErrorCode::kNoSourcesFound:
    case ErrorCode::kTooFewRecords:
    case ErrorCode::kEmptyTrainSet:
    case ErrorCode::kTooFewConfigs:
      return kConfig;
    default:
      return kFailure;
  }
}

[[noreturn]] void config_error(const std::string& msg) {
  throw HarnessError(ErrorCode::kConfigError, msg);
}

void require_file(const fs::path& p, const std::string& what) {
  if (!fs::exists(p)) config_error(what + " not found: " + p.string());
}

// Options every subcommand shares.
struct Shared {
  std::string config_file;
  std::string corpus;
  std::string output;
  std::string cache;
  std::string templates;
  std::string patterns;
  std::string script;
  std::string mock_table;
  std::string index;
  std::string embedding;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<int> n;
  std::optional<double> temperature;
};

void add_shared(CLI::App* cmd, Shared& s) {
  cmd->add_option("-c,--config", s.config_file, "INI config file");
  cmd->add_option("--corpus", s.corpus, "corpus JSONL file");
  cmd->add_option("-o,--out", s.output, "output file or directory");
  cmd->add_flag("-v,--verbose", g_verbose, "log progress to stderr");
}

void add_run_options(CLI::App* cmd, Shared& s) {
  cmd->add_option("--cache", s.cache, "transcript cache directory");
  cmd->add_option("--templates", s.templates, "prompt template file");
  cmd->add_option("--patterns", s.patterns, "failure pattern file");
  cmd->add_option("--script", s.script, "scripted provider file (provider kind scripted)");
  cmd->add_option("--mock-table", s.mock_table, "mock prover behaviour table");
  cmd->add_option("--index", s.index, "retrieval index file");
  cmd->add_option("--embedding", s.embedding, "trained embedding file");
  cmd->add_option("--seed", s.seed, "run seed");
  cmd->add_option("--workers", s.workers, "parallel workers")->check(CLI::PositiveNumber);
  cmd->add_option("-n,--samples", s.n, "completions per prompt")->check(CLI::PositiveNumber);
  cmd->add_option("--temperature", s.temperature, "sampling temperature");
}

// File config first, then flags on top.
cli::CliConfig resolve(const Shared& s) {
  cli::CliConfig c;
  if (!s.config_file.empty()) {
    require_file(s.config_file, "config file");
    c = cli::load_cli_config(s.config_file);
  }
  if (!s.corpus.empty()) c.corpus = s.corpus;
  if (!s.cache.empty()) c.cache = s.cache;
  if (!s.templates.empty()) c.templates = s.templates;
  if (!s.patterns.empty()) c.patterns = s.patterns;
  if (!s.script.empty()) {
    c.script = s.script;
    c.provider_kind = "scripted";
  }
  if (!s.mock_table.empty()) c.mock_table = s.mock_table;
  if (!s.index.empty()) c.index = s.index;
  if (!s.embedding.empty()) c.embedding = s.embedding;
  if (s.seed) c.seed = *s.seed;
  if (s.workers) c.workers = *s.workers;
  if (s.n) c.decoding.n = *s.n;
  if (s.temperature) c.decoding.temperature = *s.temperature;
  c.validate();
  return c;
}

// Everything an agent run borrows, owned in one place.
struct Runtime {
  cli::CliConfig cfg;
  corpus::Corpus corpus;
  prompting::TemplateSet templates;
  eval::FailureClassifier classifier;
  std::optional<retriever::Index> index;
  std::optional<retriever::EmbeddingModel> embedding;
  std::unique_ptr<retriever::LinearEmbedder> embedder;
  std::unique_ptr<retriever::EmbeddedIndex> embedded;
  std::unique_ptr<model::Provider> inner;
  std::unique_ptr<model::TranscriptCache> cache;
  std::unique_ptr<model::Provider> caching;
  agent::SessionFactory sessions;

  agent::AgentDeps deps() const {
    agent::AgentDeps d;
    d.corpus = &corpus;
    d.index = index ? &*index : nullptr;
    d.embedded = embedded.get();
    d.provider = caching ? caching.get() : inner.get();
    d.sessions = sessions;
    d.templates = &templates;
    d.classifier = &classifier;
    return d;
  }
};

std::unique_ptr<Runtime> make_runtime(const cli::CliConfig& cfg, bool replay) {
  auto rt = std::make_unique<Runtime>();
  rt->cfg = cfg;
  require_file(cfg.corpus, "corpus");
  rt->corpus = corpus::load_corpus(cfg.corpus);
  rt->templates = cfg.templates.empty() ? prompting::TemplateSet::defaults()
                                        : prompting::TemplateSet::load(cfg.templates);
  rt->classifier = cfg.patterns.empty() ? eval::FailureClassifier::defaults()
                                        : eval::FailureClassifier::load(cfg.patterns);

  const auto train = rt->corpus.with_label(corpus::SplitLabel::kTrain);
  if (fs::exists(cfg.index)) {
    rt->index = retriever::Index::load(cfg.index);
    debug("loaded index " + cfg.index.string());
  } else if (!train.empty()) {
    rt->index = retriever::Index::build(train);
    debug("no index file; built a proof-text index over " + std::to_string(train.size()) + " records");
  }
  if (!cfg.embedding.empty()) {
    require_file(cfg.embedding, "embedding");
    if (!rt->index) config_error("an embedding needs a retrieval index");
    rt->embedding = retriever::EmbeddingModel::load(cfg.embedding);
    rt->embedder = std::make_unique<retriever::LinearEmbedder>(*rt->embedding);
    rt->embedded = std::make_unique<retriever::EmbeddedIndex>(*rt->index, *rt->embedder);
  }

  // In replay mode the scripted provider is still loaded: it is never called,
  // but its cache scope is needed to find the stored transcripts.
  if (cfg.provider_kind == "scripted") {
    if (cfg.script.empty()) config_error("scripted provider needs --script or provider.script");
    require_file(cfg.script, "provider script");
    rt->inner = std::make_unique<model::ScriptedProvider>(model::ScriptedProvider::load(cfg.script));
  } else if (!replay) {
    rt->inner = std::make_unique<model::HttpChatProvider>(cfg.http);
  }
  if (replay && cfg.cache.empty()) config_error("--replay needs a cache directory");
  if (!cfg.cache.empty()) {
    rt->cache = std::make_unique<model::TranscriptCache>(cfg.cache);
    rt->caching = std::make_unique<model::CachingProvider>(rt->inner.get(), *rt->cache, replay);
  }

  const auto session = cli::session_config(cfg);
  if (session.backend == coq::Backend::kReal) {
    // Fail early, before any provider spend, when the toplevel is missing.
    coq::SessionConfig probe = session;
    probe.prelude.clear();
    coq::start_session(probe);
  }
  rt->sessions = agent::make_session_factory(session);
  return rt;
}

// Manifest keys the file omits are taken from the CLI defaults.
std::vector<agent::RunConfig> load_manifest_with_defaults(const fs::path& path,
                                                          const cli::CliConfig& cfg) {
  require_file(path, "manifest");
  std::ifstream in(path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaViolation(0, path.string() + ": " + e.what());
  }
  if (doc.is_object() && doc.contains("configs") && doc["configs"].is_array()) {
    for (auto& c : doc["configs"]) {
      if (!c.is_object()) continue;
      if (!c.contains("decoding")) c["decoding"] = cfg.decoding.to_json();
      if (!c.contains("seed")) c["seed"] = cfg.seed;
      if (!c.contains("n_lemmas")) c["n_lemmas"] = cfg.n_lemmas;
      if (!c.contains("k_shots") && c.contains("mode")) {
        auto mode = prompting::parse_prompt_mode(c["mode"].get<std::string>());
        if (mode && prompting::is_few_shot(*mode)) c["k_shots"] = cfg.k_shots;
      }
    }
  }
  return agent::parse_manifest(doc);
}

// ---- ingest ---------------------------------------------------------------

struct IngestArgs {
  std::string root;
  std::string split = "by_index";
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
  std::string test_ids;
  std::vector<std::string> exclude;
  bool no_subdirs = false;
};

int cmd_ingest(const Shared& s, const IngestArgs& a) {
  if (!fs::exists(a.root)) config_error("no such path: " + a.root);
  auto policy = corpus::parse_split_policy(a.split);
  if (!policy) config_error("unknown split policy: " + a.split);
  corpus::IngestOptions opts;
  opts.follow_subdirs = !a.no_subdirs;
  opts.exclude_globs = a.exclude;
  auto raw = corpus::ingest_project(a.root, opts);
  for (const auto& w : raw.warnings) {
    debug(w.file + (w.offset ? ":" + std::to_string(*w.offset) : std::string()) + ": " + w.message);
  }
  corpus::SplitOptions split;
  split.policy = *policy;
  split.seed = s.seed.value_or(a.seed);
  split.test_fraction = a.test_fraction;
  if (!a.test_ids.empty()) {
    require_file(a.test_ids, "test id list");
    std::ifstream in(a.test_ids);
    for (std::string line; std::getline(in, line);) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty() && line.front() != '#') split.test_ids.push_back(line);
    }
  }
  auto c = corpus::split_corpus(raw, split);
  const fs::path out = s.output.empty() ? fs::path("corpus.jsonl") : fs::path(s.output);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  corpus::save_corpus(c, out);
  std::cout << "records " << c.records.size() << " train "
            << c.with_label(corpus::SplitLabel::kTrain).size() << " test "
            << c.with_label(corpus::SplitLabel::kTest).size() << " excluded "
            << c.with_label(corpus::SplitLabel::kExcluded).size() << " warnings "
            << c.warnings.size() << "\n";
  info("wrote " + out.string());
  return kOk;
}

// ---- index ----------------------------------------------------------------

struct IndexArgs {
  std::string space = "proof_text";
  std::size_t dim = retriever::kDefaultFeatureDim;
  bool train = false;
  std::string embedding_out;
  retriever::EmbeddingHyper hyper;
};

int cmd_index(const Shared& s, IndexArgs a) {
  const auto cfg = resolve(s);
  require_file(cfg.corpus, "corpus");
  const auto c = corpus::load_corpus(cfg.corpus);
  auto space = retriever::parse_index_space(a.space);
  if (!space) config_error("unknown index space: " + a.space);
  const auto train = c.with_label(corpus::SplitLabel::kTrain);
  auto index = retriever::Index::build(train, *space, a.dim);
  const fs::path out = s.output.empty() ? cfg.index : fs::path(s.output);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  index.save(out);
  std::cout << "indexed " << index.size() << " records (" << retriever::index_space_name(*space)
            << ")\n";
  info("wrote " + out.string());
  if (a.train) {
    a.hyper.seed = cfg.seed;
    a.hyper.feature_dim = a.dim;
    retriever::TrainingSummary summary;
    auto model = retriever::train_embedding(train, a.hyper, &summary);
    std::cout << "initial objective " << summary.initial_objective << "\n"
              << "final objective " << summary.final_objective << " (best epoch "
              << summary.best_epoch << ")\n";
    fs::path eout = !a.embedding_out.empty() ? fs::path(a.embedding_out)
                    : !cfg.embedding.empty() ? cfg.embedding
                                             : out.parent_path() / "embedding.json";
    model.save(eout);
    info("wrote " + eout.string());
  }
  return kOk;
}

// ---- prove ----------------------------------------------------------------

struct ProveArgs {
  std::string theorem;
  std::string mode = "zs";
  std::string manifest;
  std::string tag;
  std::string loop;
  bool interactive = false;
  std::vector<std::string> strategies;
};

void print_transcript(const std::vector<agent::AttemptRecord>& records, std::ostream& out) {
  for (const auto& r : records) {
    out << "=== candidate " << r.candidate_index << " variant " << r.variant_id << " round "
        << r.round << "\n";
    for (const auto& t : r.turns) {
      for (const auto& m : t.prompt_delta) {
        out << "--- " << prompting::role_name(m.role) << "\n" << m.content << "\n";
      }
      out << "--- assistant\n" << t.completion << "\n";
      for (const auto& call : t.tool_calls) {
        out << "--- tool " << call.command << " " << call.argument
            << (call.rejected ? " (rejected)" : "") << "\n" << call.response << "\n";
      }
    }
  }
}

int cmd_prove(const Shared& s, const ProveArgs& a) {
  const auto cfg = resolve(s);
  auto rt = make_runtime(cfg, false);
  const auto* target = rt->corpus.find(a.theorem);
  if (!target) throw HarnessError(ErrorCode::kUnknownId, "unknown theorem id: " + a.theorem);

  agent::RunConfig run;
  if (!a.manifest.empty()) {
    auto manifest = load_manifest_with_defaults(a.manifest, cfg);
    auto it = std::find_if(manifest.begin(), manifest.end(), [&](const agent::RunConfig& c) {
      return a.tag.empty() || c.effective_tag() == a.tag;
    });
    if (it == manifest.end()) config_error("no config tagged " + a.tag + " in " + a.manifest);
    run = *it;
  } else {
    auto mode = prompting::parse_prompt_mode(a.mode);
    if (!mode) config_error("unknown mode: " + a.mode);
    run = agent::RunConfig::for_mode(*mode);
    if (prompting::is_few_shot(*mode)) run.k_shots = cfg.k_shots;
    run.n_lemmas = cfg.n_lemmas;
    run.decoding = cfg.decoding;
    run.seed = cfg.seed;
    if (!a.tag.empty()) run.tag = a.tag;
  }
  if (!a.loop.empty()) {
    auto loop = agent::parse_agent_loop(a.loop);
    if (!loop) config_error("unknown loop: " + a.loop);
    run.loop = *loop;
  }
  if (a.interactive) run.loop = agent::AgentLoop::kInteractive;
  for (const auto& st : a.strategies) run.strategies.push_back(prompting::parse_strategy(st));
  if (!run.strategies.empty() && a.loop.empty() && !a.interactive) run.loop = agent::AgentLoop::kEnsemble;
  run.validate();

  const auto records = agent::prove_theorem(*target, run, rt->deps());
  bool any = false;
  for (const auto& r : records) {
    any = any || r.accepted;
    std::cout << r.theorem_id << " " << r.variant_id << "#" << r.candidate_index;
    if (r.round > 0) std::cout << " round " << r.round;
    if (r.accepted) {
      std::cout << " ACCEPTED\n";
    } else {
      std::cout << " REJECTED ("
                << agent::error_category_name(r.category.value_or(agent::ErrorCategory::kOther))
                << ")";
      const auto msg = r.message();
      if (!msg.empty()) std::cout << ": " << msg.substr(0, msg.find('\n'));
      std::cout << "\n";
    }
  }
  std::cout << (any ? "ACCEPTED" : "NOT PROVEN") << " " << target->id << "\n\n";
  print_transcript(records, std::cout);
  if (!s.output.empty()) {
    std::ofstream out(s.output, std::ios::binary);
    if (!out) throw HarnessError(ErrorCode::kIoError, "cannot write " + s.output);
    out << agent::attempts_to_jsonl(records);
    info("wrote " + s.output);
  }
  return kOk;
}

// ---- eval / report ----------------------------------------------------------

std::set<eval::ReportFormat> parse_formats(const std::vector<std::string>& names) {
  std::set<eval::ReportFormat> out;
  for (const auto& n : names) {
    auto f = eval::parse_report_format(n);
    if (!f) config_error("unknown report format: " + n);
    out.insert(*f);
  }
  if (out.empty()) out = {eval::ReportFormat::kMarkdown, eval::ReportFormat::kCsv, eval::ReportFormat::kJson};
  return out;
}

struct EvalArgs {
  std::string manifest;
  bool replay = false;
  std::vector<std::string> formats;
};

int cmd_eval(const Shared& s, const EvalArgs& a) {
  const auto cfg = resolve(s);
  auto manifest = load_manifest_with_defaults(a.manifest, cfg);
  auto rt = make_runtime(cfg, a.replay);
  const fs::path out = s.output.empty() ? cfg.output : fs::path(s.output);
  debug("running " + std::to_string(manifest.size()) + " configs with " +
        std::to_string(cfg.workers) + " worker(s)");
  auto run = eval::run_eval(rt->corpus, manifest, rt->deps(), static_cast<std::size_t>(cfg.workers));
  run.report.effective_config["cli"] = cfg.to_json();
  eval::emit_report(run.report, out, parse_formats(a.formats));
  eval::write_attempts(run, out);
  for (const auto& tag : run.report.config_order) {
    const auto& m = run.report.metrics(tag);
    std::cout << tag << ": correct " << m.n_correct_proofs << " proven " << m.n_proven_theorems
              << "/" << run.report.n_test_theorems << " attempts " << m.n_attempts << "\n";
  }
  info("wrote report to " + out.string());
  return kOk;
}

struct ReportArgs {
  std::string attempts;
  bool taxonomy_only = false;
  std::vector<std::string> formats;
};

int cmd_report(const Shared& s, const ReportArgs& a) {
  if (!fs::is_directory(a.attempts)) config_error("no such attempts directory: " + a.attempts);
  auto report = eval::recompute_report(a.attempts);
  if (a.taxonomy_only) {
    std::cout << eval::render_taxonomy(report);
    return kOk;
  }
  fs::path out = s.output;
  if (out.empty()) {
    const fs::path dir = fs::path(a.attempts).lexically_normal();
    out = dir.filename().empty() ? dir.parent_path().parent_path() : dir.parent_path();
  }
  eval::emit_report(report, out, parse_formats(a.formats));
  info("wrote report to " + out.string());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coq proof-synthesis harness: ingest, index, prove, eval, report"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "help for every subcommand");

  Shared shared;

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "extract theorems from a Coq project and split them");
  add_shared(c_ingest, shared);
  c_ingest->add_option("root", ingest.root, "project root")->required();
  c_ingest->add_option("--split", ingest.split, "by_index | by_file | explicit");
  c_ingest->add_option("--test-fraction", ingest.test_fraction, "share of records for test");
  c_ingest->add_option("--seed", shared.seed, "split seed");
  c_ingest->add_option("--test-ids", ingest.test_ids, "file of test ids (explicit split)");
  c_ingest->add_option("--exclude", ingest.exclude, "glob of files to skip (repeatable)");
  c_ingest->add_flag("--no-subdirs", ingest.no_subdirs, "do not descend into subdirectories");

  IndexArgs index;
  auto* c_index = app.add_subcommand("index", "build the retrieval index, optionally train the embedding");
  add_shared(c_index, shared);
  c_index->add_option("--space", index.space, "proof_text | statement_text");
  c_index->add_option("--dim", index.dim, "hashed feature dimension")->check(CLI::PositiveNumber);
  c_index->add_option("--seed", shared.seed, "training seed");
  c_index->add_flag("--train-embedding", index.train, "train the triplet embedding");
  c_index->add_option("--embedding-out", index.embedding_out, "where to write the embedding");
  c_index->add_option("--epochs", index.hyper.epochs, "training epochs");
  c_index->add_option("--lr", index.hyper.learning_rate, "learning rate");
  c_index->add_option("--margin", index.hyper.margin, "triplet margin");
  c_index->add_option("--embed-dim", index.hyper.embed_dim, "embedding dimension");
  c_index->add_option("--batch-size", index.hyper.batch_size, "triples per step");

  ProveArgs prove;
  auto* c_prove = app.add_subcommand("prove", "prove one theorem and dump the transcript");
  add_shared(c_prove, shared);
  add_run_options(c_prove, shared);
  c_prove->add_option("theorem", prove.theorem, "theorem id (file:name)")->required();
  c_prove->add_option("--mode", prove.mode, "zs | fs-rand | fs-sim | zs+lem | fs+lem");
  c_prove->add_option("--manifest", prove.manifest, "take the run config from a manifest");
  c_prove->add_option("--tag", prove.tag, "config tag within the manifest");
  c_prove->add_option("--loop", prove.loop, "one_shot | interactive | repair | ensemble");
  c_prove->add_flag("--interactive", prove.interactive, "step through the proof with feedback");
  c_prove->add_option("--strategy", prove.strategies, "ensemble strategy (repeatable)");

  EvalArgs evala;
  auto* c_eval = app.add_subcommand("eval", "run every config of a manifest and write reports");
  add_shared(c_eval, shared);
  add_run_options(c_eval, shared);
  c_eval->add_option("manifest", evala.manifest, "manifest JSON")->required();
  c_eval->add_flag("--replay", evala.replay, "answer only from the cache; a miss is an error");
  c_eval->add_option("--format", evala.formats, "markdown | csv | json (repeatable)");

  ReportArgs report;
  auto* c_report = app.add_subcommand("report", "recompute reports from stored attempts");
  add_shared(c_report, shared);
  c_report->add_option("attempts", report.attempts, "attempts directory")->required();
  c_report->add_flag("--taxonomy-only", report.taxonomy_only, "print the failure histogram only");
  c_report->add_option("--format", report.formats, "markdown | csv | json (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*c_ingest) return cmd_ingest(shared, ingest);
    if (*c_index) return cmd_index(shared, index);
    if (*c_prove) return cmd_prove(shared, prove);
    if (*c_eval) return cmd_eval(shared, evala);
    if (*c_report) return cmd_report(shared, report);
  } catch (const HarnessError& e) {
    info(std::string(error_code_name(e.code())) + ": " + e.what());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    info(std::string("error: ") + e.what());
    return kFailure;
  }
  return kFailure;
}

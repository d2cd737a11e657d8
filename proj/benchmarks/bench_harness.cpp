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

#include <benchmark/benchmark.h>

#include <memory>
#include <random>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "coqharness/coq/mock_prover.hpp"
#include "coqharness/coq/sentence.hpp"
#include "coqharness/coq/session.hpp"
#include "coqharness/corpus/corpus.hpp"
#include "coqharness/retriever/embedding.hpp"
#include "coqharness/retriever/features.hpp"
#include "coqharness/retriever/index.hpp"

namespace {

using namespace coqharness;

std::string synthetic_source(int n) {
  std::ostringstream src;
  for (int i = 0; i < n; ++i) {
    src << "(* lemma " << i << ". with a (* nested *) comment *)\n"
        << "Lemma l" << i << ": forall x, P" << i << " (f x) \"s. t\".\nProof.\n  intros x.\n"
        << "  split.\n  - apply Mod.h" << i << ".\n  - { auto. }\nQed.\n\n";
  }
  return src.str();
}

corpus::Corpus synthetic_corpus(int n) {
  corpus::Corpus c;
  corpus::ingest_source("Bench.v", synthetic_source(n), c);
  for (const auto& r : c.records) c.split_labels[r.id] = corpus::SplitLabel::kTrain;
  return c;
}

void BM_SegmentSentences(benchmark::State& state) {
  const auto src = synthetic_source(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(coq::segment_sentences(src));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * src.size()));
}
BENCHMARK(BM_SegmentSentences)->Arg(10)->Arg(100)->Arg(1000);

void BM_Featurize(benchmark::State& state) {
  auto c = synthetic_corpus(200);
  auto train = c.with_label(corpus::SplitLabel::kTrain);
  auto index = retriever::Index::build(train);
  const auto text = train[0]->proof_text();
  for (auto _ : state) benchmark::DoNotOptimize(retriever::featurize(text, index.document_frequency()));
}
BENCHMARK(BM_Featurize);

void BM_Retrieve(benchmark::State& state) {
  auto c = synthetic_corpus(static_cast<int>(state.range(0)));
  auto train = c.with_label(corpus::SplitLabel::kTrain);
  auto index = retriever::Index::build(train);
  const auto query = train[train.size() / 2]->proof_text();
  for (auto _ : state) benchmark::DoNotOptimize(retriever::retrieve(index, query, 6));
}
BENCHMARK(BM_Retrieve)->Arg(100)->Arg(1000);

void BM_TripletGradient(benchmark::State& state) {
  retriever::EmbeddingHyper h;
  h.feature_dim = 1024;
  h.embed_dim = 64;
  auto model = retriever::EmbeddingModel::initialize(h, retriever::DocumentFrequency(h.feature_dim));
  std::mt19937_64 g(1);
  std::uniform_int_distribution<std::uint32_t> bucket(0, h.feature_dim - 1);
  auto sparse = [&] {
    std::vector<retriever::FeatureVector::Entry> e;
    for (int k = 0; k < 20; ++k) e.emplace_back(bucket(g), 1.0);
    return retriever::FeatureVector(h.feature_dim, e);
  };
  retriever::TripletBatch batch;
  for (std::size_t i = 0; i < static_cast<std::size_t>(state.range(0)); ++i) {
    batch.triples.push_back(retriever::Triple{sparse(), sparse(), sparse(), i, i + 1});
  }
  for (auto _ : state) benchmark::DoNotOptimize(retriever::batch_gradient(model, batch));
}
BENCHMARK(BM_TripletGradient)->Arg(16)->Arg(64);

void BM_MockCheckProof(benchmark::State& state) {
  coq::SessionConfig cfg;
  cfg.backend = coq::Backend::kMock;
  cfg.mock_table = std::make_shared<const coq::MockTable>(coq::MockTable::from_json(nlohmann::json::parse(
      R"({"version": 1, "theorems": {"t": {"accepted": [["intros x.", "split.", "auto.", "auto."]]}}})")));
  auto session = coq::start_session(cfg);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        coq::check_proof(*session, "Lemma t: forall x, P x /\\ Q x.", "Proof. intros x. split. auto. auto. Qed."));
  }
}
BENCHMARK(BM_MockCheckProof);

}  // namespace

BENCHMARK_MAIN();

// Copyright 2026 The atomlm Authors.
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

#include <string>
#include <vector>

#include "atomlm/entities.h"
#include "atomlm/synthetic.h"
#include "atomlm/tokenizer.h"
#include "atomlm/vocabulary.h"

namespace atomlm {
namespace {

const SyntheticWorld &World() {
  static const SyntheticWorld world = GenerateWorld(SyntheticOptions{});
  return world;
}

Vocabulary ExpandedVocab() {
  const SyntheticWorld &w = World();
  return AddEntityAtoms(BuildBaseVocab(w.corpus, 300), ToEntityInputs(w.entities))
      .vocab;
}

void BM_BuildBaseVocab(benchmark::State &state) {
  const auto &corpus = World().corpus;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        BuildBaseVocab(corpus, static_cast<size_t>(state.range(0))));
  }
}
BENCHMARK(BM_BuildBaseVocab)->Arg(150)->Arg(300)->Unit(benchmark::kMillisecond);

void BM_Tokenize(benchmark::State &state) {
  const Vocabulary vocab = ExpandedVocab();
  const auto &corpus = World().corpus;
  size_t tokens = 0;
  for (auto _ : state) {
    for (const std::string &s : corpus) tokens += Tokenize(s, vocab, true).size();
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * corpus.size()));
  benchmark::DoNotOptimize(tokens);
}
BENCHMARK(BM_Tokenize)->Unit(benchmark::kMillisecond);

void BM_FindEntities(benchmark::State &state) {
  const Vocabulary vocab = ExpandedVocab();
  const auto &corpus = World().corpus;
  for (auto _ : state) {
    for (const std::string &s : corpus) {
      benchmark::DoNotOptimize(FindEntities(s, vocab));
    }
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * corpus.size()));
}
BENCHMARK(BM_FindEntities)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace atomlm

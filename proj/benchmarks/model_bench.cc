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

#include <vector>

#include "atomlm/model.h"
#include "atomlm/recode.h"
#include "atomlm/tokenizer.h"

namespace atomlm {
namespace {

ModelConfig BenchConfig(int hidden, int vocab) {
  ModelConfig c;
  c.hidden = hidden;
  c.layers = 2;
  c.heads = 4;
  c.ff_width = 2 * hidden;
  c.max_seq_len = 64;
  c.vocab_size = vocab;
  c.seed = 1;
  return c;
}

TokenSequence BenchSequence(int length, int vocab) {
  TokenSequence seq;
  for (int i = 0; i < length; ++i) {
    seq.ids.push_back(i % 7 == 3 ? kMaskId
                                 : kNumSpecialTokens + (i * 37) % (vocab - kNumSpecialTokens));
  }
  seq.RecomputeMaskPositions();
  return seq;
}

std::vector<MaskTarget> Targets(const TokenSequence &seq) {
  std::vector<MaskTarget> out;
  for (size_t p : seq.mask_positions) out.push_back({p, kNumSpecialTokens});
  return out;
}

void BM_ForwardLogits(benchmark::State &state) {
  const int hidden = static_cast<int>(state.range(0));
  const int length = static_cast<int>(state.range(1));
  const MlmModel model = InitModel<float>(BenchConfig(hidden, 400));
  const TokenSequence seq = BenchSequence(length, 400);
  for (auto _ : state) benchmark::DoNotOptimize(ForwardLogits(model, seq));
}
BENCHMARK(BM_ForwardLogits)->Args({64, 16})->Args({64, 48})->Args({128, 48});

void BM_LossAndGradient(benchmark::State &state) {
  const int hidden = static_cast<int>(state.range(0));
  const int length = static_cast<int>(state.range(1));
  const MlmModel model = InitModel<float>(BenchConfig(hidden, 400));
  const TokenSequence seq = BenchSequence(length, 400);
  const auto targets = Targets(seq);
  ModelParams<float> grad = model.params.ZerosLike();
  for (auto _ : state) {
    benchmark::DoNotOptimize(LossAndGradient<float>(model, seq, targets, 1.0f, &grad));
  }
}
BENCHMARK(BM_LossAndGradient)->Args({64, 16})->Args({64, 48})->Args({128, 48});

void BM_ExpandModel(benchmark::State &state) {
  const int old_v = 400;
  const MlmModel model = InitModel<float>(BenchConfig(64, old_v));
  RecodePlan plan;
  for (int a = 0; a < state.range(0); ++a) {
    RecodeEntry e;
    e.atom_id = old_v + a;
    for (int k = 0; k < 3; ++k) {
      e.constituents.push_back(kNumSpecialTokens + (a * 13 + k * 7) % (old_v - kNumSpecialTokens));
    }
    plan.entries.push_back(std::move(e));
  }
  for (auto _ : state) benchmark::DoNotOptimize(ExpandModel(model, plan));
}
BENCHMARK(BM_ExpandModel)->Arg(50)->Arg(1000)->Unit(benchmark::kMicrosecond);

}  // namespace
}  // namespace atomlm

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

#include "atomlm/trainer.h"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "atomlm/checkpoint.h"
#include "atomlm/util.h"
#include "test_fixtures.h"

namespace atomlm {
namespace {

namespace fs = std::filesystem;
using testing_fixtures::FixtureVocab;
using testing_fixtures::TinyConfig;

std::vector<MaskedInstance> CanadaInstance(const Vocabulary &v) {
  TemplateSet t = ParseTemplates(
      "{\"CountryBordersCountry\": \"{subject} shares borders with {mask}.\"}");
  std::vector<TripleSample> samples = {
      {"Canada", "CountryBordersCountry", {"Greenland"}, {}}};
  return MakeFinetuneInstances(samples, t, v);
}

TrainConfig OverfitConfig() {
  TrainConfig c = TrainConfig::DefaultFinetune();
  c.learning_rate = 1e-2;
  c.epochs = 200;
  c.batch_size = 1;
  c.seed = 1;
  return c;
}

TEST(TrainConfig, RejectsZeroEpochs) {
  TrainConfig c;
  c.epochs = 0;
  EXPECT_THROW(c.Validate(), Error);
  Vocabulary v = FixtureVocab();
  MlmModel m = InitModel<float>(TinyConfig(static_cast<int>(v.size())));
  auto inst = CanadaInstance(v);
  EXPECT_THROW(Train(m, inst, c), Error);
}

TEST(TrainConfig, Presets) {
  TrainConfig p = TrainConfig::Preset("paper-pretrain");
  EXPECT_EQ(p.learning_rate, 2e-5);
  EXPECT_EQ(p.epochs, 20);
  TrainConfig f = TrainConfig::Preset("paper-finetune");
  EXPECT_EQ(f.epochs, 5);
  EXPECT_FALSE(f.grad_clip.has_value());
  EXPECT_THROW(TrainConfig::Preset("fast"), Error);
}

TEST(Train, OverfitsSingleInstance) {
  Vocabulary v = FixtureVocab();
  MlmModel m = InitModel<float>(TinyConfig(static_cast<int>(v.size())));
  auto inst = CanadaInstance(v);
  const double initial = EvaluateMlm(m, inst);
  TrainResult r = Train(m, inst, OverfitConfig());
  ASSERT_EQ(r.history.size(), 200u);
  const double final_loss = EvaluateMlm(r.model, inst);
  EXPECT_LT(final_loss, 0.1 * initial);
  EXPECT_LT(final_loss, 0.1);
}

TEST(Train, SameSeedSameHistory) {
  Vocabulary v = FixtureVocab();
  MlmModel m = InitModel<float>(TinyConfig(static_cast<int>(v.size())));
  auto corpus = testing_fixtures::FixtureCorpus();
  auto inst = MakePretrainInstances(corpus, v, PretrainMasking{});
  TrainConfig c = TrainConfig::DefaultPretrain();
  c.learning_rate = 1e-3;
  c.epochs = 3;
  c.batch_size = 2;
  c.seed = 4;
  TrainResult a = Train(m, inst, c), b = Train(m, inst, c);
  EXPECT_EQ(a.history, b.history);
  EXPECT_EQ(ModelChecksum(a.model), ModelChecksum(b.model));
}

TEST(Train, InstanceSourceSeesEveryEpoch) {
  Vocabulary v = FixtureVocab();
  MlmModel m = InitModel<float>(TinyConfig(static_cast<int>(v.size())));
  auto corpus = testing_fixtures::FixtureCorpus();
  std::vector<int> epochs;
  InstanceSource source = [&](int epoch) {
    epochs.push_back(epoch);
    PretrainMasking opts;
    opts.seed = static_cast<uint64_t>(epoch);
    return MakePretrainInstances(corpus, v, opts);
  };
  TrainConfig c = TrainConfig::DefaultPretrain();
  c.epochs = 3;
  Train(m, source, c);
  EXPECT_EQ(epochs, (std::vector<int>{1, 2, 3}));
}

TEST(Train, DivergenceIsReported) {
  Vocabulary v = FixtureVocab();
  MlmModel m = InitModel<float>(TinyConfig(static_cast<int>(v.size())));
  m.params.output_bias(0, 7) = std::numeric_limits<float>::infinity();
  auto inst = CanadaInstance(v);
  TrainConfig c = OverfitConfig();
  c.epochs = 1;
  EXPECT_THROW(Train(m, inst, c), TrainingDiverged);
}

TEST(Train, OutOfRangeIdsAreRejected) {
  Vocabulary v = FixtureVocab();
  // Greenland appears only as a target; a model without its row must refuse.
  MlmModel m = InitModel<float>(TinyConfig(*v.FindEntity("Greenland")));
  EXPECT_THROW(Train(m, CanadaInstance(v), OverfitConfig()), Error);
}

TEST(Train, WritesCheckpoint) {
  Vocabulary v = FixtureVocab();
  MlmModel m = InitModel<float>(TinyConfig(static_cast<int>(v.size())));
  TrainConfig c = OverfitConfig();
  c.epochs = 2;
  c.checkpoint_dir = fs::path(testing::TempDir()) / "train_ckpt";
  fs::remove_all(*c.checkpoint_dir);
  TrainResult r = Train(m, CanadaInstance(v), c);
  EXPECT_EQ(ModelChecksum(LoadCheckpoint(*c.checkpoint_dir)), ModelChecksum(r.model));
}

TEST(EvaluateMlm, UntrainedLossNearLogV) {
  Vocabulary v = FixtureVocab();
  auto corpus = testing_fixtures::FixtureCorpus();
  auto inst = MakePretrainInstances(corpus, v, PretrainMasking{});
  for (uint64_t seed : {1, 2, 3}) {
    MlmModel m = InitModel<float>(TinyConfig(static_cast<int>(v.size()), seed));
    const double loss = EvaluateMlm(m, inst);
    const double ln_v = std::log(static_cast<double>(v.size()));
    EXPECT_NEAR(loss, ln_v, 0.15 * ln_v) << "seed " << seed;
    EXPECT_EQ(loss, EvaluateMlm(m, inst));
  }
}

TEST(LossHistoryCsv, Format) {
  std::vector<EpochLoss> h = {{1, 2.5}, {2, 1.25}};
  EXPECT_EQ(LossHistoryCsv(h, "train"), "epoch,split,loss\n1,train,2.5\n2,train,1.25\n");
}

}  // namespace
}  // namespace atomlm

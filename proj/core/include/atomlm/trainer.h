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

#ifndef ATOMLM_TRAINER_H_
#define ATOMLM_TRAINER_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "atomlm/corpus.h"
#include "atomlm/model.h"
#include "atomlm/util.h"

namespace atomlm {

enum class TrainRegime { kPretrain, kFineTune };

struct TrainConfig {
  double learning_rate = 2e-5;
  int epochs = 20;
  int batch_size = 16;
  uint64_t seed = 0;
  TrainRegime regime = TrainRegime::kPretrain;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // Global gradient-norm clip; unset disables clipping.
  std::optional<double> grad_clip = 1.0;
  // Final checkpoint location, and whether to also write one per epoch.
  std::optional<std::filesystem::path> checkpoint_dir;
  bool checkpoint_every_epoch = false;

  void Validate() const;

  // lr 2e-5 with 20 pretraining epochs, or 5 fine-tuning epochs.
  static TrainConfig DefaultPretrain();
  static TrainConfig DefaultFinetune();
  // Looks up "paper-pretrain" / "paper-finetune".
  static TrainConfig Preset(std::string_view name);
};

struct EpochLoss {
  int epoch = 0;
  double loss = 0.0;
  bool operator==(const EpochLoss &) const = default;
};

struct TrainResult {
  MlmModel model;
  std::vector<EpochLoss> history;
};

// Raised when a loss or parameter goes non-finite. The last per-epoch
// checkpoint, if any, stays on disk.
class TrainingDiverged : public Error {
 public:
  using Error::Error;
};

using EpochCallback = std::function<void(const EpochLoss &)>;

// Adam without warmup or decay. The shuffle order and the reduction order are
// fixed by the seed, so equal inputs give bit-identical results.
TrainResult Train(const MlmModel &model,
                  std::span<const MaskedInstance> instances,
                  const TrainConfig &config,
                  const EpochCallback &on_epoch = nullptr);

// Training data for one epoch (1-based), e.g. freshly masked sentences.
using InstanceSource = std::function<std::vector<MaskedInstance>(int epoch)>;

TrainResult Train(const MlmModel &model, const InstanceSource &source,
                  const TrainConfig &config,
                  const EpochCallback &on_epoch = nullptr);

// Mean per-instance loss; no parameters change.
double EvaluateMlm(const MlmModel &model,
                   std::span<const MaskedInstance> instances);

// "epoch,split,loss" rows.
std::string LossHistoryCsv(std::span<const EpochLoss> history,
                           std::string_view split);

}  // namespace atomlm

#endif  // ATOMLM_TRAINER_H_

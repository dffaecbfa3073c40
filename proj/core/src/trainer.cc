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

#include <cmath>
#include <numeric>

#include "atomlm/checkpoint.h"
#include "atomlm/util.h"

namespace atomlm {

void TrainConfig::Validate() const {
  if (!(learning_rate > 0.0)) throw Error("learning_rate must be positive");
  if (epochs < 1) throw Error("epochs must be at least 1");
  if (batch_size < 1) throw Error("batch_size must be at least 1");
  if (grad_clip && !(*grad_clip > 0.0)) throw Error("grad_clip must be positive");
}

TrainConfig TrainConfig::DefaultPretrain() {
  TrainConfig c;
  c.learning_rate = 2e-5;
  c.epochs = 20;
  c.regime = TrainRegime::kPretrain;
  c.grad_clip = 1.0;
  return c;
}

TrainConfig TrainConfig::DefaultFinetune() {
  TrainConfig c;
  c.learning_rate = 2e-5;
  c.epochs = 5;
  c.regime = TrainRegime::kFineTune;
  c.grad_clip = std::nullopt;
  return c;
}

TrainConfig TrainConfig::Preset(std::string_view name) {
  if (name == "paper-pretrain") return DefaultPretrain();
  if (name == "paper-finetune") return DefaultFinetune();
  throw Error("unknown training preset: " + std::string(name));
}

namespace {

class Adam {
 public:
  Adam(const ModelParams<float> &shape, const TrainConfig &config)
      : first_(shape.ZerosLike()), second_(shape.ZerosLike()), config_(config) {}

  void Step(ModelParams<float> *params, const ModelParams<float> &grad) {
    ++step_;
    const double bc1 = 1.0 - std::pow(config_.beta1, step_);
    const double bc2 = 1.0 - std::pow(config_.beta2, step_);
    const auto lr = static_cast<float>(config_.learning_rate);
    const auto b1 = static_cast<float>(config_.beta1);
    const auto b2 = static_cast<float>(config_.beta2);
    const auto eps = static_cast<float>(config_.epsilon);
    const auto inv_bc1 = static_cast<float>(1.0 / bc1);
    const auto inv_bc2 = static_cast<float>(1.0 / bc2);

    std::vector<Matrix<float> *> p, m, v;
    std::vector<const Matrix<float> *> g;
    params->ForEach([&](const std::string &, Matrix<float> &t) { p.push_back(&t); });
    first_.ForEach([&](const std::string &, Matrix<float> &t) { m.push_back(&t); });
    second_.ForEach([&](const std::string &, Matrix<float> &t) { v.push_back(&t); });
    grad.ForEach([&](const std::string &, const Matrix<float> &t) { g.push_back(&t); });
    for (size_t i = 0; i < p.size(); ++i) {
      auto gi = g[i]->array();
      m[i]->array() = b1 * m[i]->array() + (1.0f - b1) * gi;
      v[i]->array() = b2 * v[i]->array() + (1.0f - b2) * gi.square();
      p[i]->array() -= lr * (m[i]->array() * inv_bc1) /
                       ((v[i]->array() * inv_bc2).sqrt() + eps);
    }
  }

 private:
  ModelParams<float> first_;
  ModelParams<float> second_;
  const TrainConfig &config_;
  int step_ = 0;
};

double GradNorm(const ModelParams<float> &grad) {
  double sum = 0.0;
  grad.ForEach([&](const std::string &, const Matrix<float> &t) {
    sum += t.cast<double>().squaredNorm();
  });
  return std::sqrt(sum);
}

void ScaleGrad(ModelParams<float> *grad, float factor) {
  grad->ForEach([&](const std::string &, Matrix<float> &t) { t *= factor; });
}

}  // namespace

namespace {

void CheckIds(const MlmModel &model, std::span<const MaskedInstance> instances) {
  if (instances.empty()) throw Error("no training instances");
  for (const MaskedInstance &inst : instances) {
    for (TokenId id : inst.input.ids) {
      if (id < 0 || id >= model.config.vocab_size) {
        throw Error("instance id out of range for model vocabulary");
      }
    }
    for (const MaskTarget &t : inst.targets) {
      if (t.id < 0 || t.id >= model.config.vocab_size ||
          t.position >= inst.input.ids.size()) {
        throw Error("instance target out of range");
      }
    }
  }
}

std::string DivergenceAt(int epoch, size_t batch) {
  return "divergence at epoch " + std::to_string(epoch) + " batch " +
         std::to_string(batch);
}

using EpochData = std::function<std::span<const MaskedInstance>(int epoch)>;

TrainResult RunTraining(const MlmModel &model, const EpochData &data,
                        const TrainConfig &config, const EpochCallback &on_epoch) {
  TrainResult result{model, {}};
  MlmModel &current = result.model;
  Adam adam(current.params, config);
  ModelParams<float> grad = current.params.ZerosLike();
  Rng rng(DeriveSeed(config.seed, "train-shuffle"));
  std::vector<size_t> order;
  const size_t batch = static_cast<size_t>(config.batch_size);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::span<const MaskedInstance> instances = data(epoch);
    CheckIds(current, instances);
    if (order.size() != instances.size()) {
      order.resize(instances.size());
      std::iota(order.begin(), order.end(), 0);
    }
    rng.Shuffle(order.begin(), order.end());
    double epoch_loss = 0.0;
    size_t batch_index = 0;
    for (size_t start = 0; start < order.size(); start += batch, ++batch_index) {
      const size_t end = std::min(order.size(), start + batch);
      const auto weight = 1.0f / static_cast<float>(end - start);
      grad.ForEach([](const std::string &, Matrix<float> &t) { t.setZero(); });
      for (size_t k = start; k < end; ++k) {
        const MaskedInstance &inst = instances[order[k]];
        float loss = LossAndGradient<float>(current, inst.input, inst.targets,
                                            weight, &grad);
        if (!std::isfinite(loss)) {
          throw TrainingDiverged(DivergenceAt(epoch, batch_index));
        }
        epoch_loss += loss;
      }
      if (config.grad_clip) {
        double norm = GradNorm(grad);
        if (!std::isfinite(norm)) {
          throw TrainingDiverged(DivergenceAt(epoch, batch_index));
        }
        if (norm > *config.grad_clip) {
          ScaleGrad(&grad, static_cast<float>(*config.grad_clip / norm));
        }
      }
      adam.Step(&current.params, grad);
      if (!AllFinite(current.params)) {
        throw TrainingDiverged(DivergenceAt(epoch, batch_index));
      }
    }
    EpochLoss record{epoch, epoch_loss / static_cast<double>(order.size())};
    result.history.push_back(record);
    if (on_epoch) on_epoch(record);
    if (config.checkpoint_dir && config.checkpoint_every_epoch) {
      SaveCheckpoint(current, *config.checkpoint_dir);
    }
  }
  if (config.checkpoint_dir) SaveCheckpoint(current, *config.checkpoint_dir);
  return result;
}

}  // namespace

TrainResult Train(const MlmModel &model,
                  std::span<const MaskedInstance> instances,
                  const TrainConfig &config, const EpochCallback &on_epoch) {
  config.Validate();
  CheckIds(model, instances);
  return RunTraining(
      model, [&](int) { return instances; }, config, on_epoch);
}

TrainResult Train(const MlmModel &model, const InstanceSource &source,
                  const TrainConfig &config, const EpochCallback &on_epoch) {
  config.Validate();
  std::vector<MaskedInstance> current;
  return RunTraining(
      model,
      [&](int epoch) {
        current = source(epoch);
        return std::span<const MaskedInstance>(current);
      },
      config, on_epoch);
}

double EvaluateMlm(const MlmModel &model,
                   std::span<const MaskedInstance> instances) {
  if (instances.empty()) throw Error("no instances to evaluate");
  double total = 0.0;
  for (const MaskedInstance &inst : instances) {
    total += MlmLoss<float>(model, inst.input,
                            std::span<const MaskTarget>(inst.targets));
  }
  return total / static_cast<double>(instances.size());
}

std::string LossHistoryCsv(std::span<const EpochLoss> history,
                           std::string_view split) {
  std::string out = "epoch,split,loss\n";
  char buf[64];
  for (const EpochLoss &e : history) {
    std::snprintf(buf, sizeof(buf), "%.9g", e.loss);
    out += std::to_string(e.epoch) + "," + std::string(split) + "," + buf + "\n";
  }
  return out;
}

}  // namespace atomlm

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

#ifndef ATOMLM_PIPELINE_H_
#define ATOMLM_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "atomlm/evaluation.h"
#include "atomlm/inference.h"
#include "atomlm/kg_client.h"
#include "atomlm/model.h"
#include "atomlm/trainer.h"

namespace atomlm {

// User-supplied inputs. Relative paths in a config file are taken relative
// to the file's directory.
struct PipelinePaths {
  std::filesystem::path corpus;
  std::filesystem::path train;
  std::filesystem::path validation;
  std::filesystem::path test;
  std::filesystem::path schema;
  std::filesystem::path templates;
  std::optional<std::filesystem::path> kg_dump;
};

struct PipelineConfig {
  PipelinePaths paths;
  std::filesystem::path out_dir = "run";
  uint64_t seed = 0;

  size_t base_vocab_size = 400;
  size_t min_entity_count = 1;
  ModelConfig model;

  // Base-vocabulary pretraining on the full corpus, then re-pretraining of
  // the expanded model on the filtered corpus.
  TrainConfig base_pretrain = TrainConfig::DefaultPretrain();
  TrainConfig pretrain = TrainConfig::DefaultPretrain();
  TrainConfig finetune = TrainConfig::DefaultFinetune();
  double mask_rate = 0.15;
  bool entity_mask_boost = false;
  // Draw fresh mask positions every epoch instead of once.
  bool dynamic_masking = true;

  PredictOptions predict;
  std::vector<double> grid = DefaultThresholdGrid();
  bool match_on_id = false;

  // Ablations: recode=false seeds new rows with random unit vectors;
  // re_pretrain=false fine-tunes the expanded model directly.
  bool recode = true;
  bool re_pretrain = true;

  // Optional knowledge-graph resolver consulted after the vocabulary table.
  std::optional<FetchSpec> kg;

  static PipelineConfig Parse(std::string_view json_text,
                              const std::filesystem::path &base_dir);
  static PipelineConfig Load(const std::filesystem::path &path);
  // Paths are written relative to relative_to when given.
  std::string ToJson(
      const std::optional<std::filesystem::path> &relative_to = std::nullopt) const;
};

enum class Stage {
  kBuildVocab,
  kFilterCorpus,
  kPretrainBase,
  kRecode,
  kPretrain,
  kFinetune,
  kSweep,
  kPredict,
  kEvaluate,
};

std::string_view StageName(Stage stage);
Stage ParseStage(std::string_view name);
// Stages run-all executes, in order. kPretrain is dropped when
// re_pretrain is off.
std::vector<Stage> StageOrder(const PipelineConfig &config);

// Artifact locations under out_dir.
struct Artifacts {
  explicit Artifacts(std::filesystem::path out) : root(std::move(out)) {}
  std::filesystem::path root;

  std::filesystem::path base_vocab() const { return root / "base_vocab.jsonl"; }
  std::filesystem::path vocab() const { return root / "vocab.jsonl"; }
  std::filesystem::path entities() const { return root / "entities.jsonl"; }
  std::filesystem::path vocab_stats() const { return root / "vocab_stats.json"; }
  std::filesystem::path filtered() const { return root / "filtered_corpus.txt"; }
  std::filesystem::path filter_stats() const { return root / "filter_stats.json"; }
  std::filesystem::path base_model() const { return root / "base_model"; }
  std::filesystem::path base_loss() const { return root / "base_pretrain_loss.csv"; }
  std::filesystem::path recode_plan() const { return root / "recode_plan.jsonl"; }
  std::filesystem::path expanded_model() const { return root / "expanded_model"; }
  std::filesystem::path pretrained_model() const { return root / "pretrained_model"; }
  std::filesystem::path pretrain_loss() const { return root / "pretrain_loss.csv"; }
  std::filesystem::path finetuned_model() const { return root / "finetuned_model"; }
  std::filesystem::path finetune_loss() const { return root / "finetune_loss.csv"; }
  std::filesystem::path finetune_metrics() const { return root / "finetune_metrics.json"; }
  std::filesystem::path thresholds() const { return root / "thresholds.json"; }
  std::filesystem::path predictions() const { return root / "predictions.jsonl"; }
  std::filesystem::path report_txt() const { return root / "report.txt"; }
  std::filesystem::path report_json() const { return root / "report.json"; }
  std::filesystem::path report_csv() const { return root / "report.csv"; }
  std::filesystem::path manifest(Stage stage) const;
};

struct StageReport {
  Stage stage = Stage::kBuildVocab;
  // Output name -> sha256 (directories hash over their sorted files).
  std::map<std::string, std::string> outputs;
  double seconds = 0.0;
  std::optional<RunReport> evaluation;
};

// Checks every input of the stage, then writes its artifacts and a manifest
// under out_dir/manifests. A missing input names the stage that makes it.
StageReport RunStage(const PipelineConfig &config, Stage stage);

// Checks the user inputs of the whole chain up front, then runs StageOrder.
std::vector<StageReport> RunAll(const PipelineConfig &config);

// Hash of a file, or of a directory's files in sorted order.
std::string HashArtifact(const std::filesystem::path &path);

// Pipeline config for a world written by WriteWorld, tuned for the desk-size
// model.
PipelineConfig SyntheticPipelineConfig(const std::filesystem::path &world_dir,
                                       const std::filesystem::path &out_dir,
                                       uint64_t seed);

}  // namespace atomlm

#endif  // ATOMLM_PIPELINE_H_

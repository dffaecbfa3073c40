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

// Command line driver: one subcommand per pipeline stage plus helpers for the
// synthetic world, scoring and the knowledge-graph client.

#include <spdlog/spdlog.h>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "atomlm/evaluation.h"
#include "atomlm/kg_client.h"
#include "atomlm/pipeline.h"
#include "atomlm/schema.h"
#include "atomlm/synthetic.h"
#include "atomlm/util.h"

namespace {

namespace fs = std::filesystem;

// Flags shared by the stage subcommands.
struct StageFlags {
  std::string config;
  std::optional<uint64_t> seed;
  std::string out_dir;
  bool no_recode = false;
  bool no_pretrain = false;
  bool match_on_id = false;
  bool raw_logits = false;
  std::optional<double> min_f1;
  std::string phase = "re";
};

void AddStageFlags(CLI::App *cmd, StageFlags *flags) {
  cmd->add_option("--config", flags->config, "pipeline config JSON")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", flags->seed, "override the config seed");
  cmd->add_option("--out-dir", flags->out_dir, "override the artifact directory");
  cmd->add_flag("--no-recode", flags->no_recode,
                "seed new rows with random unit vectors");
  cmd->add_flag("--no-pretrain", flags->no_pretrain, "skip re-pretraining");
  cmd->add_flag("--match-on-id", flags->match_on_id,
                "score entity ids instead of surfaces");
  cmd->add_flag("--raw-logits", flags->raw_logits,
                "score candidates by logit instead of probability");
  cmd->add_option("--min-f1", flags->min_f1,
                  "exit with status 3 when the overall F1 is lower");
}

atomlm::PipelineConfig LoadConfig(const StageFlags &flags) {
  auto config = atomlm::PipelineConfig::Load(flags.config);
  if (flags.seed) config.seed = *flags.seed;
  if (!flags.out_dir.empty()) config.out_dir = flags.out_dir;
  if (flags.no_recode) config.recode = false;
  if (flags.no_pretrain) config.re_pretrain = false;
  if (flags.match_on_id) config.match_on_id = true;
  if (flags.raw_logits) config.predict.raw_logits = true;
  return config;
}

int Finish(const std::vector<atomlm::StageReport> &reports, const StageFlags &flags) {
  for (const auto &r : reports) {
    if (!r.evaluation) continue;
    std::cout << atomlm::RenderTable(*r.evaluation);
    if (flags.min_f1 && r.evaluation->overall.f1 < *flags.min_f1) {
      std::fprintf(stderr, "overall F1 %.3f is below --min-f1 %.3f\n",
                   r.evaluation->overall.f1, *flags.min_f1);
      return 3;
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"atomlm: entity-atom masked language model for KB completion"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error");

  // synth
  auto *synth = app.add_subcommand("synth", "write the synthetic world and config");
  std::string synth_dir;
  uint64_t synth_seed = 7;
  atomlm::SyntheticOptions synth_options;
  synth->add_option("--out-dir", synth_dir, "world directory")->required();
  synth->add_option("--seed", synth_seed, "world and pipeline seed");
  synth->add_option("--sentences", synth_options.sentences, "corpus size");

  // Stage subcommands.
  StageFlags flags;
  std::vector<std::pair<CLI::App *, std::string>> stage_cmds;
  for (const char *name : {"build-vocab", "filter-corpus", "pretrain", "recode",
                           "finetune", "sweep", "predict", "evaluate", "run-all"}) {
    auto *cmd = app.add_subcommand(name, std::string("pipeline stage: ") + name);
    AddStageFlags(cmd, &flags);
    if (std::string(name) == "pretrain") {
      cmd->add_option("--phase", flags.phase,
                      "base: base vocabulary on the full corpus; re: expanded "
                      "model on the filtered corpus")
          ->check(CLI::IsMember({"base", "re"}));
    }
    stage_cmds.emplace_back(cmd, name);
  }

  // score
  auto *score = app.add_subcommand("score", "score a predictions file against gold");
  std::string pred_path, gold_path, format = "table";
  bool score_on_id = false;
  score->add_option("--predictions", pred_path)->required()->check(CLI::ExistingFile);
  score->add_option("--gold", gold_path)->required()->check(CLI::ExistingFile);
  score->add_option("--format", format)->check(CLI::IsMember({"table", "csv", "json"}));
  score->add_flag("--match-on-id", score_on_id);

  // kg-client
  auto *fetch = app.add_subcommand("fetch-entities", "harvest an entity dump");
  auto *resolve = app.add_subcommand("resolve", "look up entity ids for surfaces");
  std::string kg_spec_path, schema_path, dump_out;
  std::vector<std::string> surfaces;
  for (auto *cmd : {fetch, resolve}) {
    cmd->add_option("--spec", kg_spec_path, "fetch spec JSON")
        ->required()
        ->check(CLI::ExistingFile);
  }
  fetch->add_option("--schema", schema_path)->required()->check(CLI::ExistingFile);
  fetch->add_option("--out", dump_out)->required();
  resolve->add_option("surfaces", surfaces)->required();

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (synth->parsed()) {
      synth_options.seed = synth_seed;
      fs::path dir(synth_dir);
      atomlm::WriteWorld(atomlm::GenerateWorld(synth_options), dir);
      auto config = atomlm::SyntheticPipelineConfig(fs::absolute(dir),
                                                    fs::absolute(dir / "run"), synth_seed);
      atomlm::WriteFile(dir / "config.json", config.ToJson(fs::absolute(dir)));
      std::cout << "wrote synthetic world to " << dir.string() << "\n";
      return 0;
    }
    for (const auto &[cmd, name] : stage_cmds) {
      if (!cmd->parsed()) continue;
      auto config = LoadConfig(flags);
      if (name == "run-all") return Finish(atomlm::RunAll(config), flags);
      atomlm::Stage stage = name == "pretrain" && flags.phase == "base"
                                ? atomlm::Stage::kPretrainBase
                                : atomlm::ParseStage(name);
      return Finish({atomlm::RunStage(config, stage)}, flags);
    }
    if (score->parsed()) {
      atomlm::ScoreOptions options;
      options.match_on_id = score_on_id;
      auto report = atomlm::ScoreRunFiles(pred_path, gold_path, options);
      if (format == "csv") {
        std::cout << atomlm::RenderCsv(report);
      } else if (format == "json") {
        std::cout << atomlm::RenderJson(report);
      } else {
        std::cout << atomlm::RenderTable(report);
      }
      return 0;
    }
    auto spec = atomlm::FetchSpec::FromJson(atomlm::ReadFile(kg_spec_path));
    atomlm::KgClient client(spec);
    if (fetch->parsed()) {
      auto report = client.FetchEntitiesTo(atomlm::LoadSchema(schema_path), dump_out);
      std::cout << report.records.size() << " records, " << report.failures.size()
                << " failed relations\n";
      return report.failures.empty() ? 0 : 2;
    }
    for (const std::string &s : surfaces) {
      auto id = client.ResolveSurface(s);
      std::cout << s << "\t" << id.value_or("null") << "\n";
    }
    return 0;
  } catch (const std::exception &e) {
    spdlog::error("{}", e.what());
    return 1;
  }
}

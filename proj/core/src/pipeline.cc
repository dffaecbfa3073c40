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

#include "atomlm/pipeline.h"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <array>
#include <chrono>

#include "json.hpp"
#include "atomlm/checkpoint.h"
#include "atomlm/corpus.h"
#include "atomlm/dataset.h"
#include "atomlm/entities.h"
#include "atomlm/recode.h"
#include "atomlm/schema.h"
#include "atomlm/tokenizer.h"
#include "atomlm/util.h"
#include "atomlm/vocabulary.h"

namespace atomlm {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

constexpr std::array<std::pair<Stage, std::string_view>, 9> kStageNames = {{
    {Stage::kBuildVocab, "build-vocab"},
    {Stage::kFilterCorpus, "filter-corpus"},
    {Stage::kPretrainBase, "pretrain-base"},
    {Stage::kRecode, "recode"},
    {Stage::kPretrain, "pretrain"},
    {Stage::kFinetune, "finetune"},
    {Stage::kSweep, "sweep"},
    {Stage::kPredict, "predict"},
    {Stage::kEvaluate, "evaluate"},
}};

fs::path Resolve(const fs::path &base, const std::string &p) {
  fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

std::string Relative(const fs::path &p, const std::optional<fs::path> &to) {
  if (!to) return p.string();
  return p.lexically_relative(*to).string();
}

TrainConfig ParseTrain(const nlohmann::json &j, const TrainConfig &fallback) {
  TrainConfig c = j.contains("preset")
                      ? TrainConfig::Preset(j["preset"].get<std::string>())
                      : fallback;
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  if (j.contains("grad_clip")) {
    c.grad_clip = j["grad_clip"].is_null()
                      ? std::nullopt
                      : std::optional<double>(j["grad_clip"].get<double>());
  }
  c.Validate();
  return c;
}

Json TrainJson(const TrainConfig &c) {
  Json j;
  j["learning_rate"] = c.learning_rate;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["grad_clip"] = c.grad_clip ? Json(*c.grad_clip) : Json();
  return j;
}

std::vector<std::string> NonEmptyLines(const fs::path &path) {
  std::vector<std::string> out;
  for (std::string &line : ReadLines(path)) {
    if (!Trim(line).empty()) out.push_back(std::move(line));
  }
  return out;
}

struct Input {
  std::string name;
  fs::path path;
  // Stage name, or the config key for user-supplied files.
  std::string producer;
};

void Require(const Input &in) {
  if (fs::exists(in.path)) return;
  const bool user = in.producer.starts_with("paths.");
  throw Error("missing input " + in.name + " at " + in.path.string() +
              (user ? " (user-supplied, config " + in.producer + ")"
                    : " (produced by stage " + in.producer + ")"));
}

std::vector<Input> UserInputs(const PipelineConfig &c) {
  std::vector<Input> in = {
      {"corpus", c.paths.corpus, "paths.corpus"},
      {"train", c.paths.train, "paths.train"},
      {"validation", c.paths.validation, "paths.validation"},
      {"test", c.paths.test, "paths.test"},
      {"schema", c.paths.schema, "paths.schema"},
      {"templates", c.paths.templates, "paths.templates"},
  };
  if (c.paths.kg_dump) in.push_back({"kg_dump", *c.paths.kg_dump, "paths.kg_dump"});
  return in;
}

std::vector<Input> StageInputs(const PipelineConfig &c, Stage stage) {
  const Artifacts a(c.out_dir);
  const std::string vocab_stage(StageName(Stage::kBuildVocab));
  const Input vocab{"vocab", a.vocab(), vocab_stage};
  const Input schema{"schema", c.paths.schema, "paths.schema"};
  const Input templates{"templates", c.paths.templates, "paths.templates"};
  switch (stage) {
    case Stage::kBuildVocab: {
      std::vector<Input> in = {{"corpus", c.paths.corpus, "paths.corpus"},
                               {"train", c.paths.train, "paths.train"},
                               {"validation", c.paths.validation, "paths.validation"},
                               schema};
      if (c.paths.kg_dump) in.push_back({"kg_dump", *c.paths.kg_dump, "paths.kg_dump"});
      return in;
    }
    case Stage::kFilterCorpus:
      return {{"corpus", c.paths.corpus, "paths.corpus"}, vocab};
    case Stage::kPretrainBase:
      return {{"corpus", c.paths.corpus, "paths.corpus"},
              {"base_vocab", a.base_vocab(), vocab_stage}};
    case Stage::kRecode:
      return {{"base_model", a.base_model(), std::string(StageName(Stage::kPretrainBase))},
              vocab};
    case Stage::kPretrain:
      return {{"expanded_model", a.expanded_model(), std::string(StageName(Stage::kRecode))},
              {"filtered_corpus", a.filtered(), std::string(StageName(Stage::kFilterCorpus))},
              vocab};
    case Stage::kFinetune: {
      Input model = c.re_pretrain
                        ? Input{"start_model", a.pretrained_model(),
                                std::string(StageName(Stage::kPretrain))}
                        : Input{"start_model", a.expanded_model(),
                                std::string(StageName(Stage::kRecode))};
      return {model, vocab, {"train", c.paths.train, "paths.train"}, templates};
    }
    case Stage::kSweep:
      return {{"model", a.finetuned_model(), std::string(StageName(Stage::kFinetune))},
              vocab,
              {"validation", c.paths.validation, "paths.validation"},
              templates,
              schema};
    case Stage::kPredict:
      return {{"model", a.finetuned_model(), std::string(StageName(Stage::kFinetune))},
              {"thresholds", a.thresholds(), std::string(StageName(Stage::kSweep))},
              vocab,
              {"test", c.paths.test, "paths.test"},
              templates,
              schema};
    case Stage::kEvaluate:
      return {{"predictions", a.predictions(), std::string(StageName(Stage::kPredict))},
              {"test", c.paths.test, "paths.test"}};
  }
  throw Error("unknown stage");
}

// Saves under dir.partial and swaps it in once complete.
void CommitDirectory(const fs::path &partial, const fs::path &dir) {
  fs::remove_all(dir);
  fs::rename(partial, dir);
}

fs::path PartialOf(const fs::path &p) { return fs::path(p.string() + ".partial"); }

void SaveModel(const MlmModel &model, const fs::path &dir) {
  const fs::path partial = PartialOf(dir);
  fs::remove_all(partial);
  SaveCheckpoint(model, partial);
  CommitDirectory(partial, dir);
}

MlmModel TrainToDir(const MlmModel &start, const InstanceSource &instances,
                    TrainConfig train, const fs::path &dir,
                    const fs::path &loss_csv, std::string_view split) {
  const fs::path partial = PartialOf(dir);
  fs::remove_all(partial);
  train.checkpoint_dir = partial;
  train.checkpoint_every_epoch = true;
  TrainResult result = Train(start, instances, train, [&](const EpochLoss &e) {
    spdlog::info("{} epoch {}/{} loss {:.4f}", split, e.epoch, train.epochs, e.loss);
  });
  CommitDirectory(partial, dir);
  WriteFile(loss_csv, LossHistoryCsv(result.history, split));
  return std::move(result.model);
}

std::map<std::string, fs::path> StageOutputs(const PipelineConfig &c, Stage stage) {
  const Artifacts a(c.out_dir);
  switch (stage) {
    case Stage::kBuildVocab:
      return {{"base_vocab", a.base_vocab()},
              {"vocab", a.vocab()},
              {"entities", a.entities()},
              {"vocab_stats", a.vocab_stats()}};
    case Stage::kFilterCorpus:
      return {{"filtered_corpus", a.filtered()}, {"filter_stats", a.filter_stats()}};
    case Stage::kPretrainBase:
      return {{"base_model", a.base_model()}, {"loss", a.base_loss()}};
    case Stage::kRecode:
      return {{"recode_plan", a.recode_plan()}, {"expanded_model", a.expanded_model()}};
    case Stage::kPretrain:
      return {{"pretrained_model", a.pretrained_model()}, {"loss", a.pretrain_loss()}};
    case Stage::kFinetune:
      return {{"finetuned_model", a.finetuned_model()},
              {"loss", a.finetune_loss()},
              {"metrics", a.finetune_metrics()}};
    case Stage::kSweep:
      return {{"thresholds", a.thresholds()}};
    case Stage::kPredict:
      return {{"predictions", a.predictions()}};
    case Stage::kEvaluate:
      return {{"report_txt", a.report_txt()},
              {"report_json", a.report_json()},
              {"report_csv", a.report_csv()}};
  }
  throw Error("unknown stage");
}

void BuildVocabStage(const PipelineConfig &c) {
  const Artifacts a(c.out_dir);
  const auto corpus = NonEmptyLines(c.paths.corpus);
  Vocabulary base = BuildBaseVocab(corpus, c.base_vocab_size);
  base.Save(a.base_vocab());

  const RelationSchema schema = LoadSchema(c.paths.schema);
  const std::vector<fs::path> splits = {c.paths.train, c.paths.validation};
  std::vector<EntityRecord> records = HarvestEntities(splits, schema);
  size_t skipped = 0;
  if (c.paths.kg_dump) {
    MergeResult merged = MergeKgDump(std::move(records), *c.paths.kg_dump, schema);
    records = std::move(merged.records);
    skipped = merged.skipped;
  }
  const auto inputs = ToEntityInputs(records);
  AddAtomsResult added = AddEntityAtoms(base, inputs);
  added.vocab.Save(a.vocab());
  WriteFile(a.entities(), SerializeEntityDump(records));

  Json stats;
  stats["base_size"] = base.size();
  stats["vocab_size"] = added.vocab.size();
  stats["atoms_added"] = added.added;
  stats["rejected"] = added.rejected;
  stats["kg_rows_skipped"] = skipped;
  stats["type_counts"] = CountTypes(records);
  WriteFile(a.vocab_stats(), stats.dump(2) + "\n");
  spdlog::info("vocabulary: {} base tokens, {} entity atoms", base.size(), added.added);
}

void FilterCorpusStage(const PipelineConfig &c) {
  const Artifacts a(c.out_dir);
  const auto corpus = NonEmptyLines(c.paths.corpus);
  const Vocabulary vocab = Vocabulary::Load(a.vocab());
  FilterResult result = FilterSentences(corpus, vocab, c.min_entity_count);
  std::string text;
  for (const SentenceMatch &m : result.kept) text += m.sentence + "\n";
  WriteFile(a.filtered(), text);
  Json stats;
  stats["total"] = corpus.size();
  stats["kept"] = result.kept.size();
  stats["type_counts"] = result.type_counts;
  WriteFile(a.filter_stats(), stats.dump(2) + "\n");
  spdlog::info("corpus filter kept {} of {} sentences", result.kept.size(),
               corpus.size());
}

// Masked sentences per epoch; with static masking every epoch sees the
// draw of epoch 1.
InstanceSource MaskedCorpus(const PipelineConfig &c, std::vector<std::string> corpus,
                            const Vocabulary &vocab, std::string_view tag) {
  PretrainMasking m;
  m.mask_rate = c.mask_rate;
  m.entity_mask_boost = c.entity_mask_boost;
  m.max_len = static_cast<size_t>(c.model.max_seq_len);
  const uint64_t seed = DeriveSeed(c.seed, tag);
  const bool dynamic = c.dynamic_masking;
  return [=, &vocab](int epoch) {
    PretrainMasking options = m;
    options.seed = DeriveSeed(seed, "epoch-" + std::to_string(dynamic ? epoch : 1));
    return MakePretrainInstances(corpus, vocab, options);
  };
}

void PretrainBaseStage(const PipelineConfig &c) {
  const Artifacts a(c.out_dir);
  const Vocabulary vocab = Vocabulary::Load(a.base_vocab());
  const auto corpus = NonEmptyLines(c.paths.corpus);
  ModelConfig mc = c.model;
  mc.vocab_size = static_cast<int>(vocab.size());
  mc.seed = DeriveSeed(c.seed, "model-init");
  const MlmModel model = InitModel<float>(mc);
  const auto instances = MaskedCorpus(c, corpus, vocab, "base-mask");
  TrainConfig train = c.base_pretrain;
  train.seed = DeriveSeed(c.seed, "base-pretrain");
  TrainToDir(model, instances, train, a.base_model(), a.base_loss(), "base-pretrain");
}

void RecodeStage(const PipelineConfig &c) {
  const Artifacts a(c.out_dir);
  const MlmModel base = LoadCheckpoint(a.base_model());
  const Vocabulary vocab = Vocabulary::Load(a.vocab());
  const int old_v = base.config.vocab_size;
  if (static_cast<size_t>(old_v) > vocab.size()) {
    throw Error("base model is larger than the vocabulary");
  }
  const RecodePlan plan = MakeRecodePlan(vocab, old_v);
  ExpandResult expanded =
      ExpandModel(base, plan, c.recode ? NewRowInit::kRecode : NewRowInit::kRandomUnit,
                  DeriveSeed(c.seed, "expand"));
  WriteFile(a.recode_plan(), SerializeRecodePlan(plan));
  SaveModel(expanded.model, a.expanded_model());
}

void PretrainStage(const PipelineConfig &c) {
  const Artifacts a(c.out_dir);
  const MlmModel start = LoadCheckpoint(a.expanded_model());
  const Vocabulary vocab = Vocabulary::Load(a.vocab());
  const auto corpus = NonEmptyLines(a.filtered());
  if (corpus.empty()) throw Error("filtered corpus is empty");
  const auto instances = MaskedCorpus(c, corpus, vocab, "re-mask");
  TrainConfig train = c.pretrain;
  train.seed = DeriveSeed(c.seed, "re-pretrain");
  TrainToDir(start, instances, train, a.pretrained_model(), a.pretrain_loss(),
             "pretrain");
}

void FinetuneStage(const PipelineConfig &c) {
  const Artifacts a(c.out_dir);
  const MlmModel start = LoadCheckpoint(c.re_pretrain ? a.pretrained_model()
                                                      : a.expanded_model());
  const Vocabulary vocab = Vocabulary::Load(a.vocab());
  const auto train_samples = LoadSamples(c.paths.train);
  const TemplateSet templates = LoadTemplates(c.paths.templates);
  const auto instances = MakeFinetuneInstances(train_samples, templates, vocab);
  const double initial = EvaluateMlm(start, instances);
  TrainConfig train = c.finetune;
  train.seed = DeriveSeed(c.seed, "finetune");
  const MlmModel tuned = TrainToDir(start, [&](int) { return instances; }, train, a.finetuned_model(),
                                    a.finetune_loss(), "finetune");
  Json metrics;
  metrics["instances"] = instances.size();
  metrics["initial_loss"] = initial;
  metrics["final_loss"] = EvaluateMlm(tuned, instances);
  WriteFile(a.finetune_metrics(), metrics.dump(2) + "\n");
}

void SweepStage(const PipelineConfig &c) {
  const Artifacts a(c.out_dir);
  const MlmModel model = LoadCheckpoint(a.finetuned_model());
  const Vocabulary vocab = Vocabulary::Load(a.vocab());
  const auto validation = LoadSamples(c.paths.validation);
  const TemplateSet templates = LoadTemplates(c.paths.templates);
  const RelationSchema schema = LoadSchema(c.paths.schema);
  const RelationThresholds thresholds = SweepThresholds(
      model, vocab, validation, templates, c.grid, schema, c.predict);
  WriteFile(a.thresholds(), thresholds.Serialize());
}

void PredictStage(const PipelineConfig &c) {
  const Artifacts a(c.out_dir);
  const MlmModel model = LoadCheckpoint(a.finetuned_model());
  const Vocabulary vocab = Vocabulary::Load(a.vocab());
  const auto test = LoadSamples(c.paths.test);
  const TemplateSet templates = LoadTemplates(c.paths.templates);
  const RelationSchema schema = LoadSchema(c.paths.schema);
  const RelationThresholds thresholds =
      RelationThresholds::Parse(ReadFile(a.thresholds()));

  TableResolver table = TableResolver::FromVocabulary(vocab);
  std::optional<KgClient> kg;
  std::optional<KgResolver> kg_resolver;
  std::vector<Resolver *> chain = {&table};
  if (c.kg) {
    kg.emplace(*c.kg);
    kg_resolver.emplace(&*kg);
    chain.push_back(&*kg_resolver);
  }
  ChainResolver resolver(chain);

  std::vector<Prediction> predictions;
  predictions.reserve(test.size());
  for (const TripleSample &s : test) {
    auto cands = PredictCandidates(model, vocab, s.subject, s.relation, templates,
                                   c.predict, &schema);
    auto selected = SelectObjects(cands, s.relation, thresholds.For(s.relation), schema);
    predictions.push_back({s.subject, s.relation, Disambiguate(selected, resolver)});
  }
  WriteFile(a.predictions(), SerializePredictions(predictions));
}

RunReport EvaluateStage(const PipelineConfig &c) {
  const Artifacts a(c.out_dir);
  ScoreOptions options;
  options.match_on_id = c.match_on_id;
  RunReport report = ScoreRunFiles(a.predictions(), c.paths.test, options);
  WriteFile(a.report_txt(), RenderTable(report));
  WriteFile(a.report_json(), RenderJson(report));
  WriteFile(a.report_csv(), RenderCsv(report));
  return report;
}

}  // namespace

std::string_view StageName(Stage stage) {
  for (const auto &[s, name] : kStageNames) {
    if (s == stage) return name;
  }
  throw Error("unknown stage");
}

Stage ParseStage(std::string_view name) {
  for (const auto &[s, n] : kStageNames) {
    if (n == name) return s;
  }
  throw Error("unknown stage: " + std::string(name));
}

std::vector<Stage> StageOrder(const PipelineConfig &config) {
  std::vector<Stage> order;
  for (const auto &[stage, name] : kStageNames) {
    if (stage == Stage::kPretrain && !config.re_pretrain) continue;
    order.push_back(stage);
  }
  return order;
}

fs::path Artifacts::manifest(Stage stage) const {
  return root / "manifests" / (std::string(StageName(stage)) + ".json");
}

PipelineConfig PipelineConfig::Parse(std::string_view json_text,
                                     const fs::path &base_dir) {
  auto j = nlohmann::json::parse(json_text);
  if (!j.is_object()) throw Error("pipeline config must be a JSON object");
  PipelineConfig c;
  c.seed = j.value("seed", c.seed);
  if (j.contains("out_dir")) c.out_dir = Resolve(base_dir, j["out_dir"].get<std::string>());
  if (!j.contains("paths")) throw Error("pipeline config needs a paths section");
  const auto &p = j["paths"];
  auto required = [&](const char *key) {
    if (!p.contains(key)) throw Error(std::string("config paths.") + key + " is required");
    return Resolve(base_dir, p[key].get<std::string>());
  };
  c.paths.corpus = required("corpus");
  c.paths.train = required("train");
  c.paths.validation = required("validation");
  c.paths.test = required("test");
  c.paths.schema = required("schema");
  c.paths.templates = required("templates");
  if (p.contains("kg_dump") && p["kg_dump"].is_string()) {
    c.paths.kg_dump = Resolve(base_dir, p["kg_dump"].get<std::string>());
  }

  if (j.contains("vocab")) {
    c.base_vocab_size = j["vocab"].value("base_size", c.base_vocab_size);
    c.min_entity_count = j["vocab"].value("min_entity_count", c.min_entity_count);
  }
  if (j.contains("model")) {
    const auto &m = j["model"];
    c.model.hidden = m.value("hidden", c.model.hidden);
    c.model.layers = m.value("layers", c.model.layers);
    c.model.heads = m.value("heads", c.model.heads);
    c.model.ff_width = m.value("ff_width", c.model.ff_width);
    c.model.max_seq_len = m.value("max_seq_len", c.model.max_seq_len);
  }
  if (j.contains("base_pretrain")) c.base_pretrain = ParseTrain(j["base_pretrain"], c.base_pretrain);
  if (j.contains("pretrain")) c.pretrain = ParseTrain(j["pretrain"], c.pretrain);
  if (j.contains("finetune")) c.finetune = ParseTrain(j["finetune"], c.finetune);
  if (j.contains("masking")) {
    c.mask_rate = j["masking"].value("rate", c.mask_rate);
    c.entity_mask_boost = j["masking"].value("entity_boost", c.entity_mask_boost);
    c.dynamic_masking = j["masking"].value("dynamic", c.dynamic_masking);
  }
  if (j.contains("inference")) {
    const auto &i = j["inference"];
    c.predict.top_k = i.value("top_k", c.predict.top_k);
    c.predict.type_filter = i.value("type_filter", c.predict.type_filter);
    c.predict.raw_logits = i.value("raw_logits", c.predict.raw_logits);
    c.predict.skip_special = i.value("skip_special", c.predict.skip_special);
    if (i.contains("grid")) c.grid = i["grid"].get<std::vector<double>>();
  }
  if (j.contains("evaluation")) {
    c.match_on_id = j["evaluation"].value("match_on_id", c.match_on_id);
  }
  if (j.contains("ablation")) {
    c.recode = j["ablation"].value("recode", c.recode);
    c.re_pretrain = j["ablation"].value("re_pretrain", c.re_pretrain);
  }
  if (j.contains("kg") && j["kg"].is_object()) {
    auto kg = j["kg"];
    for (const char *key : {"fixture_dir", "cache_dir"}) {
      if (kg.contains(key) && kg[key].is_string()) {
        kg[key] = Resolve(base_dir, kg[key].get<std::string>()).string();
      }
    }
    c.kg = FetchSpec::FromJson(kg.dump());
  }
  if (c.grid.empty()) throw Error("inference.grid must not be empty");
  return c;
}

PipelineConfig PipelineConfig::Load(const fs::path &path) {
  return Parse(ReadFile(path), path.parent_path());
}

std::string PipelineConfig::ToJson(const std::optional<fs::path> &relative_to) const {
  Json j;
  j["seed"] = seed;
  j["out_dir"] = Relative(out_dir, relative_to);
  Json p;
  p["corpus"] = Relative(paths.corpus, relative_to);
  p["train"] = Relative(paths.train, relative_to);
  p["validation"] = Relative(paths.validation, relative_to);
  p["test"] = Relative(paths.test, relative_to);
  p["schema"] = Relative(paths.schema, relative_to);
  p["templates"] = Relative(paths.templates, relative_to);
  p["kg_dump"] = paths.kg_dump ? Json(Relative(*paths.kg_dump, relative_to)) : Json();
  j["paths"] = p;
  j["vocab"] = {{"base_size", base_vocab_size}, {"min_entity_count", min_entity_count}};
  j["model"] = {{"hidden", model.hidden},
                {"layers", model.layers},
                {"heads", model.heads},
                {"ff_width", model.ff_width},
                {"max_seq_len", model.max_seq_len}};
  j["base_pretrain"] = TrainJson(base_pretrain);
  j["pretrain"] = TrainJson(pretrain);
  j["finetune"] = TrainJson(finetune);
  j["masking"] = {{"rate", mask_rate},
                  {"entity_boost", entity_mask_boost},
                  {"dynamic", dynamic_masking}};
  j["inference"] = {{"top_k", predict.top_k},
                    {"type_filter", predict.type_filter},
                    {"raw_logits", predict.raw_logits},
                    {"skip_special", predict.skip_special},
                    {"grid", grid}};
  j["evaluation"] = {{"match_on_id", match_on_id}};
  j["ablation"] = {{"recode", recode}, {"re_pretrain", re_pretrain}};
  if (kg) {
    Json k;
    k["endpoint"] = kg->endpoint;
    k["search_endpoint"] = kg->search_endpoint;
    k["relation_properties"] = kg->relation_properties;
    k["page_size"] = kg->page_size;
    k["rate_limit"] = kg->rate_limit;
    k["fixture_dir"] = kg->fixture_dir ? Json(Relative(*kg->fixture_dir, relative_to)) : Json();
    k["cache_dir"] = kg->cache_dir ? Json(Relative(*kg->cache_dir, relative_to)) : Json();
    k["language"] = kg->language;
    j["kg"] = k;
  }
  return j.dump(2) + "\n";
}

std::string HashArtifact(const fs::path &path) {
  if (!fs::is_directory(path)) return Sha256File(path);
  std::vector<fs::path> files;
  for (const auto &e : fs::recursive_directory_iterator(path)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::string listing;
  for (const fs::path &f : files) {
    listing += f.lexically_relative(path).generic_string() + " " + Sha256File(f) + "\n";
  }
  return Sha256Hex(listing);
}

StageReport RunStage(const PipelineConfig &config, Stage stage) {
  const auto inputs = StageInputs(config, stage);
  for (const Input &in : inputs) Require(in);
  fs::create_directories(config.out_dir);

  const auto start = std::chrono::steady_clock::now();
  spdlog::info("stage {} starting", StageName(stage));
  StageReport report;
  report.stage = stage;
  switch (stage) {
    case Stage::kBuildVocab: BuildVocabStage(config); break;
    case Stage::kFilterCorpus: FilterCorpusStage(config); break;
    case Stage::kPretrainBase: PretrainBaseStage(config); break;
    case Stage::kRecode: RecodeStage(config); break;
    case Stage::kPretrain: PretrainStage(config); break;
    case Stage::kFinetune: FinetuneStage(config); break;
    case Stage::kSweep: SweepStage(config); break;
    case Stage::kPredict: PredictStage(config); break;
    case Stage::kEvaluate: report.evaluation = EvaluateStage(config); break;
  }
  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  Json manifest;
  manifest["stage"] = StageName(stage);
  manifest["seed"] = config.seed;
  Json cfg = Json::parse(config.ToJson());
  cfg.erase("out_dir");
  manifest["config"] = cfg;
  Json in_hashes = Json::object();
  for (const Input &in : inputs) in_hashes[in.name] = HashArtifact(in.path);
  manifest["inputs"] = in_hashes;
  Json out_hashes = Json::object();
  for (const auto &[name, path] : StageOutputs(config, stage)) {
    report.outputs[name] = HashArtifact(path);
    out_hashes[name] = report.outputs[name];
  }
  manifest["outputs"] = out_hashes;
  manifest["duration_seconds"] = report.seconds;
  WriteFile(Artifacts(config.out_dir).manifest(stage), manifest.dump(2) + "\n");
  spdlog::info("stage {} done in {:.1f}s", StageName(stage), report.seconds);
  return report;
}

std::vector<StageReport> RunAll(const PipelineConfig &config) {
  for (const Input &in : UserInputs(config)) Require(in);
  std::vector<StageReport> reports;
  for (Stage stage : StageOrder(config)) reports.push_back(RunStage(config, stage));
  return reports;
}

PipelineConfig SyntheticPipelineConfig(const fs::path &world_dir,
                                       const fs::path &out_dir, uint64_t seed) {
  PipelineConfig c;
  c.paths.corpus = world_dir / "corpus.txt";
  c.paths.train = world_dir / "train.jsonl";
  c.paths.validation = world_dir / "validation.jsonl";
  c.paths.test = world_dir / "test.jsonl";
  c.paths.schema = world_dir / "schema.json";
  c.paths.templates = world_dir / "templates.json";
  c.paths.kg_dump = world_dir / "entities.jsonl";
  c.out_dir = out_dir;
  c.seed = seed;
  c.base_vocab_size = 300;
  c.model.hidden = 64;
  c.model.layers = 2;
  c.model.heads = 4;
  c.model.ff_width = 128;
  c.model.max_seq_len = 48;
  // The preset 2e-5 is far too small for a model this size.
  c.base_pretrain.learning_rate = 1e-3;
  c.pretrain.learning_rate = 1e-3;
  c.finetune.learning_rate = 1e-3;
  c.finetune.batch_size = 8;
  c.predict.top_k = 20;
  c.predict.type_filter = true;
  c.predict.skip_special = true;
  return c;
}

}  // namespace atomlm

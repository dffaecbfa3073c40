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

#include "atomlm/corpus.h"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "json.hpp"
#include "atomlm/util.h"

namespace atomlm {

namespace {

constexpr std::string_view kSubjectSlot = "{subject}";
constexpr std::string_view kMaskSlot = "{mask}";

size_t CountOccurrences(std::string_view text, std::string_view needle) {
  size_t count = 0;
  for (size_t pos = text.find(needle); pos != std::string_view::npos;
       pos = text.find(needle, pos + needle.size())) {
    ++count;
  }
  return count;
}

void ReplaceOnce(std::string *text, std::string_view slot,
                 std::string_view value) {
  size_t pos = text->find(slot);
  text->replace(pos, slot.size(), value);
}

}  // namespace

PromptTemplate::PromptTemplate(std::string relation, std::string pattern)
    : relation_(std::move(relation)), pattern_(std::move(pattern)) {
  if (CountOccurrences(pattern_, kSubjectSlot) != 1 ||
      CountOccurrences(pattern_, kMaskSlot) != 1) {
    throw Error("template for " + relation_ +
                " must contain exactly one {subject} and one {mask}");
  }
}

std::string PromptTemplate::Instantiate(std::string_view subject,
                                        std::string_view mask_text) const {
  // Fill {mask} first so a subject containing "{mask}" is left alone.
  std::string out = pattern_;
  ReplaceOnce(&out, kMaskSlot, mask_text);
  ReplaceOnce(&out, kSubjectSlot, subject);
  return out;
}

TemplateSet ParseTemplates(std::string_view json_text) {
  auto root = nlohmann::json::parse(json_text);
  if (!root.is_object()) throw Error("templates must be a JSON object");
  TemplateSet templates;
  for (const auto &[relation, pattern] : root.items()) {
    templates.emplace(relation,
                      PromptTemplate(relation, pattern.get<std::string>()));
  }
  return templates;
}

TemplateSet LoadTemplates(const std::filesystem::path &path) {
  return ParseTemplates(ReadFile(path));
}

const PromptTemplate &TemplateFor(const TemplateSet &templates,
                                  std::string_view relation) {
  auto it = templates.find(std::string(relation));
  if (it == templates.end()) {
    throw Error("missing template for relation " + std::string(relation));
  }
  return it->second;
}

FilterResult FilterSentences(std::span<const std::string> corpus,
                             const Vocabulary &vocab,
                             size_t min_entity_count) {
  FilterResult result;
  for (const std::string &sentence : corpus) {
    auto matches = FindEntities(sentence, vocab);
    if (matches.size() < std::max<size_t>(min_entity_count, 1)) continue;
    SentenceMatch kept{sentence, {}};
    std::set<std::string> types;
    for (const EntityMatch &m : matches) {
      if (std::find(kept.entities.begin(), kept.entities.end(), m.id) ==
          kept.entities.end()) {
        kept.entities.push_back(m.id);
      }
      const auto &type = vocab.entry(m.id).entity_type;
      if (type) types.insert(*type);
    }
    for (const std::string &type : types) ++result.type_counts[type];
    result.kept.push_back(std::move(kept));
  }
  if (result.kept.empty()) {
    spdlog::warn("corpus filter kept no sentences");
  }
  return result;
}

std::vector<MaskedInstance> MakePretrainInstances(
    std::span<const std::string> sentences, const Vocabulary &vocab,
    const PretrainMasking &options) {
  if (!(options.mask_rate > 0.0 && options.mask_rate < 1.0)) {
    throw Error("mask_rate must be in (0, 1)");
  }
  const auto vocab_size = static_cast<uint64_t>(vocab.size());
  std::vector<MaskedInstance> out;
  for (size_t index = 0; index < sentences.size(); ++index) {
    TokenSequence seq = Tokenize(sentences[index], vocab, true);
    if (options.max_len > 0 && seq.ids.size() > options.max_len) {
      seq.ids.resize(options.max_len);
      seq.word_starts.resize(options.max_len);
    }
    std::vector<size_t> entity_positions, other_positions;
    for (size_t i = 0; i < seq.ids.size(); ++i) {
      if (vocab.IsSpecial(seq.ids[i])) continue;
      if (options.entity_mask_boost && vocab.IsEntity(seq.ids[i])) {
        entity_positions.push_back(i);
      } else {
        other_positions.push_back(i);
      }
    }
    const size_t maskable = entity_positions.size() + other_positions.size();
    if (maskable == 0) continue;

    // Per-sentence stream keeps output independent of processing order.
    Rng rng(DeriveSeed(options.seed + index, "pretrain-mask"));
    rng.Shuffle(entity_positions.begin(), entity_positions.end());
    rng.Shuffle(other_positions.begin(), other_positions.end());
    std::vector<size_t> order = entity_positions;
    order.insert(order.end(), other_positions.begin(), other_positions.end());

    auto count = static_cast<size_t>(
        std::ceil(options.mask_rate * static_cast<double>(maskable) - 1e-9));
    count = std::clamp<size_t>(count, 1, maskable);
    std::vector<size_t> chosen(order.begin(), order.begin() + count);
    std::sort(chosen.begin(), chosen.end());

    MaskedInstance inst;
    inst.origin = InstanceOrigin::kPretrain;
    for (size_t pos : chosen) {
      inst.targets.push_back({pos, seq.ids[pos]});
      double r = rng.UniformReal();
      if (r < 0.8) {
        seq.ids[pos] = kMaskId;
      } else if (r < 0.9 && vocab_size > kNumSpecialTokens) {
        seq.ids[pos] = static_cast<TokenId>(
            kNumSpecialTokens + rng.Uniform(vocab_size - kNumSpecialTokens));
      }
    }
    seq.RecomputeMaskPositions();
    inst.input = std::move(seq);
    out.push_back(std::move(inst));
  }
  return out;
}

std::vector<MaskedInstance> MakeFinetuneInstances(
    std::span<const TripleSample> samples, const TemplateSet &templates,
    const Vocabulary &vocab) {
  std::vector<MaskedInstance> out;
  for (const TripleSample &sample : samples) {
    const PromptTemplate &tmpl = TemplateFor(templates, sample.relation);
    if (sample.objects.empty()) continue;
    TokenSequence prompt =
        Tokenize(tmpl.Instantiate(sample.subject, "[MASK]"), vocab, true);
    if (prompt.mask_positions.size() != 1) {
      throw Error("prompt for " + sample.relation + " must contain one mask");
    }
    const size_t slot = prompt.mask_positions.front();
    for (const std::string &object : sample.objects) {
      TokenSequence object_seq;
      auto atom = vocab.Find(object);
      if (atom && vocab.IsEntity(*atom)) {
        object_seq.ids = {*atom};
        object_seq.word_starts = {1};
      } else {
        object_seq = Tokenize(object, vocab, false);
      }
      if (object_seq.ids.empty()) {
        throw Error("object '" + object + "' is not tokenizable");
      }
      MaskedInstance inst;
      inst.origin = InstanceOrigin::kFineTune;
      inst.relation = sample.relation;
      TokenSequence &seq = inst.input;
      const size_t k = object_seq.ids.size();
      seq.ids.assign(prompt.ids.begin(), prompt.ids.begin() + slot);
      seq.word_starts.assign(prompt.word_starts.begin(),
                             prompt.word_starts.begin() + slot);
      for (size_t i = 0; i < k; ++i) {
        seq.ids.push_back(kMaskId);
        seq.word_starts.push_back(i == 0 ? prompt.word_starts[slot]
                                         : object_seq.word_starts[i]);
        inst.targets.push_back({slot + i, object_seq.ids[i]});
      }
      seq.ids.insert(seq.ids.end(), prompt.ids.begin() + slot + 1,
                     prompt.ids.end());
      seq.word_starts.insert(seq.word_starts.end(),
                             prompt.word_starts.begin() + slot + 1,
                             prompt.word_starts.end());
      seq.RecomputeMaskPositions();
      out.push_back(std::move(inst));
    }
  }
  return out;
}

std::string SerializeInstances(std::span<const MaskedInstance> instances) {
  std::string out;
  for (const MaskedInstance &inst : instances) {
    nlohmann::ordered_json j;
    j["ids"] = inst.input.ids;
    j["word_starts"] = inst.input.word_starts;
    auto targets = nlohmann::ordered_json::array();
    for (const MaskTarget &t : inst.targets) targets.push_back({t.position, t.id});
    j["targets"] = std::move(targets);
    j["origin"] = inst.origin == InstanceOrigin::kPretrain ? "pretrain" : "finetune";
    if (!inst.relation.empty()) j["relation"] = inst.relation;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<MaskedInstance> ParseInstances(std::string_view jsonl) {
  std::vector<MaskedInstance> out;
  size_t pos = 0;
  while (pos < jsonl.size()) {
    size_t eol = jsonl.find('\n', pos);
    if (eol == std::string_view::npos) eol = jsonl.size();
    std::string_view line = Trim(jsonl.substr(pos, eol - pos));
    pos = eol + 1;
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line);
    MaskedInstance inst;
    inst.input.ids = j.at("ids").get<std::vector<TokenId>>();
    inst.input.word_starts = j.at("word_starts").get<std::vector<uint8_t>>();
    for (const auto &t : j.at("targets")) {
      inst.targets.push_back({t.at(0).get<size_t>(), t.at(1).get<TokenId>()});
    }
    inst.origin = j.value("origin", "pretrain") == "finetune"
                      ? InstanceOrigin::kFineTune
                      : InstanceOrigin::kPretrain;
    inst.relation = j.value("relation", "");
    inst.input.RecomputeMaskPositions();
    out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace atomlm

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

#ifndef ATOMLM_CORPUS_H_
#define ATOMLM_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "atomlm/dataset.h"
#include "atomlm/model.h"
#include "atomlm/tokenizer.h"

namespace atomlm {

// Per-relation sentence pattern with exactly one {subject} and one {mask}.
class PromptTemplate {
 public:
  PromptTemplate(std::string relation, std::string pattern);

  const std::string &relation() const { return relation_; }
  const std::string &pattern() const { return pattern_; }

  // Pattern with both placeholders substituted.
  std::string Instantiate(std::string_view subject,
                          std::string_view mask_text) const;

 private:
  std::string relation_;
  std::string pattern_;
};

using TemplateSet = std::map<std::string, PromptTemplate>;

// JSON object: relation -> pattern string.
TemplateSet ParseTemplates(std::string_view json_text);
TemplateSet LoadTemplates(const std::filesystem::path &path);
const PromptTemplate &TemplateFor(const TemplateSet &templates,
                                  std::string_view relation);

struct SentenceMatch {
  std::string sentence;
  // Distinct matched atom ids in first-occurrence order.
  std::vector<TokenId> entities;
};

struct FilterResult {
  std::vector<SentenceMatch> kept;
  // A sentence counts once toward every entity type it mentions, so the
  // per-type totals can exceed kept.size().
  std::map<std::string, size_t> type_counts;
};

// Keeps sentences with at least min_entity_count whole-word entity matches.
FilterResult FilterSentences(std::span<const std::string> corpus,
                             const Vocabulary &vocab,
                             size_t min_entity_count = 1);

enum class InstanceOrigin { kPretrain, kFineTune };

struct MaskedInstance {
  TokenSequence input;
  // Positions whose original id must be recovered. For pretraining this
  // includes positions replaced by a random token or left unchanged, so it is
  // a superset of input.mask_positions.
  std::vector<MaskTarget> targets;
  InstanceOrigin origin = InstanceOrigin::kPretrain;
  std::string relation;  // fine-tune instances only
};

struct PretrainMasking {
  double mask_rate = 0.15;
  uint64_t seed = 0;
  // Select entity-atom positions before any other position.
  bool entity_mask_boost = false;
  // Truncate longer sequences; 0 disables truncation.
  size_t max_len = 0;
};

// Standard MLM corruption: ceil(mask_rate * n) non-special positions are
// chosen; 80% become MASK, 10% a random non-special token, 10% stay.
std::vector<MaskedInstance> MakePretrainInstances(
    std::span<const std::string> sentences, const Vocabulary &vocab,
    const PretrainMasking &options);

// One instance per (subject, relation, gold object). Entity-atom objects get a
// single MASK; other objects are masked token by token.
std::vector<MaskedInstance> MakeFinetuneInstances(
    std::span<const TripleSample> samples, const TemplateSet &templates,
    const Vocabulary &vocab);

// Instances cached as JSON Lines of id arrays.
std::string SerializeInstances(std::span<const MaskedInstance> instances);
std::vector<MaskedInstance> ParseInstances(std::string_view jsonl);

}  // namespace atomlm

#endif  // ATOMLM_CORPUS_H_

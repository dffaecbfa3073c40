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

#ifndef ATOMLM_INFERENCE_H_
#define ATOMLM_INFERENCE_H_

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "atomlm/corpus.h"
#include "atomlm/dataset.h"
#include "atomlm/model.h"
#include "atomlm/schema.h"
#include "atomlm/util.h"
#include "atomlm/vocabulary.h"

namespace atomlm {

struct Candidate {
  std::string surface;
  TokenId token_id = kUnkId;
  // Softmax probability by default; the raw logit when raw_logits is set.
  double score = 0.0;
  std::optional<std::string> entity_id;

  bool operator==(const Candidate &) const = default;
};

struct PredictOptions {
  size_t top_k = 20;
  // Restrict to atoms whose type is the relation's object type (digit
  // surfaces for numeric relations). Needs a schema.
  bool type_filter = false;
  bool raw_logits = false;
  // Drop PAD/UNK/MASK/CLS/SEP from the candidate list.
  bool skip_special = false;
};

// Fills the relation's template with the subject and a single MASK and ranks
// the vocabulary at the mask position: score descending, id ascending.
std::vector<Candidate> PredictCandidates(const MlmModel &model,
                                         const Vocabulary &vocab,
                                         std::string_view subject,
                                         std::string_view relation,
                                         const TemplateSet &templates,
                                         const PredictOptions &options,
                                         const RelationSchema *schema = nullptr);

struct RelationThresholds {
  std::map<std::string, double> per_relation;
  double default_threshold = 0.5;

  double For(std::string_view relation) const;

  // JSON object: relation -> threshold, plus "__default__".
  std::string Serialize() const;
  static RelationThresholds Parse(std::string_view json_text);
};

// Keeps candidates with score >= the relation's threshold.
std::vector<Candidate> ApplyThreshold(std::span<const Candidate> candidates,
                                      std::string_view relation,
                                      const RelationThresholds &thresholds);
std::vector<Candidate> ApplyThreshold(std::span<const Candidate> candidates,
                                      double threshold);

// For numeric relations keeps only candidates whose surface is a run of
// ASCII digits, rewritten without leading zeros; other relations pass
// through. Duplicates after canonicalization keep the first occurrence.
std::vector<Candidate> ValidateNumeric(std::span<const Candidate> candidates,
                                       std::string_view relation,
                                       const RelationSchema &schema);

// Canonical decimal form, or nullopt when the text is not a non-negative
// integer.
std::optional<std::string> CanonicalInteger(std::string_view text);

// Surface -> entity id lookup.
class Resolver {
 public:
  virtual ~Resolver() = default;
  // nullopt when not found. Transport failures throw ResolverTransportError.
  virtual std::optional<std::string> Resolve(std::string_view surface) = 0;
};

class ResolverTransportError : public Error {
 public:
  using Error::Error;
};

class TableResolver : public Resolver {
 public:
  TableResolver() = default;
  explicit TableResolver(std::map<std::string, std::string> table)
      : table_(std::move(table)) {}
  // Entity ids recorded on vocabulary atoms.
  static TableResolver FromVocabulary(const Vocabulary &vocab);

  void Add(std::string surface, std::string id) {
    table_[std::move(surface)] = std::move(id);
  }
  std::optional<std::string> Resolve(std::string_view surface) override;

 private:
  std::map<std::string, std::string> table_;
};

// Tries each resolver in order; the first hit wins.
class ChainResolver : public Resolver {
 public:
  explicit ChainResolver(std::vector<Resolver *> resolvers)
      : resolvers_(std::move(resolvers)) {}
  std::optional<std::string> Resolve(std::string_view surface) override;

 private:
  std::vector<Resolver *> resolvers_;
};

// Fills entity_id where the resolver knows the surface. Unresolved candidates
// are kept with no id; integer surfaces are left untouched.
std::vector<Candidate> Disambiguate(std::span<const Candidate> candidates,
                                    Resolver &resolver);

// A validation query with its ranked candidates, for threshold selection.
struct ScoredQuery {
  std::string relation;
  std::vector<std::string> gold;
  std::vector<Candidate> candidates;
};

// Default sweep grid: 0.01, 0.02, ..., 0.99.
std::vector<double> DefaultThresholdGrid();

// For every relation picks the grid value with the highest mean per-sample
// F1; ties go to the smallest threshold. Relations absent from the queries
// get the median of the chosen thresholds.
RelationThresholds SweepThresholds(std::span<const ScoredQuery> queries,
                                   std::span<const double> grid,
                                   const RelationSchema &schema);

RelationThresholds SweepThresholds(const MlmModel &model,
                                   const Vocabulary &vocab,
                                   std::span<const TripleSample> validation,
                                   const TemplateSet &templates,
                                   std::span<const double> grid,
                                   const RelationSchema &schema,
                                   const PredictOptions &options);

// Candidates -> threshold -> numeric check, the object set that is scored.
std::vector<Candidate> SelectObjects(std::span<const Candidate> candidates,
                                     std::string_view relation,
                                     double threshold,
                                     const RelationSchema &schema);

struct Prediction {
  std::string subject;
  std::string relation;
  std::vector<Candidate> objects;
};

// Predictions JSON Lines with ObjectEntities, ObjectEntitiesID and Scores.
std::string SerializePredictions(std::span<const Prediction> predictions);

}  // namespace atomlm

#endif  // ATOMLM_INFERENCE_H_

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

#include "atomlm/inference.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "json.hpp"
#include "atomlm/evaluation.h"
#include "atomlm/util.h"

namespace atomlm {

namespace {

// F1 values closer than this are treated as tied.
constexpr double kF1TieTolerance = 1e-12;

bool CandidateBefore(const Candidate &a, const Candidate &b) {
  if (a.score != b.score) return a.score > b.score;
  return a.token_id < b.token_id;
}

}  // namespace

std::vector<Candidate> PredictCandidates(const MlmModel &model,
                                         const Vocabulary &vocab,
                                         std::string_view subject,
                                         std::string_view relation,
                                         const TemplateSet &templates,
                                         const PredictOptions &options,
                                         const RelationSchema *schema) {
  if (options.top_k < 1) throw Error("top_k must be at least 1");
  if (static_cast<size_t>(model.config.vocab_size) != vocab.size()) {
    throw Error("model and vocabulary sizes differ");
  }
  const PromptTemplate &tmpl = TemplateFor(templates, relation);
  TokenSequence seq = Tokenize(tmpl.Instantiate(subject, "[MASK]"), vocab, true);
  if (seq.mask_positions.size() != 1) {
    throw Error("prompt for " + std::string(relation) +
                " must contain exactly one mask");
  }
  Matrix<float> states = EncodeSequence(model, seq);
  Matrix<float> logits =
      states.row(static_cast<Eigen::Index>(seq.mask_positions.front())) *
          model.params.output_projection.transpose() +
      model.params.output_bias;
  std::vector<double> z(logits.data(), logits.data() + logits.size());
  std::vector<double> scores = options.raw_logits ? z : Softmax(z);

  const RelationInfo *info = nullptr;
  if (options.type_filter) {
    if (schema == nullptr) throw Error("type_filter needs a relation schema");
    info = &schema->Get(relation);
  }

  std::vector<Candidate> cands;
  cands.reserve(vocab.size());
  for (size_t id = 0; id < vocab.size(); ++id) {
    const auto tid = static_cast<TokenId>(id);
    if (options.skip_special && vocab.IsSpecial(tid)) continue;
    const VocabEntry &e = vocab.entry(tid);
    if (info != nullptr) {
      if (info->numeric) {
        if (!CanonicalInteger(e.surface)) continue;
      } else if (e.kind != TokenKind::kEntity ||
                 e.entity_type != info->object_type) {
        continue;
      }
    }
    cands.push_back({e.surface, tid, scores[id], e.entity_id});
  }
  const size_t keep = std::min(options.top_k, cands.size());
  std::partial_sort(cands.begin(), cands.begin() + keep, cands.end(),
                    CandidateBefore);
  cands.resize(keep);
  // entity ids are filled by Disambiguate, not copied from the vocabulary.
  for (Candidate &c : cands) c.entity_id.reset();
  return cands;
}

double RelationThresholds::For(std::string_view relation) const {
  auto it = per_relation.find(std::string(relation));
  return it == per_relation.end() ? default_threshold : it->second;
}

std::string RelationThresholds::Serialize() const {
  nlohmann::ordered_json j;
  for (const auto &[relation, t] : per_relation) j[relation] = t;
  j["__default__"] = default_threshold;
  return j.dump(2) + "\n";
}

RelationThresholds RelationThresholds::Parse(std::string_view json_text) {
  auto j = nlohmann::json::parse(json_text);
  RelationThresholds out;
  for (const auto &[key, value] : j.items()) {
    double t = value.get<double>();
    if (!std::isfinite(t)) throw Error("non-finite threshold for " + key);
    if (key == "__default__") {
      out.default_threshold = t;
    } else {
      out.per_relation[key] = t;
    }
  }
  return out;
}

std::vector<Candidate> ApplyThreshold(std::span<const Candidate> candidates,
                                      double threshold) {
  std::vector<Candidate> out;
  for (const Candidate &c : candidates) {
    if (c.score >= threshold) out.push_back(c);
  }
  return out;
}

std::vector<Candidate> ApplyThreshold(std::span<const Candidate> candidates,
                                      std::string_view relation,
                                      const RelationThresholds &thresholds) {
  return ApplyThreshold(candidates, thresholds.For(relation));
}

std::optional<std::string> CanonicalInteger(std::string_view text) {
  if (text.empty()) return std::nullopt;
  for (char c : text) {
    if (c < '0' || c > '9') return std::nullopt;
  }
  size_t first = text.find_first_not_of('0');
  if (first == std::string_view::npos) return std::string("0");
  return std::string(text.substr(first));
}

std::vector<Candidate> ValidateNumeric(std::span<const Candidate> candidates,
                                       std::string_view relation,
                                       const RelationSchema &schema) {
  if (!schema.IsNumeric(relation)) {
    return {candidates.begin(), candidates.end()};
  }
  std::vector<Candidate> out;
  std::set<std::string> seen;
  for (const Candidate &c : candidates) {
    auto canonical = CanonicalInteger(c.surface);
    if (!canonical || !seen.insert(*canonical).second) continue;
    Candidate kept = c;
    kept.surface = *canonical;
    out.push_back(std::move(kept));
  }
  return out;
}

TableResolver TableResolver::FromVocabulary(const Vocabulary &vocab) {
  TableResolver resolver;
  for (const VocabEntry &e : vocab.entries()) {
    if (e.kind == TokenKind::kEntity && e.entity_id) {
      resolver.Add(e.surface, *e.entity_id);
    }
  }
  return resolver;
}

std::optional<std::string> TableResolver::Resolve(std::string_view surface) {
  auto it = table_.find(std::string(surface));
  if (it == table_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> ChainResolver::Resolve(std::string_view surface) {
  for (Resolver *r : resolvers_) {
    if (auto id = r->Resolve(surface)) return id;
  }
  return std::nullopt;
}

std::vector<Candidate> Disambiguate(std::span<const Candidate> candidates,
                                    Resolver &resolver) {
  std::vector<Candidate> out;
  out.reserve(candidates.size());
  for (const Candidate &c : candidates) {
    Candidate resolved = c;
    if (!CanonicalInteger(c.surface)) resolved.entity_id = resolver.Resolve(c.surface);
    out.push_back(std::move(resolved));
  }
  return out;
}

std::vector<double> DefaultThresholdGrid() {
  std::vector<double> grid;
  for (int k = 1; k <= 99; ++k) grid.push_back(k / 100.0);
  return grid;
}

std::vector<Candidate> SelectObjects(std::span<const Candidate> candidates,
                                     std::string_view relation,
                                     double threshold,
                                     const RelationSchema &schema) {
  auto kept = ApplyThreshold(candidates, threshold);
  return ValidateNumeric(kept, relation, schema);
}

RelationThresholds SweepThresholds(std::span<const ScoredQuery> queries,
                                   std::span<const double> grid,
                                   const RelationSchema &schema) {
  if (queries.empty()) throw Error("empty validation");
  if (grid.empty()) throw Error("empty threshold grid");
  std::vector<double> sorted(grid.begin(), grid.end());
  for (double t : sorted) {
    if (!std::isfinite(t)) throw Error("non-finite threshold in grid");
  }
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  std::map<std::string, std::vector<const ScoredQuery *>> by_relation;
  for (const ScoredQuery &q : queries) by_relation[q.relation].push_back(&q);

  RelationThresholds out;
  std::vector<double> chosen;
  for (const auto &[relation, list] : by_relation) {
    double best_t = sorted.front();
    double best_f1 = -1.0;
    for (double t : sorted) {
      double total = 0.0;
      for (const ScoredQuery *q : list) {
        std::vector<std::string> predicted;
        for (const Candidate &c : SelectObjects(q->candidates, relation, t, schema)) {
          predicted.push_back(c.surface);
        }
        total += ScoreSample(predicted, q->gold).f1;
      }
      double f1 = total / static_cast<double>(list.size());
      if (f1 > best_f1 + kF1TieTolerance) {
        best_f1 = f1;
        best_t = t;
      }
    }
    out.per_relation[relation] = best_t;
    chosen.push_back(best_t);
  }
  std::sort(chosen.begin(), chosen.end());
  const size_t mid = chosen.size() / 2;
  out.default_threshold = chosen.size() % 2 == 1
                              ? chosen[mid]
                              : 0.5 * (chosen[mid - 1] + chosen[mid]);
  return out;
}

RelationThresholds SweepThresholds(const MlmModel &model,
                                   const Vocabulary &vocab,
                                   std::span<const TripleSample> validation,
                                   const TemplateSet &templates,
                                   std::span<const double> grid,
                                   const RelationSchema &schema,
                                   const PredictOptions &options) {
  std::vector<ScoredQuery> queries;
  queries.reserve(validation.size());
  for (const TripleSample &s : validation) {
    queries.push_back({s.relation, s.objects,
                       PredictCandidates(model, vocab, s.subject, s.relation,
                                         templates, options, &schema)});
  }
  return SweepThresholds(queries, grid, schema);
}

std::string SerializePredictions(std::span<const Prediction> predictions) {
  std::string out;
  for (const Prediction &p : predictions) {
    nlohmann::ordered_json j;
    j["SubjectEntity"] = p.subject;
    j["Relation"] = p.relation;
    auto objects = nlohmann::ordered_json::array();
    auto ids = nlohmann::ordered_json::array();
    auto scores = nlohmann::ordered_json::array();
    for (const Candidate &c : p.objects) {
      objects.push_back(c.surface);
      ids.push_back(c.entity_id ? nlohmann::ordered_json(*c.entity_id)
                                : nlohmann::ordered_json());
      scores.push_back(c.score);
    }
    j["ObjectEntities"] = std::move(objects);
    j["ObjectEntitiesID"] = std::move(ids);
    j["Scores"] = std::move(scores);
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace atomlm

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

#ifndef ATOMLM_TESTS_TEST_FIXTURES_H_
#define ATOMLM_TESTS_TEST_FIXTURES_H_

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "atomlm/inference.h"
#include "atomlm/model.h"
#include "atomlm/schema.h"
#include "atomlm/tokenizer.h"
#include "atomlm/util.h"
#include "atomlm/vocabulary.h"

namespace atomlm::testing_fixtures {

inline std::filesystem::path DataDir() { return ATOMLM_TEST_DATA_DIR; }

inline std::vector<std::string> FixtureCorpus() {
  return {"Canada borders Greenland.",
          "Canada shares borders with the United States of America.",
          "Greenland is an island north of Canada.",
          "The official language of Canada is English and French.",
          "Paris is a city with 62 bridges and 3 rivers."};
}

// Base vocabulary over the fixture corpus.
inline Vocabulary FixtureBaseVocab() {
  auto corpus = FixtureCorpus();
  return BuildBaseVocab(corpus, 80);
}

// Base vocabulary plus three country atoms and one language atom.
inline Vocabulary FixtureVocab() {
  std::vector<EntityInput> atoms = {
      {"Canada", "Country", "Q16"},
      {"Greenland", "Country", "Q223"},
      {"United States of America", "Country", "Q30"},
      {"English", "Language", "Q1860"},
  };
  return AddEntityAtoms(FixtureBaseVocab(), atoms).vocab;
}

inline ModelConfig TinyConfig(int vocab_size, uint64_t seed = 1) {
  ModelConfig c;
  c.hidden = 16;
  c.layers = 1;
  c.heads = 2;
  c.ff_width = 32;
  c.max_seq_len = 32;
  c.vocab_size = vocab_size;
  c.seed = seed;
  return c;
}

struct GradCheckResult {
  double max_relative_error = 0.0;
  size_t coordinates = 0;
};

// Central differences against LossAndGradient on `samples` random
// coordinates drawn across all tensors. Relative error is
// |a - n| / max(|a|, |n|, floor) so coordinates with a vanishing gradient
// are judged on an absolute scale.
inline GradCheckResult GradientCheck(const BasicModel<double> &model,
                                     const TokenSequence &seq,
                                     const std::vector<MaskTarget> &targets,
                                     size_t samples, double step,
                                     uint64_t seed, double floor = 1e-6) {
  ModelParams<double> grad = model.params.ZerosLike();
  LossAndGradient<double>(model, seq, targets, 1.0, &grad);

  std::vector<std::pair<std::string, size_t>> tensors;
  model.params.ForEach([&](const std::string &name, const Matrix<double> &m) {
    tensors.emplace_back(name, static_cast<size_t>(m.size()));
  });
  Rng rng(seed);
  GradCheckResult result;
  for (size_t s = 0; s < samples; ++s) {
    const auto &[name, size] = tensors[rng.Uniform(tensors.size())];
    const size_t index = rng.Uniform(size);
    auto loss_at = [&](double delta) {
      BasicModel<double> copy = model;
      copy.params.ForEach([&](const std::string &n, Matrix<double> &m) {
        if (n == name) m.data()[index] += delta;
      });
      return MlmLoss<double>(copy, seq, targets);
    };
    const double numeric = (loss_at(step) - loss_at(-step)) / (2.0 * step);
    double analytic = 0.0;
    grad.ForEach([&](const std::string &n, const Matrix<double> &m) {
      if (n == name) analytic = m.data()[index];
    });
    const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
    result.max_relative_error =
        std::max(result.max_relative_error, std::abs(analytic - numeric) / scale);
    ++result.coordinates;
  }
  return result;
}

// Set F1 written out directly from the counting definition.
inline double PlainF1(const std::set<std::string> &pred,
                      const std::set<std::string> &gold) {
  if (pred.empty() && gold.empty()) return 1.0;
  if (pred.empty() || gold.empty()) return 0.0;
  double hit = 0;
  for (const auto &p : pred) hit += gold.count(p);
  if (hit == 0) return 0.0;
  const double precision = hit / pred.size(), recall = hit / gold.size();
  return 2 * precision * recall / (precision + recall);
}

// Exhaustive threshold choice: scores every grid value for every relation
// and keeps the first value reaching the maximum in ascending order.
inline std::map<std::string, double> BruteForceThresholds(
    const std::vector<ScoredQuery> &queries, std::vector<double> grid,
    const RelationSchema &schema) {
  std::sort(grid.begin(), grid.end());
  std::set<std::string> relations;
  for (const auto &q : queries) relations.insert(q.relation);
  std::map<std::string, double> out;
  for (const auto &relation : relations) {
    std::vector<double> f1s;
    for (double t : grid) {
      double total = 0;
      size_t n = 0;
      for (const auto &q : queries) {
        if (q.relation != relation) continue;
        std::set<std::string> pred;
        for (const auto &c : q.candidates) {
          if (c.score < t) continue;
          if (schema.IsNumeric(relation)) {
            bool digits = !c.surface.empty() &&
                          std::all_of(c.surface.begin(), c.surface.end(),
                                      [](char ch) { return ch >= '0' && ch <= '9'; });
            if (!digits) continue;
            std::string canon = c.surface;
            canon.erase(0, std::min(canon.find_first_not_of('0'), canon.size() - 1));
            pred.insert(canon);
          } else {
            pred.insert(c.surface);
          }
        }
        total += PlainF1(pred, std::set<std::string>(q.gold.begin(), q.gold.end()));
        ++n;
      }
      f1s.push_back(total / n);
    }
    const double best = *std::max_element(f1s.begin(), f1s.end());
    for (size_t i = 0; i < grid.size(); ++i) {
      if (std::abs(f1s[i] - best) <= 1e-12) {
        out[relation] = grid[i];
        break;
      }
    }
  }
  return out;
}

// Three relations, one numeric, with random candidate scores on a coarse
// grid so that ties between thresholds are common.
inline std::vector<ScoredQuery> ThreeRelationFixture(uint64_t seed) {
  Rng rng(seed);
  const std::vector<std::string> countries = {"Canada", "Greenland", "Iceland",
                                              "Norway", "Chile", "Peru"};
  const std::vector<std::string> languages = {"English", "French", "Spanish",
                                              "Norwegian", "Danish"};
  const std::vector<std::string> numbers = {"0", "1", "2", "3", "03", "three"};
  auto pick = [&](const std::vector<std::string> &pool, size_t max_n) {
    std::set<std::string> out;
    const size_t n = rng.Uniform(max_n + 1);
    for (size_t i = 0; i < n; ++i) out.insert(pool[rng.Uniform(pool.size())]);
    return std::vector<std::string>(out.begin(), out.end());
  };
  std::vector<ScoredQuery> queries;
  const std::vector<std::pair<std::string, const std::vector<std::string> *>> rels = {
      {"CountryBordersCountry", &countries},
      {"CountryHasOfficialLanguage", &languages},
      {"PersonHasNumberOfChildren", &numbers}};
  for (const auto &[relation, pool] : rels) {
    for (int q = 0; q < 8; ++q) {
      ScoredQuery sq;
      sq.relation = relation;
      sq.gold = pick(*pool, 2);
      if (relation == "PersonHasNumberOfChildren") {
        for (auto &g : sq.gold) {
          if (g == "03") g = "3";
          if (g == "three") g = "2";
        }
        std::sort(sq.gold.begin(), sq.gold.end());
        sq.gold.erase(std::unique(sq.gold.begin(), sq.gold.end()), sq.gold.end());
      }
      for (size_t i = 0; i < pool->size(); ++i) {
        Candidate c;
        c.surface = (*pool)[i];
        c.token_id = static_cast<TokenId>(10 + i);
        c.score = static_cast<double>(rng.Uniform(11)) / 10.0;
        sq.candidates.push_back(c);
      }
      queries.push_back(std::move(sq));
    }
  }
  return queries;
}

}  // namespace atomlm::testing_fixtures

#endif  // ATOMLM_TESTS_TEST_FIXTURES_H_

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

#ifndef ATOMLM_EVALUATION_H_
#define ATOMLM_EVALUATION_H_

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "atomlm/dataset.h"

namespace atomlm {

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  size_t support = 0;
};

// Set-based P/R/F1 with the LM-KBC conventions: surfaces are trimmed and
// compared exactly; an empty prediction has precision 1 only when the gold
// set is empty too; an empty gold set gives recall 1; F1 is 0 when P + R = 0.
Metrics ScoreSample(std::span<const std::string> predicted,
                    std::span<const std::string> gold);

struct ScoreOptions {
  // Compare ObjectEntitiesID instead of surfaces.
  bool match_on_id = false;
};

struct RunReport {
  // Mean of per-sample metrics within each relation.
  std::map<std::string, Metrics> per_relation;
  // Unweighted mean over relations.
  Metrics overall;
  std::vector<std::string> warnings;
};

// Aligns predictions with gold on (SubjectEntity, Relation). Gold keys with no
// prediction score as empty predictions; duplicate keys are an error.
RunReport ScoreRun(std::span<const TripleSample> predictions,
                   std::span<const TripleSample> gold,
                   const ScoreOptions &options = {});
RunReport ScoreRunFiles(const std::filesystem::path &predictions,
                        const std::filesystem::path &gold,
                        const ScoreOptions &options = {});

// One row per relation plus "Average".
std::string RenderTable(const RunReport &report);
std::string RenderCsv(const RunReport &report);
std::string RenderJson(const RunReport &report);

}  // namespace atomlm

#endif  // ATOMLM_EVALUATION_H_

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

#ifndef ATOMLM_RECODE_H_
#define ATOMLM_RECODE_H_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "atomlm/model.h"
#include "atomlm/util.h"
#include "atomlm/vocabulary.h"

namespace atomlm {

struct RecodeEntry {
  TokenId atom_id = 0;
  std::vector<TokenId> constituents;
  std::string surface;
  bool operator==(const RecodeEntry &) const = default;
};

struct RecodePlan {
  std::vector<RecodeEntry> entries;
};

// Raised when the constituent mean cancels to the zero vector.
class DegenerateRecode : public Error {
 public:
  using Error::Error;
};

// Mean of the rows, scaled to unit L2 norm. Accumulates in double.
std::vector<float> RecodeVector(std::span<const std::vector<float>> rows);

// Plan covering every vocabulary id in [old_v, vocab.size()).
RecodePlan MakeRecodePlan(const Vocabulary &vocab, int old_v);

enum class NewRowInit {
  kRecode,      // normalized constituent mean
  kRandomUnit,  // seeded random direction with unit norm
};

struct ExpandResult {
  MlmModel model;
  // Surfaces whose recode was degenerate and fell back to random init.
  std::vector<std::string> warnings;
};

// Resizes the model to cover the plan's atoms and seeds the new input rows,
// output rows and biases. Rows below the old vocabulary size are untouched.
ExpandResult ExpandModel(const MlmModel &model, const RecodePlan &plan,
                         NewRowInit init = NewRowInit::kRecode,
                         uint64_t seed = 0);

// Plan as JSON Lines: {"surface", "atom_id", "constituents"} per entry.
std::string SerializeRecodePlan(const RecodePlan &plan);
RecodePlan ParseRecodePlan(std::string_view jsonl);

}  // namespace atomlm

#endif  // ATOMLM_RECODE_H_

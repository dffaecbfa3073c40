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

#ifndef ATOMLM_DATASET_H_
#define ATOMLM_DATASET_H_

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace atomlm {

// One subject-relation query with its (possibly empty) gold object set.
struct TripleSample {
  std::string subject;
  std::string relation;
  std::vector<std::string> objects;
  // Parallel to objects when the file carries ObjectEntitiesID.
  std::vector<std::optional<std::string>> object_ids;

  bool operator==(const TripleSample &) const = default;
};

// Challenge-style JSON Lines:
//   {"SubjectEntity": str, "Relation": str, "ObjectEntities": [str, ...]}
// with an optional parallel "ObjectEntitiesID" array.
std::vector<TripleSample> ParseSamples(std::string_view jsonl);
std::vector<TripleSample> LoadSamples(const std::filesystem::path &path);
std::string SerializeSamples(std::span<const TripleSample> samples);

}  // namespace atomlm

#endif  // ATOMLM_DATASET_H_

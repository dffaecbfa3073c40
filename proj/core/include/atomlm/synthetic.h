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

#ifndef ATOMLM_SYNTHETIC_H_
#define ATOMLM_SYNTHETIC_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "atomlm/dataset.h"
#include "atomlm/entities.h"

namespace atomlm {

// A small invented world: countries that border each other, their official
// languages, and people with a number of children. Every fact is stated in
// the corpus several times in different words.
struct SyntheticOptions {
  uint64_t seed = 7;
  size_t countries = 20;
  size_t languages = 10;
  size_t persons = 20;
  size_t sentences = 2000;
  double filler_fraction = 0.2;
  // Subject share of the train and validation splits; the rest is test.
  double train_fraction = 0.6;
  double validation_fraction = 0.2;
};

struct SyntheticWorld {
  std::vector<std::string> corpus;
  std::vector<TripleSample> train;
  std::vector<TripleSample> validation;
  std::vector<TripleSample> test;
  // Every entity of the world with its id, as a knowledge-graph dump.
  std::vector<EntityRecord> entities;
  std::map<std::string, std::string> templates;
  std::string schema_json;
};

SyntheticWorld GenerateWorld(const SyntheticOptions &options);

// Writes corpus.txt, train/validation/test.jsonl, entities.jsonl,
// templates.json and schema.json into dir.
void WriteWorld(const SyntheticWorld &world, const std::filesystem::path &dir);

}  // namespace atomlm

#endif  // ATOMLM_SYNTHETIC_H_

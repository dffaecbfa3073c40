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

#ifndef ATOMLM_ENTITIES_H_
#define ATOMLM_ENTITIES_H_

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "atomlm/dataset.h"
#include "atomlm/schema.h"
#include "atomlm/tokenizer.h"

namespace atomlm {

enum class EntitySource { kDataset, kKgDump };

struct EntityRecord {
  std::string surface;
  std::string entity_type;
  std::optional<std::string> entity_id;
  EntitySource source = EntitySource::kDataset;

  bool operator==(const EntityRecord &) const = default;
};

// Types every subject by its relation's subject type and every gold object by
// the object type. Numeric object types are dropped. Output is deduplicated on
// (surface, type) and sorted by surface, then type.
std::vector<EntityRecord> HarvestEntities(std::span<const TripleSample> samples,
                                          const RelationSchema &schema);
std::vector<EntityRecord> HarvestEntities(
    std::span<const std::filesystem::path> splits, const RelationSchema &schema);

struct MergeResult {
  std::vector<EntityRecord> records;
  std::map<std::string, size_t> type_counts;
  size_t skipped = 0;
};

// Unions a knowledge-graph entity dump into the records. Rows that do not
// parse, lack a surface, or carry a type outside the schema are skipped and
// counted.
MergeResult MergeKgDumpText(std::vector<EntityRecord> records,
                            std::string_view dump_jsonl,
                            const RelationSchema &schema);
MergeResult MergeKgDump(std::vector<EntityRecord> records,
                        const std::filesystem::path &dump,
                        const RelationSchema &schema);

// Count of distinct (surface, type) pairs per type.
std::map<std::string, size_t> CountTypes(std::span<const EntityRecord> records);

// Dump format shared with vocabulary entity lines:
//   {"surface", "kind": "entity", "type", "entity_id"}
std::string SerializeEntityDump(std::span<const EntityRecord> records);

// Entity inputs for AddEntityAtoms, one per distinct surface. When a surface
// carries several types the first in sorted order is kept.
std::vector<EntityInput> ToEntityInputs(std::span<const EntityRecord> records);

}  // namespace atomlm

#endif  // ATOMLM_ENTITIES_H_

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

#ifndef ATOMLM_SCHEMA_H_
#define ATOMLM_SCHEMA_H_

#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>

namespace atomlm {

struct RelationInfo {
  std::string subject_type;
  std::string object_type;
  bool numeric = false;
  bool operator==(const RelationInfo &) const = default;
};

// Relation name -> (subject type, object type, numeric range).
class RelationSchema {
 public:
  std::map<std::string, RelationInfo> relations;

  // Throws Error naming the relation when it is not in the schema.
  const RelationInfo &Get(std::string_view relation) const;
  bool Contains(std::string_view relation) const;
  bool IsNumeric(std::string_view relation) const;
  // Every type used as a subject or object type.
  std::set<std::string> EntityTypes() const;
  // Object types of numeric relations.
  std::set<std::string> NumericTypes() const;
};

// The 21 relation names of the LM-KBC 2023 challenge.
std::span<const std::string_view> ChallengeRelations();

// JSON object: relation -> {"subject_type", "object_type", "numeric"}.
// Unknown or duplicate relation keys raise an Error with the line number.
RelationSchema ParseSchema(std::string_view text);
RelationSchema LoadSchema(const std::filesystem::path &path);

}  // namespace atomlm

#endif  // ATOMLM_SCHEMA_H_

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

#include "atomlm/entities.h"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <set>
#include <tuple>

#include "json.hpp"
#include "atomlm/util.h"

namespace atomlm {

namespace {

bool RecordLess(const EntityRecord &a, const EntityRecord &b) {
  return std::tie(a.surface, a.entity_type) < std::tie(b.surface, b.entity_type);
}

bool SameKey(const EntityRecord &a, const EntityRecord &b) {
  return a.surface == b.surface && a.entity_type == b.entity_type;
}

// Sorts and keeps the first record per (surface, type); a record with an
// entity id wins over one without.
void SortUnique(std::vector<EntityRecord> *records) {
  std::stable_sort(records->begin(), records->end(), RecordLess);
  std::vector<EntityRecord> out;
  for (EntityRecord &r : *records) {
    if (!out.empty() && SameKey(out.back(), r)) {
      if (!out.back().entity_id && r.entity_id) out.back().entity_id = r.entity_id;
      continue;
    }
    out.push_back(std::move(r));
  }
  *records = std::move(out);
}

}  // namespace

std::vector<EntityRecord> HarvestEntities(std::span<const TripleSample> samples,
                                          const RelationSchema &schema) {
  const std::set<std::string> numeric_types = schema.NumericTypes();
  std::vector<EntityRecord> records;
  for (const TripleSample &s : samples) {
    const RelationInfo &info = schema.Get(s.relation);
    std::string subject(Trim(s.subject));
    if (!subject.empty()) {
      records.push_back({subject, info.subject_type, std::nullopt,
                         EntitySource::kDataset});
    }
    if (info.numeric || numeric_types.contains(info.object_type)) continue;
    for (size_t k = 0; k < s.objects.size(); ++k) {
      std::string object(Trim(s.objects[k]));
      if (object.empty()) continue;
      std::optional<std::string> id;
      if (k < s.object_ids.size()) id = s.object_ids[k];
      records.push_back({object, info.object_type, id, EntitySource::kDataset});
    }
  }
  SortUnique(&records);
  return records;
}

std::vector<EntityRecord> HarvestEntities(
    std::span<const std::filesystem::path> splits,
    const RelationSchema &schema) {
  std::vector<TripleSample> all;
  for (const auto &path : splits) {
    auto samples = LoadSamples(path);
    all.insert(all.end(), samples.begin(), samples.end());
  }
  return HarvestEntities(all, schema);
}

std::map<std::string, size_t> CountTypes(std::span<const EntityRecord> records) {
  std::set<std::pair<std::string, std::string>> distinct;
  for (const EntityRecord &r : records) distinct.emplace(r.entity_type, r.surface);
  std::map<std::string, size_t> counts;
  for (const auto &[type, surface] : distinct) ++counts[type];
  return counts;
}

MergeResult MergeKgDumpText(std::vector<EntityRecord> records,
                            std::string_view dump_jsonl,
                            const RelationSchema &schema) {
  const std::set<std::string> types = schema.EntityTypes();
  const std::set<std::string> numeric_types = schema.NumericTypes();
  MergeResult result;
  size_t pos = 0;
  size_t line_no = 0;
  while (pos < dump_jsonl.size()) {
    size_t eol = dump_jsonl.find('\n', pos);
    if (eol == std::string_view::npos) eol = dump_jsonl.size();
    std::string_view line = Trim(dump_jsonl.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (line.empty()) continue;
    auto skip = [&](const std::string &why) {
      spdlog::warn("entity dump line {}: {}; skipped", line_no, why);
      ++result.skipped;
    };
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      skip("not a JSON object");
      continue;
    }
    if (!j.contains("surface") || !j["surface"].is_string() ||
        Trim(j["surface"].get<std::string>()).empty()) {
      skip("missing surface");
      continue;
    }
    if (!j.contains("type") || !j["type"].is_string() ||
        !types.contains(j["type"].get<std::string>())) {
      skip("type not in schema");
      continue;
    }
    EntityRecord r;
    r.surface = std::string(Trim(j["surface"].get<std::string>()));
    r.entity_type = j["type"].get<std::string>();
    if (numeric_types.contains(r.entity_type)) continue;
    if (j.contains("entity_id") && j["entity_id"].is_string()) {
      r.entity_id = j["entity_id"].get<std::string>();
    }
    r.source = EntitySource::kKgDump;
    records.push_back(std::move(r));
  }
  SortUnique(&records);
  result.type_counts = CountTypes(records);
  result.records = std::move(records);
  return result;
}

MergeResult MergeKgDump(std::vector<EntityRecord> records,
                        const std::filesystem::path &dump,
                        const RelationSchema &schema) {
  return MergeKgDumpText(std::move(records), ReadFile(dump), schema);
}

std::string SerializeEntityDump(std::span<const EntityRecord> records) {
  std::string out;
  for (const EntityRecord &r : records) {
    nlohmann::ordered_json j;
    j["surface"] = r.surface;
    j["kind"] = "entity";
    j["type"] = r.entity_type;
    j["entity_id"] =
        r.entity_id ? nlohmann::ordered_json(*r.entity_id) : nlohmann::ordered_json();
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<EntityInput> ToEntityInputs(std::span<const EntityRecord> records) {
  std::vector<EntityRecord> sorted(records.begin(), records.end());
  std::stable_sort(sorted.begin(), sorted.end(), RecordLess);
  std::vector<EntityInput> out;
  std::set<std::string> seen;
  for (const EntityRecord &r : sorted) {
    if (!seen.insert(r.surface).second) continue;
    out.push_back({r.surface, r.entity_type, r.entity_id.value_or("")});
  }
  return out;
}

}  // namespace atomlm

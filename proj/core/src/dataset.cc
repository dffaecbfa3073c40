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

#include "atomlm/dataset.h"

#include "json.hpp"
#include "atomlm/util.h"

namespace atomlm {

std::vector<TripleSample> ParseSamples(std::string_view jsonl) {
  std::vector<TripleSample> samples;
  size_t pos = 0;
  size_t line_no = 0;
  while (pos < jsonl.size()) {
    size_t eol = jsonl.find('\n', pos);
    if (eol == std::string_view::npos) eol = jsonl.size();
    std::string_view line = Trim(jsonl.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (line.empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      TripleSample s;
      s.subject = j.at("SubjectEntity").get<std::string>();
      s.relation = j.at("Relation").get<std::string>();
      for (const auto &o : j.at("ObjectEntities")) {
        s.objects.push_back(o.get<std::string>());
      }
      if (j.contains("ObjectEntitiesID") && j["ObjectEntitiesID"].is_array()) {
        for (const auto &id : j["ObjectEntitiesID"]) {
          if (id.is_string() && !id.get<std::string>().empty()) {
            s.object_ids.emplace_back(id.get<std::string>());
          } else {
            s.object_ids.emplace_back(std::nullopt);
          }
        }
        if (s.object_ids.size() != s.objects.size()) {
          throw Error("ObjectEntitiesID length differs from ObjectEntities");
        }
      }
      samples.push_back(std::move(s));
    } catch (const nlohmann::json::exception &e) {
      throw Error("malformed dataset line " + std::to_string(line_no) + ": " +
                  e.what());
    } catch (const Error &e) {
      throw Error("malformed dataset line " + std::to_string(line_no) + ": " +
                  e.what());
    }
  }
  return samples;
}

std::vector<TripleSample> LoadSamples(const std::filesystem::path &path) {
  try {
    return ParseSamples(ReadFile(path));
  } catch (const Error &e) {
    throw Error(path.string() + ": " + e.what());
  }
}

std::string SerializeSamples(std::span<const TripleSample> samples) {
  std::string out;
  for (const TripleSample &s : samples) {
    nlohmann::ordered_json j;
    j["SubjectEntity"] = s.subject;
    j["Relation"] = s.relation;
    j["ObjectEntities"] = s.objects;
    if (!s.object_ids.empty()) {
      auto ids = nlohmann::ordered_json::array();
      for (const auto &id : s.object_ids) {
        ids.push_back(id ? nlohmann::ordered_json(*id) : nlohmann::ordered_json());
      }
      j["ObjectEntitiesID"] = std::move(ids);
    }
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace atomlm

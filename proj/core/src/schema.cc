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

#include "atomlm/schema.h"

#include <algorithm>
#include <array>
#include <vector>

#include "json.hpp"
#include "atomlm/util.h"

namespace atomlm {

namespace {

constexpr std::array<std::string_view, 21> kChallengeRelations = {
    "BandHasMember",
    "CityLocatedAtRiver",
    "CompanyHasParentOrganisation",
    "CompoundHasParts",
    "CountryBordersCountry",
    "CountryHasOfficialLanguage",
    "CountryHasStates",
    "FootballerPlaysPosition",
    "PersonCauseOfDeath",
    "PersonHasAutobiography",
    "PersonHasEmployer",
    "PersonHasNoblePrize",
    "PersonHasNumberOfChildren",
    "PersonHasPlaceOfDeath",
    "PersonHasProfession",
    "PersonHasSpouse",
    "PersonPlaysInstrument",
    "PersonSpeaksLanguage",
    "RiverBasinsCountry",
    "SeriesHasNumberOfEpisodes",
    "StateBordersState",
};

// Records top-level object keys in document order.
class TopLevelKeys : public nlohmann::json_sax<nlohmann::json> {
 public:
  std::vector<std::string> keys;

  bool null() override { return true; }
  bool boolean(bool) override { return true; }
  bool number_integer(number_integer_t) override { return true; }
  bool number_unsigned(number_unsigned_t) override { return true; }
  bool number_float(number_float_t, const string_t &) override { return true; }
  bool string(string_t &) override { return true; }
  bool binary(binary_t &) override { return true; }
  bool start_object(std::size_t) override {
    ++depth_;
    return true;
  }
  bool key(string_t &val) override {
    if (depth_ == 1) keys.push_back(val);
    return true;
  }
  bool end_object() override {
    --depth_;
    return true;
  }
  bool start_array(std::size_t) override {
    ++depth_;
    return true;
  }
  bool end_array() override {
    --depth_;
    return true;
  }
  bool parse_error(std::size_t, const std::string &,
                   const nlohmann::detail::exception &ex) override {
    throw Error(std::string("malformed schema: ") + ex.what());
  }

 private:
  int depth_ = 0;
};

// 1-based line of the nth (0-based) occurrence of "key" used as an object
// key in text.
size_t KeyLine(std::string_view text, const std::string &key, size_t nth) {
  const std::string quoted = "\"" + key + "\"";
  size_t pos = 0;
  size_t seen = 0;
  while ((pos = text.find(quoted, pos)) != std::string_view::npos) {
    size_t after = pos + quoted.size();
    while (after < text.size() && (text[after] == ' ' || text[after] == '\t' ||
                                   text[after] == '\r' || text[after] == '\n')) {
      ++after;
    }
    if (after < text.size() && text[after] == ':') {
      if (seen == nth) {
        return 1 + static_cast<size_t>(
                       std::count(text.begin(), text.begin() + pos, '\n'));
      }
      ++seen;
    }
    pos = after;
  }
  return 0;
}

}  // namespace

std::span<const std::string_view> ChallengeRelations() {
  return kChallengeRelations;
}

const RelationInfo &RelationSchema::Get(std::string_view relation) const {
  auto it = relations.find(std::string(relation));
  if (it == relations.end()) {
    throw Error("unknown relation: " + std::string(relation));
  }
  return it->second;
}

bool RelationSchema::Contains(std::string_view relation) const {
  return relations.contains(std::string(relation));
}

bool RelationSchema::IsNumeric(std::string_view relation) const {
  auto it = relations.find(std::string(relation));
  return it != relations.end() && it->second.numeric;
}

std::set<std::string> RelationSchema::EntityTypes() const {
  std::set<std::string> out;
  for (const auto &[name, info] : relations) {
    out.insert(info.subject_type);
    out.insert(info.object_type);
  }
  return out;
}

std::set<std::string> RelationSchema::NumericTypes() const {
  std::set<std::string> out;
  for (const auto &[name, info] : relations) {
    if (info.numeric) out.insert(info.object_type);
  }
  return out;
}

RelationSchema ParseSchema(std::string_view text) {
  TopLevelKeys sax;
  nlohmann::json::sax_parse(text, &sax);

  std::map<std::string, size_t> seen;
  for (const std::string &key : sax.keys) {
    size_t occurrence = seen[key]++;
    if (occurrence > 0) {
      throw Error("duplicate relation '" + key + "' at line " +
                  std::to_string(KeyLine(text, key, occurrence)));
    }
    if (std::find(kChallengeRelations.begin(), kChallengeRelations.end(),
                  key) == kChallengeRelations.end()) {
      throw Error("unknown relation '" + key + "' at line " +
                  std::to_string(KeyLine(text, key, 0)));
    }
  }

  auto root = nlohmann::json::parse(text);
  if (!root.is_object()) throw Error("schema must be a JSON object");
  RelationSchema schema;
  for (const auto &[name, value] : root.items()) {
    auto where = [&] {
      return " for relation '" + name + "' at line " +
             std::to_string(KeyLine(text, name, 0));
    };
    if (!value.is_object() || !value.contains("subject_type") ||
        !value.contains("object_type")) {
      throw Error("schema entry needs subject_type and object_type" + where());
    }
    RelationInfo info;
    info.subject_type = value["subject_type"].get<std::string>();
    info.object_type = value["object_type"].get<std::string>();
    info.numeric = value.value("numeric", false);
    schema.relations.emplace(name, std::move(info));
  }
  return schema;
}

RelationSchema LoadSchema(const std::filesystem::path &path) {
  return ParseSchema(ReadFile(path));
}

}  // namespace atomlm

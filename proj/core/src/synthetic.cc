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

#include "atomlm/synthetic.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "json.hpp"
#include "atomlm/util.h"

namespace atomlm {

namespace {

constexpr const char *kBorders = "CountryBordersCountry";
constexpr const char *kLanguage = "CountryHasOfficialLanguage";
constexpr const char *kChildren = "PersonHasNumberOfChildren";

// Pronounceable invented word, capitalized.
std::string MakeWord(Rng &rng) {
  static constexpr std::string_view kOnsets = "bdfgklmnprstvz";
  static constexpr std::string_view kVowels = "aeiou";
  static constexpr std::string_view kCodas = "lnrsx";
  std::string w;
  const size_t syllables = 2 + rng.Uniform(2);
  for (size_t i = 0; i < syllables; ++i) {
    w += kOnsets[rng.Uniform(kOnsets.size())];
    w += kVowels[rng.Uniform(kVowels.size())];
  }
  if (rng.Uniform(2) == 0) w += kCodas[rng.Uniform(kCodas.size())];
  w[0] = static_cast<char>(w[0] - 'a' + 'A');
  return w;
}

std::vector<std::string> MakeNames(Rng &rng, size_t n,
                                   std::set<std::string> *taken,
                                   const std::vector<std::string> &first_words) {
  std::vector<std::string> names;
  while (names.size() < n) {
    std::string first = first_words.empty()
                            ? MakeWord(rng)
                            : first_words[rng.Uniform(first_words.size())];
    std::string name = first + " " + MakeWord(rng);
    if (taken->insert(name).second) names.push_back(std::move(name));
  }
  return names;
}

std::string Fill(std::string_view pattern, std::string_view a,
                 std::string_view b) {
  std::string out;
  for (size_t i = 0; i < pattern.size(); ++i) {
    if (pattern.substr(i, 3) == "{a}") {
      out += a;
      i += 2;
    } else if (pattern.substr(i, 3) == "{b}") {
      out += b;
      i += 2;
    } else {
      out += pattern[i];
    }
  }
  return out;
}

const std::vector<std::string> kBorderPhrases = {
    "{a} shares a border with {b}.",
    "{a} borders {b}.",
    "The border between {a} and {b} is long.",
    "Travelers cross from {a} into {b} every day.",
    "{a} is a neighbor of {b}.",
};
const std::vector<std::string> kLanguagePhrases = {
    "The official language of {a} is {b}.",
    "{a} uses {b} as an official language.",
    "Schools in {a} teach in {b}.",
    "{b} is an official language in {a}.",
    "In {a} the government writes laws in {b}.",
};
const std::vector<std::string> kChildrenPhrases = {
    "{a} has {b} children.",
    "{a} is a parent of {b} children.",
    "The family of {a} includes {b} children.",
    "{a} raised {b} children.",
};

std::string Filler(Rng &rng) {
  static const std::vector<std::string> kAdjectives = {
      "old", "quiet", "small", "bright", "cold", "busy", "green", "narrow"};
  static const std::vector<std::string> kNouns = {
      "harbor", "market", "river", "bridge", "village", "garden", "road",
      "tower", "valley", "library"};
  static const std::vector<std::string> kVerbs = {
      "stood", "waited", "grew", "changed", "stayed", "appeared"};
  static const std::vector<std::string> kPlaces = {
      "near the hills", "after the storm", "in the spring", "during the night",
      "beside the sea", "for many years"};
  auto pick = [&](const std::vector<std::string> &v) -> const std::string & {
    return v[rng.Uniform(v.size())];
  };
  return "The " + pick(kAdjectives) + " " + pick(kNouns) + " " + pick(kVerbs) +
         " " + pick(kPlaces) + ".";
}

struct Fact {
  std::string relation;
  std::string subject;
  std::string object;
};

}  // namespace

SyntheticWorld GenerateWorld(const SyntheticOptions &options) {
  if (options.countries < 4 || options.languages < 2 || options.persons < 4) {
    throw Error("synthetic world too small");
  }
  if (options.train_fraction <= 0.0 || options.validation_fraction <= 0.0 ||
      options.train_fraction + options.validation_fraction >= 1.0) {
    throw Error("split fractions must leave room for a test split");
  }
  Rng rng(DeriveSeed(options.seed, "synthetic-world"));
  std::set<std::string> taken;
  const auto countries = MakeNames(rng, options.countries, &taken, {});
  const auto languages =
      MakeNames(rng, options.languages, &taken,
                {"Old", "High", "Low", "North", "South", "Coastal", "Upper",
                 "Lower", "East", "West"});
  const auto persons = MakeNames(rng, options.persons, &taken, {});

  SyntheticWorld world;
  std::map<std::string, std::string> ids;
  auto add_entities = [&](const std::vector<std::string> &names,
                          const std::string &type) {
    for (const std::string &name : names) {
      std::string id = "S" + std::to_string(1000 + ids.size());
      ids[name] = id;
      world.entities.push_back({name, type, id, EntitySource::kKgDump});
    }
  };
  add_entities(countries, "Country");
  add_entities(languages, "Language");
  add_entities(persons, "Person");
  std::sort(world.entities.begin(), world.entities.end(),
            [](const EntityRecord &a, const EntityRecord &b) {
              return a.surface < b.surface;
            });

  // Symmetric border graph, every country with one to three neighbors.
  const size_t nc = countries.size();
  std::vector<std::set<size_t>> neighbors(nc);
  for (size_t i = 0; i < nc; ++i) {
    const size_t want = 1 + rng.Uniform(3);
    for (int tries = 0; neighbors[i].size() < want && tries < 50; ++tries) {
      const size_t j = rng.Uniform(nc);
      if (j == i || neighbors[j].size() >= 3) continue;
      neighbors[i].insert(j);
      neighbors[j].insert(i);
    }
  }
  std::vector<std::vector<std::string>> country_langs(nc);
  for (size_t i = 0; i < nc; ++i) {
    const size_t n = 1 + rng.Uniform(2);
    std::set<size_t> picked;
    while (picked.size() < n) picked.insert(rng.Uniform(languages.size()));
    for (size_t l : picked) country_langs[i].push_back(languages[l]);
  }
  std::vector<int> children(persons.size());
  for (int &c : children) c = 1 + static_cast<int>(rng.Uniform(6));

  std::vector<Fact> facts;
  for (size_t i = 0; i < nc; ++i) {
    for (size_t j : neighbors[i]) facts.push_back({kBorders, countries[i], countries[j]});
    for (const auto &l : country_langs[i]) facts.push_back({kLanguage, countries[i], l});
  }
  for (size_t p = 0; p < persons.size(); ++p) {
    facts.push_back({kChildren, persons[p], std::to_string(children[p])});
  }

  // Corpus: each fact stated round-robin over its phrasings.
  const auto fillers = static_cast<size_t>(
      std::llround(options.filler_fraction * static_cast<double>(options.sentences)));
  const size_t fact_sentences = options.sentences > fillers ? options.sentences - fillers : 0;
  for (size_t k = 0; k < fact_sentences; ++k) {
    const Fact &f = facts[k % facts.size()];
    const size_t round = k / facts.size();
    const auto &phrases = f.relation == kBorders    ? kBorderPhrases
                          : f.relation == kLanguage ? kLanguagePhrases
                                                    : kChildrenPhrases;
    const std::string &pattern = phrases[(round + rng.Uniform(phrases.size())) % phrases.size()];
    world.corpus.push_back(Fill(pattern, f.subject, f.object));
  }
  for (size_t k = 0; k < fillers; ++k) world.corpus.push_back(Filler(rng));
  rng.Shuffle(world.corpus.begin(), world.corpus.end());

  // Subject-level splits per relation.
  auto split = [&](const std::string &relation,
                   const std::vector<std::string> &subjects,
                   const std::function<std::vector<std::string>(size_t)> &objects_of) {
    std::vector<size_t> order(subjects.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng split_rng(DeriveSeed(options.seed, "synthetic-split-" + relation));
    split_rng.Shuffle(order.begin(), order.end());
    const auto n = static_cast<double>(order.size());
    const auto n_train = static_cast<size_t>(std::llround(options.train_fraction * n));
    const auto n_val = static_cast<size_t>(std::llround(options.validation_fraction * n));
    for (size_t k = 0; k < order.size(); ++k) {
      TripleSample s;
      s.subject = subjects[order[k]];
      s.relation = relation;
      s.objects = objects_of(order[k]);
      std::sort(s.objects.begin(), s.objects.end());
      for (const auto &o : s.objects) {
        auto it = ids.find(o);
        s.object_ids.push_back(it == ids.end() ? std::nullopt
                                               : std::optional<std::string>(it->second));
      }
      auto &dest = k < n_train ? world.train
                   : k < n_train + n_val ? world.validation
                                         : world.test;
      dest.push_back(std::move(s));
    }
  };
  split(kBorders, countries, [&](size_t i) {
    std::vector<std::string> out;
    for (size_t j : neighbors[i]) out.push_back(countries[j]);
    return out;
  });
  split(kLanguage, countries, [&](size_t i) { return country_langs[i]; });
  split(kChildren, persons, [&](size_t p) {
    return std::vector<std::string>{std::to_string(children[p])};
  });

  world.templates = {
      {kBorders, "{subject} shares a border with {mask}."},
      {kLanguage, "The official language of {subject} is {mask}."},
      {kChildren, "{subject} has {mask} children."},
  };
  world.schema_json =
      "{\n"
      "  \"CountryBordersCountry\": {\"subject_type\": \"Country\", "
      "\"object_type\": \"Country\", \"numeric\": false},\n"
      "  \"CountryHasOfficialLanguage\": {\"subject_type\": \"Country\", "
      "\"object_type\": \"Language\", \"numeric\": false},\n"
      "  \"PersonHasNumberOfChildren\": {\"subject_type\": \"Person\", "
      "\"object_type\": \"Number\", \"numeric\": true}\n"
      "}\n";
  return world;
}

void WriteWorld(const SyntheticWorld &world, const std::filesystem::path &dir) {
  std::string corpus;
  for (const std::string &s : world.corpus) corpus += s + "\n";
  WriteFile(dir / "corpus.txt", corpus);
  WriteFile(dir / "train.jsonl", SerializeSamples(world.train));
  WriteFile(dir / "validation.jsonl", SerializeSamples(world.validation));
  WriteFile(dir / "test.jsonl", SerializeSamples(world.test));
  WriteFile(dir / "entities.jsonl", SerializeEntityDump(world.entities));
  nlohmann::ordered_json templates(world.templates);
  WriteFile(dir / "templates.json", templates.dump(2) + "\n");
  WriteFile(dir / "schema.json", world.schema_json);
}

}  // namespace atomlm

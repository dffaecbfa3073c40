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

#include "atomlm/corpus.h"

#include <gtest/gtest.h>

#include <map>
#include <set>

#include "atomlm/util.h"
#include "test_fixtures.h"

namespace atomlm {
namespace {

using testing_fixtures::FixtureVocab;

TEST(PromptTemplate, NeedsOneSubjectAndOneMask) {
  EXPECT_THROW(PromptTemplate("R", "{subject} borders"), Error);
  EXPECT_THROW(PromptTemplate("R", "{subject} {mask} {mask}"), Error);
  PromptTemplate t("R", "{subject} borders {mask}.");
  EXPECT_EQ(t.Instantiate("Canada", "[MASK]"), "Canada borders [MASK].");
}

TEST(Templates, MissingRelationIsAnError) {
  TemplateSet t = ParseTemplates("{\"A\": \"{subject} is {mask}\"}");
  EXPECT_EQ(TemplateFor(t, "A").pattern(), "{subject} is {mask}");
  EXPECT_THROW(TemplateFor(t, "B"), Error);
}

TEST(FilterSentences, KeepsSentencesWithEntities) {
  Vocabulary v = FixtureVocab();
  std::vector<std::string> corpus = {"Canada borders Greenland.", "The sky is blue."};
  FilterResult r = FilterSentences(corpus, v);
  ASSERT_EQ(r.kept.size(), 1u);
  EXPECT_EQ(r.kept[0].sentence, "Canada borders Greenland.");
  EXPECT_EQ(r.kept[0].entities,
            (std::vector<TokenId>{*v.Find("Canada"), *v.Find("Greenland")}));
}

TEST(FilterSentences, MinimumEntityCount) {
  Vocabulary v = FixtureVocab();
  std::vector<std::string> corpus = {"Canada borders Greenland.", "Canada is big."};
  EXPECT_EQ(FilterSentences(corpus, v, 2).kept.size(), 1u);
  EXPECT_EQ(FilterSentences(corpus, v, 1).kept.size(), 2u);
}

TEST(FilterSentences, TypeCountsMatchBruteForce) {
  Vocabulary v = FixtureVocab();
  std::vector<std::string> corpus = {
      "Canada borders Greenland.", "English is spoken in Canada.",
      "Greenland, Greenland and Greenland.", "Nothing here.", "English only."};
  FilterResult r = FilterSentences(corpus, v);
  std::map<std::string, size_t> brute;
  for (const auto &s : corpus) {
    std::set<std::string> types;
    for (const char *name : {"Canada", "Greenland", "English"}) {
      if (s.find(name) != std::string::npos) {
        types.insert(*v.entry(*v.Find(name)).entity_type);
      }
    }
    for (const auto &t : types) ++brute[t];
  }
  EXPECT_EQ(r.type_counts, brute);
  size_t total = 0;
  for (const auto &[type, n] : r.type_counts) total += n;
  EXPECT_EQ(r.kept.size(), 4u);
  EXPECT_LE(r.kept.size(), total);
}

TEST(MakePretrainInstances, MaskCountIsCeilOfRate) {
  std::vector<std::string> corpus;
  std::string sentence;
  for (int i = 0; i < 20; ++i) sentence += (i ? " " : "") + std::string(1, 'a' + i);
  corpus.push_back(sentence);
  Vocabulary v = BuildBaseVocab(corpus, 30);
  ASSERT_EQ(Tokenize(sentence, v, true).size(), 20u);
  PretrainMasking opts;
  opts.mask_rate = 0.15;
  opts.seed = 3;
  auto inst = MakePretrainInstances(corpus, v, opts);
  ASSERT_EQ(inst.size(), 1u);
  EXPECT_EQ(inst[0].targets.size(), 3u);
  for (const MaskTarget &t : inst[0].targets) {
    EXPECT_EQ(t.id, Tokenize(sentence, v, true).ids[t.position]);
  }
}

TEST(MakePretrainInstances, Deterministic) {
  Vocabulary v = FixtureVocab();
  auto corpus = testing_fixtures::FixtureCorpus();
  PretrainMasking opts;
  opts.seed = 99;
  EXPECT_EQ(SerializeInstances(MakePretrainInstances(corpus, v, opts)),
            SerializeInstances(MakePretrainInstances(corpus, v, opts)));
  PretrainMasking other = opts;
  other.seed = 100;
  EXPECT_NE(SerializeInstances(MakePretrainInstances(corpus, v, opts)),
            SerializeInstances(MakePretrainInstances(corpus, v, other)));
}

TEST(MakePretrainInstances, EightyTenTenSplit) {
  std::vector<std::string> corpus;
  for (int i = 0; i < 4000; ++i) {
    corpus.push_back("alpha beta gamma delta epsilon zeta eta theta iota kappa");
  }
  Vocabulary v = BuildBaseVocab(std::span<const std::string>(corpus.data(), 1), 40);
  PretrainMasking opts;
  opts.mask_rate = 0.15;
  opts.seed = 5;
  auto inst = MakePretrainInstances(corpus, v, opts);
  size_t selections = 0, masked = 0, unchanged = 0;
  for (const auto &i : inst) {
    for (const MaskTarget &t : i.targets) {
      ++selections;
      if (i.input.ids[t.position] == kMaskId) {
        ++masked;
      } else if (i.input.ids[t.position] == t.id) {
        ++unchanged;
      }
    }
  }
  ASSERT_GE(selections, 10000u);
  const double frac = static_cast<double>(masked) / selections;
  EXPECT_NEAR(frac, 0.8, 0.02);
  // A random replacement can hit the original token, so unchanged is >= 10%.
  EXPECT_NEAR(static_cast<double>(unchanged) / selections, 0.1, 0.02);
}

TEST(MakePretrainInstances, EntityBoostMasksAtomsFirst) {
  Vocabulary v = FixtureVocab();
  std::vector<std::string> corpus = {"Canada borders Greenland and more words here."};
  PretrainMasking opts;
  opts.entity_mask_boost = true;
  opts.mask_rate = 0.2;
  auto inst = MakePretrainInstances(corpus, v, opts);
  ASSERT_EQ(inst.size(), 1u);
  // 14 tokens at rate 0.2 give 3 slots; both atoms must take two of them.
  ASSERT_EQ(inst[0].targets.size(), 3u);
  size_t atoms = 0;
  for (const MaskTarget &t : inst[0].targets) atoms += v.IsEntity(t.id) ? 1 : 0;
  EXPECT_EQ(atoms, 2u);
}

TEST(MakePretrainInstances, RejectsBadRate) {
  Vocabulary v = FixtureVocab();
  std::vector<std::string> corpus = {"Canada"};
  PretrainMasking opts;
  opts.mask_rate = 0.0;
  EXPECT_THROW(MakePretrainInstances(corpus, v, opts), Error);
}

TEST(MakeFinetuneInstances, AtomObjectGetsOneMask) {
  Vocabulary v = FixtureVocab();
  TemplateSet t = ParseTemplates(
      "{\"CountryBordersCountry\": \"{subject} shares borders with {mask}.\"}");
  std::vector<TripleSample> samples = {
      {"Canada", "CountryBordersCountry", {"Greenland"}, {}}};
  auto inst = MakeFinetuneInstances(samples, t, v);
  ASSERT_EQ(inst.size(), 1u);
  EXPECT_EQ(inst[0].input.mask_positions.size(), 1u);
  ASSERT_EQ(inst[0].targets.size(), 1u);
  EXPECT_EQ(inst[0].targets[0].id, *v.Find("Greenland"));
  EXPECT_EQ(inst[0].targets[0].position, inst[0].input.mask_positions[0]);
  EXPECT_EQ(inst[0].input.ids[0], *v.Find("Canada"));
  EXPECT_EQ(inst[0].relation, "CountryBordersCountry");
}

TEST(MakeFinetuneInstances, OneInstancePerObject) {
  Vocabulary v = FixtureVocab();
  TemplateSet t = ParseTemplates(
      "{\"CountryBordersCountry\": \"{subject} shares borders with {mask}.\"}");
  std::vector<TripleSample> samples = {
      {"Canada", "CountryBordersCountry", {"Greenland", "United States of America"}, {}},
      {"Greenland", "CountryBordersCountry", {}, {}}};
  EXPECT_EQ(MakeFinetuneInstances(samples, t, v).size(), 2u);
}

TEST(MakeFinetuneInstances, NumericObject) {
  Vocabulary v = FixtureVocab();
  ASSERT_EQ(SubTokenize("62", v).size(), 1u);
  TemplateSet t = ParseTemplates(
      "{\"SeriesHasNumberOfEpisodes\": \"{subject} has {mask} episodes.\"}");
  std::vector<TripleSample> samples = {{"X", "SeriesHasNumberOfEpisodes", {"62"}, {}}};
  auto inst = MakeFinetuneInstances(samples, t, v);
  ASSERT_EQ(inst.size(), 1u);
  ASSERT_EQ(inst[0].input.mask_positions.size(), 1u);
  EXPECT_EQ(inst[0].targets[0].id, SubTokenize("62", v)[0]);
}

TEST(MakeFinetuneInstances, MultiTokenObjectIsMaskedPerToken) {
  Vocabulary v = FixtureVocab();
  TemplateSet t = ParseTemplates("{\"R\": \"{subject} is near {mask}.\"}");
  std::vector<TripleSample> samples = {{"Canada", "R", {"Paris bridges"}, {}}};
  auto inst = MakeFinetuneInstances(samples, t, v);
  auto pieces = Tokenize("Paris bridges", v, false).ids;
  ASSERT_EQ(inst[0].targets.size(), pieces.size());
  for (size_t i = 0; i < pieces.size(); ++i) EXPECT_EQ(inst[0].targets[i].id, pieces[i]);
}

TEST(Instances, SerializeRoundTrip) {
  Vocabulary v = FixtureVocab();
  auto corpus = testing_fixtures::FixtureCorpus();
  auto inst = MakePretrainInstances(corpus, v, PretrainMasking{});
  auto text = SerializeInstances(inst);
  EXPECT_EQ(SerializeInstances(ParseInstances(text)), text);
}

}  // namespace
}  // namespace atomlm

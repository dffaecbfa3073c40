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

#include "atomlm/tokenizer.h"

#include <gtest/gtest.h>

#include <filesystem>

#include "atomlm/util.h"
#include "test_fixtures.h"

namespace atomlm {
namespace {

using testing_fixtures::FixtureBaseVocab;
using testing_fixtures::FixtureVocab;

std::vector<std::string> Surfaces(const Vocabulary &v, TokenId from) {
  std::vector<std::string> out;
  for (size_t i = from; i < v.size(); ++i) out.push_back(v.entry(i).surface);
  return out;
}

TEST(BuildBaseVocab, MergesMostFrequentPairFirst) {
  std::vector<std::string> corpus = {"ab ab b"};
  Vocabulary v = BuildBaseVocab(corpus, 8);
  ASSERT_EQ(v.size(), 8u);
  for (TokenId id = 0; id < kNumSpecialTokens; ++id) {
    EXPECT_EQ(v.entry(id).surface, kSpecialSurfaces[id]);
  }
  EXPECT_EQ(Surfaces(v, kNumSpecialTokens),
            (std::vector<std::string>{"a", "b", "ab"}));
}

TEST(BuildBaseVocab, SingleCharacterCorpus) {
  std::vector<std::string> corpus = {"x"};
  Vocabulary v = BuildBaseVocab(corpus, 6);
  EXPECT_EQ(Surfaces(v, kNumSpecialTokens), (std::vector<std::string>{"x"}));
}

TEST(BuildBaseVocab, EmptyCorpusIsAnError) {
  std::vector<std::string> corpus;
  EXPECT_THROW(BuildBaseVocab(corpus, 10), Error);
}

TEST(BuildBaseVocab, TargetBelowAlphabetIsAnError) {
  std::vector<std::string> corpus = {"abc"};
  EXPECT_THROW(BuildBaseVocab(corpus, 6), Error);
}

TEST(BuildBaseVocab, Deterministic) {
  auto corpus = testing_fixtures::FixtureCorpus();
  EXPECT_EQ(BuildBaseVocab(corpus, 60).Serialize(),
            BuildBaseVocab(corpus, 60).Serialize());
}

TEST(Tokenize, FullEntitySurfaceIsOneAtom) {
  Vocabulary v = FixtureVocab();
  auto seq = Tokenize("United States of America", v, true);
  ASSERT_EQ(seq.size(), 1u);
  EXPECT_EQ(seq.ids[0], *v.Find("United States of America"));
}

TEST(Tokenize, PartialSurfaceFallsBackToSubTokens) {
  Vocabulary v = FixtureVocab();
  auto seq = Tokenize("United States", v, true);
  std::vector<TokenId> expected = SubTokenize("United", v);
  auto states = SubTokenize("States", v);
  expected.insert(expected.end(), states.begin(), states.end());
  EXPECT_EQ(seq.ids, expected);
  for (TokenId id : seq.ids) EXPECT_FALSE(v.IsEntity(id));
}

TEST(Tokenize, MaskLiteral) {
  Vocabulary base = FixtureBaseVocab();
  auto seq = Tokenize("Canada borders [MASK]", base, true);
  std::vector<TokenId> expected = SubTokenize("Canada", base);
  auto borders = SubTokenize("borders", base);
  expected.insert(expected.end(), borders.begin(), borders.end());
  expected.push_back(kMaskId);
  EXPECT_EQ(seq.ids, expected);
  EXPECT_EQ(seq.mask_positions, std::vector<size_t>{seq.size() - 1});
}

TEST(Tokenize, EntityMatchingNeedsWholeWords) {
  Vocabulary v = FixtureVocab();
  auto seq = Tokenize("Canadas", v, true);
  for (TokenId id : seq.ids) EXPECT_FALSE(v.IsEntity(id));
  seq = Tokenize("(Canada)", v, true);
  ASSERT_EQ(seq.size(), 3u);
  EXPECT_EQ(seq.ids[1], *v.Find("Canada"));
}

TEST(Tokenize, EntityMatchingOff) {
  Vocabulary v = FixtureVocab();
  auto seq = Tokenize("Canada", v, false);
  EXPECT_EQ(seq.ids, SubTokenize("Canada", v));
}

TEST(Tokenize, UnknownCharactersBecomeUnk) {
  Vocabulary v = FixtureBaseVocab();
  auto seq = Tokenize("Z\xc3\xa9", v, false);
  EXPECT_EQ(seq.ids, (std::vector<TokenId>{kUnkId, kUnkId}));
}

TEST(Detokenize, SingleAtom) {
  Vocabulary v = FixtureVocab();
  TokenSequence seq;
  seq.ids = {*v.Find("Greenland")};
  EXPECT_EQ(Detokenize(seq, v), "Greenland");
}

TEST(Detokenize, RoundTrip) {
  Vocabulary v = FixtureVocab();
  for (bool entities : {true, false}) {
    for (const char *text :
         {"Canada borders Greenland", "Paris is a city with 62 bridges.",
          "The official language of Canada is English"}) {
      EXPECT_EQ(Detokenize(Tokenize(text, v, entities), v), text);
    }
  }
}

TEST(Detokenize, IdOutOfRange) {
  Vocabulary v = FixtureVocab();
  TokenSequence seq;
  seq.ids = {static_cast<TokenId>(v.size())};
  EXPECT_THROW(Detokenize(seq, v), Error);
}

TEST(AddEntityAtoms, AppendsAfterExistingIds) {
  Vocabulary base = FixtureBaseVocab();
  std::vector<EntityInput> atoms = {{"United States of America", "Country", "Q30"}};
  auto result = AddEntityAtoms(base, atoms);
  ASSERT_EQ(result.added, 1u);
  ASSERT_EQ(result.vocab.size(), base.size() + 1);
  for (size_t i = 0; i < base.size(); ++i) {
    EXPECT_EQ(result.vocab.entry(i).surface, base.entry(i).surface);
  }
  const VocabEntry &atom = result.vocab.entry(base.size());
  EXPECT_EQ(atom.kind, TokenKind::kEntity);
  EXPECT_EQ(atom.entity_type, "Country");
  EXPECT_EQ(atom.entity_id, "Q30");
  EXPECT_GE(atom.constituents.size(), 4u);
  EXPECT_EQ(atom.constituents,
            Tokenize("United States of America", base, false).ids);
}

TEST(AddEntityAtoms, DuplicatesAreSkipped) {
  Vocabulary base = FixtureBaseVocab();
  std::vector<EntityInput> atoms = {{"Canada", "Country", ""},
                                    {"Canada", "Country", ""}};
  auto result = AddEntityAtoms(base, atoms);
  EXPECT_EQ(result.added, 1u);
  EXPECT_EQ(result.vocab.num_entities(), 1u);
}

TEST(AddEntityAtoms, EmptyAndUntokenizableSurfacesAreRejected) {
  Vocabulary base = FixtureBaseVocab();
  std::vector<EntityInput> atoms = {{"", "Country", ""}, {"\xe2\x82\xac", "Country", ""}};
  auto result = AddEntityAtoms(base, atoms);
  EXPECT_EQ(result.added, 0u);
  EXPECT_EQ(result.rejected.size(), 2u);
  EXPECT_EQ(result.vocab.size(), base.size());
}

TEST(AddEntityAtoms, IdStabilityUnderRandomLists) {
  Vocabulary base = FixtureBaseVocab();
  Rng rng(9);
  const std::vector<std::string> pool = {"Canada", "Greenland", "Paris", "north",
                                         "island", "bridges", "city", "the sky"};
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<EntityInput> atoms;
    for (int k = 0; k < 4; ++k) atoms.push_back({pool[rng.Uniform(pool.size())], "X", ""});
    auto grown = AddEntityAtoms(base, atoms).vocab;
    for (size_t i = 0; i < base.size(); ++i) {
      ASSERT_EQ(grown.entry(i).surface, base.entry(i).surface);
    }
  }
}

TEST(FindEntities, LeftmostLongest) {
  Vocabulary v = FixtureVocab();
  auto m = FindEntities("Canada shares borders with the United States of America.", v);
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m[0].id, *v.Find("Canada"));
  EXPECT_EQ(m[1].id, *v.Find("United States of America"));
  EXPECT_EQ(m[1].end - m[1].begin, std::string("United States of America").size());
}

TEST(Vocabulary, SerializeRoundTrip) {
  Vocabulary v = FixtureVocab();
  Vocabulary back = Vocabulary::Parse(v.Serialize());
  ASSERT_EQ(back.size(), v.size());
  EXPECT_EQ(back.Serialize(), v.Serialize());
  EXPECT_EQ(back.num_entities(), 4u);
  EXPECT_EQ(back.entry(*back.Find("Greenland")).entity_id, "Q223");
}

TEST(Vocabulary, DuplicateAppendThrows) {
  Vocabulary v;
  v.Append(VocabEntry{"a"});
  EXPECT_THROW(v.Append(VocabEntry{"a"}), Error);
}

}  // namespace
}  // namespace atomlm

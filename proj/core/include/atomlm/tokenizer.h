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

#ifndef ATOMLM_TOKENIZER_H_
#define ATOMLM_TOKENIZER_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "atomlm/vocabulary.h"

namespace atomlm {

struct TokenSequence {
  std::vector<TokenId> ids;
  // 1 where the token begins a whitespace-delimited word. Continuation
  // pieces (subwords and attached punctuation) carry 0. Empty means every
  // token starts a word.
  std::vector<uint8_t> word_starts;
  // Indices whose id is kMaskId.
  std::vector<size_t> mask_positions;

  size_t size() const { return ids.size(); }
  bool StartsWord(size_t i) const {
    return word_starts.empty() || word_starts[i] != 0;
  }
  void RecomputeMaskPositions();
};

// Learns a base vocabulary from a corpus: every character seen plus the most
// frequent adjacent-symbol merges until target_size entries (including the
// specials) exist. Ties between equally frequent pairs go to the
// lexicographically smallest (left, right) pair.
Vocabulary BuildBaseVocab(std::span<const std::string> corpus,
                          size_t target_size);

// Splits text into tokens. With entity_matching the leftmost-longest
// whole-word entity surface at each position becomes one atom id; everything
// else is greedy longest-match over base tokens, with unknown characters
// mapped to UNK. Literal special surfaces such as "[MASK]" are recognized.
TokenSequence Tokenize(std::string_view text, const Vocabulary &vocab,
                       bool entity_matching);

// Base-token ids for a single word run (no whitespace). Unknown code points
// become UNK.
std::vector<TokenId> SubTokenize(std::string_view word,
                                 const Vocabulary &vocab);

// Inverse of Tokenize up to whitespace normalization.
std::string Detokenize(const TokenSequence &seq, const Vocabulary &vocab);

struct EntityInput {
  std::string surface;
  std::string entity_type;
  std::string entity_id;  // may be empty
};

struct AddAtomsResult {
  Vocabulary vocab;
  size_t added = 0;
  std::vector<std::string> rejected;
};

// Appends entity atoms after the existing ids. Surfaces that are already
// atoms are skipped silently; empty surfaces or surfaces that sub-tokenize to nothing
// but UNK are rejected.
AddAtomsResult AddEntityAtoms(const Vocabulary &vocab,
                              std::span<const EntityInput> entities);

// A whole-word entity occurrence found in text.
struct EntityMatch {
  size_t begin = 0;
  size_t end = 0;
  TokenId id = kUnkId;
};

// Greedy leftmost-longest scan for entity atoms only.
std::vector<EntityMatch> FindEntities(std::string_view text,
                                      const Vocabulary &vocab);

bool IsAsciiSpace(char c);
bool IsAsciiPunct(char c);

}  // namespace atomlm

#endif  // ATOMLM_TOKENIZER_H_

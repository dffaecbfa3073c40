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

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

#include "atomlm/util.h"

namespace atomlm {

bool IsAsciiSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool IsAsciiPunct(char c) {
  auto u = static_cast<unsigned char>(c);
  return (u >= 33 && u <= 47) || (u >= 58 && u <= 64) ||
         (u >= 91 && u <= 96) || (u >= 123 && u <= 126);
}

namespace {

VocabEntry BaseEntry(std::string surface) {
  VocabEntry e;
  e.surface = std::move(surface);
  return e;
}

// Byte length of the UTF-8 sequence starting with lead byte c. Invalid lead
// bytes count as one byte so scanning always advances.
size_t CodePointLength(unsigned char c) {
  if (c < 0x80) return 1;
  if ((c >> 5) == 0x6) return 2;
  if ((c >> 4) == 0xe) return 3;
  if ((c >> 3) == 0x1e) return 4;
  return 1;
}

bool IsBoundaryChar(char c) { return IsAsciiSpace(c) || IsAsciiPunct(c); }

bool LeftBoundary(std::string_view text, size_t i) {
  return i == 0 || IsBoundaryChar(text[i - 1]);
}

bool RightBoundary(std::string_view text, size_t j) {
  return j == text.size() || IsBoundaryChar(text[j]);
}

// Length of a special literal ("[MASK]" etc.) at position i, with its id.
std::pair<size_t, TokenId> MatchSpecial(std::string_view text, size_t i) {
  if (text[i] != '[') return {0, kUnkId};
  for (TokenId id = 0; id < kNumSpecialTokens; ++id) {
    if (text.substr(i).starts_with(kSpecialSurfaces[id])) {
      return {kSpecialSurfaces[id].size(), id};
    }
  }
  return {0, kUnkId};
}

// Longest whole-word entity surface starting at i; returns end offset or 0.
std::pair<size_t, TokenId> MatchEntity(std::string_view text, size_t i,
                                       const SurfaceTrie &trie) {
  size_t best_end = 0;
  TokenId best_id = kUnkId;
  int32_t node = SurfaceTrie::kRoot;
  for (size_t j = i; j < text.size(); ++j) {
    node = trie.Child(node, static_cast<unsigned char>(text[j]));
    if (node == SurfaceTrie::kNone) break;
    TokenId id = trie.Terminal(node);
    if (id >= 0 && RightBoundary(text, j + 1)) {
      best_end = j + 1;
      best_id = id;
    }
  }
  return {best_end, best_id};
}

// End of the word run starting at i: stops at whitespace or punctuation.
size_t RunEnd(std::string_view text, size_t i) {
  size_t j = i;
  while (j < text.size() && !IsBoundaryChar(text[j])) ++j;
  return j;
}

void AppendSubTokens(std::string_view word, const Vocabulary &vocab,
                     bool starts_word, TokenSequence *seq) {
  const SurfaceTrie &trie = vocab.base_trie();
  size_t p = 0;
  while (p < word.size()) {
    size_t best_len = 0;
    TokenId best_id = kUnkId;
    int32_t node = SurfaceTrie::kRoot;
    for (size_t q = p; q < word.size(); ++q) {
      node = trie.Child(node, static_cast<unsigned char>(word[q]));
      if (node == SurfaceTrie::kNone) break;
      TokenId id = trie.Terminal(node);
      if (id >= 0) {
        best_len = q + 1 - p;
        best_id = id;
      }
    }
    if (best_len == 0) {
      best_len = std::min(CodePointLength(static_cast<unsigned char>(word[p])),
                          word.size() - p);
      best_id = kUnkId;
    }
    seq->ids.push_back(best_id);
    seq->word_starts.push_back(p == 0 && starts_word ? 1 : 0);
    p += best_len;
  }
}

// Splits corpus text into the word runs and single punctuation characters
// that Tokenize sub-tokenizes independently.
template <typename Fn>
void ForEachWord(std::string_view text, Fn &&fn) {
  size_t i = 0;
  while (i < text.size()) {
    if (IsAsciiSpace(text[i])) {
      ++i;
    } else if (IsAsciiPunct(text[i])) {
      fn(text.substr(i, 1));
      ++i;
    } else {
      size_t j = RunEnd(text, i);
      fn(text.substr(i, j - i));
      i = j;
    }
  }
}

std::vector<std::string> SplitCodePoints(std::string_view word) {
  std::vector<std::string> out;
  size_t p = 0;
  while (p < word.size()) {
    size_t len = std::min(CodePointLength(static_cast<unsigned char>(word[p])),
                          word.size() - p);
    out.emplace_back(word.substr(p, len));
    p += len;
  }
  return out;
}

}  // namespace

void TokenSequence::RecomputeMaskPositions() {
  mask_positions.clear();
  for (size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] == kMaskId) mask_positions.push_back(i);
  }
}

Vocabulary BuildBaseVocab(std::span<const std::string> corpus,
                          size_t target_size) {
  std::map<std::string, int64_t> word_counts;
  for (const std::string &line : corpus) {
    ForEachWord(line, [&](std::string_view w) { ++word_counts[std::string(w)]; });
  }
  if (word_counts.empty()) throw Error("empty corpus");

  // Intern symbols so pair counting works on integers.
  std::vector<std::string> symbols;
  std::unordered_map<std::string, int32_t> symbol_ids;
  auto intern = [&](const std::string &s) {
    auto [it, inserted] =
        symbol_ids.emplace(s, static_cast<int32_t>(symbols.size()));
    if (inserted) symbols.push_back(s);
    return it->second;
  };

  std::set<std::string> alphabet;
  struct Word {
    std::vector<int32_t> parts;
    int64_t count;
  };
  std::vector<Word> words;
  for (const auto &[w, count] : word_counts) {
    for (auto &cp : SplitCodePoints(w)) alphabet.insert(cp);
  }
  for (const auto &cp : alphabet) intern(cp);
  for (const auto &[w, count] : word_counts) {
    Word word{{}, count};
    for (auto &cp : SplitCodePoints(w)) word.parts.push_back(symbol_ids[cp]);
    words.push_back(std::move(word));
  }

  if (target_size < kNumSpecialTokens + alphabet.size()) {
    throw Error("target_size " + std::to_string(target_size) +
                " is smaller than specials plus alphabet (" +
                std::to_string(kNumSpecialTokens + alphabet.size()) + ")");
  }

  Vocabulary vocab;
  for (const auto &cp : alphabet) vocab.Append(BaseEntry(cp));

  while (vocab.size() < target_size) {
    std::unordered_map<uint64_t, int64_t> pair_counts;
    for (const Word &w : words) {
      for (size_t k = 0; k + 1 < w.parts.size(); ++k) {
        uint64_t key = (static_cast<uint64_t>(w.parts[k]) << 32) |
                       static_cast<uint32_t>(w.parts[k + 1]);
        pair_counts[key] += w.count;
      }
    }
    if (pair_counts.empty()) break;

    uint64_t best_key = 0;
    int64_t best_count = -1;
    for (const auto &[key, count] : pair_counts) {
      bool better = count > best_count;
      if (!better && count == best_count) {
        auto a = static_cast<int32_t>(key >> 32);
        auto b = static_cast<int32_t>(key & 0xffffffffu);
        auto ba = static_cast<int32_t>(best_key >> 32);
        auto bb = static_cast<int32_t>(best_key & 0xffffffffu);
        better = std::tie(symbols[a], symbols[b]) <
                 std::tie(symbols[ba], symbols[bb]);
      }
      if (better) {
        best_key = key;
        best_count = count;
      }
    }

    auto left = static_cast<int32_t>(best_key >> 32);
    auto right = static_cast<int32_t>(best_key & 0xffffffffu);
    std::string merged = symbols[left] + symbols[right];
    int32_t merged_id = intern(merged);
    for (Word &w : words) {
      std::vector<int32_t> next;
      next.reserve(w.parts.size());
      for (size_t k = 0; k < w.parts.size(); ++k) {
        if (k + 1 < w.parts.size() && w.parts[k] == left &&
            w.parts[k + 1] == right) {
          next.push_back(merged_id);
          ++k;
        } else {
          next.push_back(w.parts[k]);
        }
      }
      w.parts = std::move(next);
    }
    if (!vocab.Find(merged)) vocab.Append(BaseEntry(merged));
  }
  return vocab;
}

std::vector<TokenId> SubTokenize(std::string_view word,
                                 const Vocabulary &vocab) {
  TokenSequence seq;
  AppendSubTokens(word, vocab, true, &seq);
  return seq.ids;
}

TokenSequence Tokenize(std::string_view text, const Vocabulary &vocab,
                       bool entity_matching) {
  TokenSequence seq;
  bool after_space = true;
  size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (IsAsciiSpace(c)) {
      after_space = true;
      ++i;
      continue;
    }
    auto [special_len, special_id] = MatchSpecial(text, i);
    if (special_len > 0) {
      seq.ids.push_back(special_id);
      seq.word_starts.push_back(after_space ? 1 : 0);
      i += special_len;
      after_space = false;
      continue;
    }
    if (entity_matching && vocab.num_entities() > 0 && LeftBoundary(text, i)) {
      auto [end, id] = MatchEntity(text, i, vocab.entity_trie());
      if (end > 0) {
        seq.ids.push_back(id);
        seq.word_starts.push_back(after_space ? 1 : 0);
        i = end;
        after_space = false;
        continue;
      }
    }
    size_t j = IsAsciiPunct(c) ? i + 1 : RunEnd(text, i);
    AppendSubTokens(text.substr(i, j - i), vocab, after_space, &seq);
    i = j;
    after_space = false;
  }
  seq.RecomputeMaskPositions();
  return seq;
}

std::vector<EntityMatch> FindEntities(std::string_view text,
                                      const Vocabulary &vocab) {
  std::vector<EntityMatch> matches;
  if (vocab.num_entities() == 0) return matches;
  size_t i = 0;
  while (i < text.size()) {
    if (IsAsciiSpace(text[i])) {
      ++i;
      continue;
    }
    auto [special_len, special_id] = MatchSpecial(text, i);
    if (special_len > 0) {
      i += special_len;
      continue;
    }
    if (LeftBoundary(text, i)) {
      auto [end, id] = MatchEntity(text, i, vocab.entity_trie());
      if (end > 0) {
        matches.push_back({i, end, id});
        i = end;
        continue;
      }
    }
    i = IsAsciiPunct(text[i]) ? i + 1 : RunEnd(text, i);
  }
  return matches;
}

std::string Detokenize(const TokenSequence &seq, const Vocabulary &vocab) {
  std::string out;
  for (size_t k = 0; k < seq.ids.size(); ++k) {
    TokenId id = seq.ids[k];
    if (id < 0 || static_cast<size_t>(id) >= vocab.size()) {
      throw Error("id out of range: " + std::to_string(id));
    }
    if (k > 0 && seq.StartsWord(k)) out += ' ';
    out += vocab.entry(id).surface;
  }
  return out;
}

AddAtomsResult AddEntityAtoms(const Vocabulary &vocab,
                              std::span<const EntityInput> entities) {
  AddAtomsResult result{vocab, 0, {}};
  for (const EntityInput &input : entities) {
    std::string surface(Trim(input.surface));
    if (surface.empty()) {
      result.rejected.push_back(input.surface);
      continue;
    }
    if (result.vocab.FindEntity(surface)) continue;
    TokenSequence pieces = Tokenize(surface, result.vocab, false);
    bool all_unknown = std::all_of(pieces.ids.begin(), pieces.ids.end(),
                                   [](TokenId id) { return id == kUnkId; });
    if (pieces.ids.empty() || all_unknown) {
      result.rejected.push_back(surface);
      continue;
    }
    VocabEntry e;
    e.surface = surface;
    e.kind = TokenKind::kEntity;
    e.entity_type = input.entity_type;
    if (!input.entity_id.empty()) e.entity_id = input.entity_id;
    e.constituents = std::move(pieces.ids);
    result.vocab.Append(std::move(e));
    ++result.added;
  }
  return result;
}

}  // namespace atomlm

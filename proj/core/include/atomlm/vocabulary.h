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

#ifndef ATOMLM_VOCABULARY_H_
#define ATOMLM_VOCABULARY_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace atomlm {

using TokenId = int32_t;

// The five special tokens always occupy the first ids.
inline constexpr TokenId kPadId = 0;
inline constexpr TokenId kUnkId = 1;
inline constexpr TokenId kMaskId = 2;
inline constexpr TokenId kClsId = 3;
inline constexpr TokenId kSepId = 4;
inline constexpr TokenId kNumSpecialTokens = 5;

inline constexpr std::string_view kSpecialSurfaces[kNumSpecialTokens] = {
    "[PAD]", "[UNK]", "[MASK]", "[CLS]", "[SEP]"};

enum class TokenKind { kBase, kEntity };

struct VocabEntry {
  std::string surface;
  TokenKind kind = TokenKind::kBase;
  std::optional<std::string> entity_type;
  std::optional<std::string> entity_id;
  // Base-token ids obtained by sub-tokenizing the surface. Only populated
  // for entity atoms.
  std::vector<TokenId> constituents;
};

// Byte trie mapping strings to token ids. Children are kept in one flat hash
// table keyed by (node, byte) so large entity inventories stay compact.
class SurfaceTrie {
 public:
  static constexpr int32_t kRoot = 0;
  static constexpr int32_t kNone = -1;

  SurfaceTrie();

  void Insert(std::string_view surface, TokenId id);
  int32_t Child(int32_t node, unsigned char c) const;
  // Token id ending at this node, or -1.
  TokenId Terminal(int32_t node) const { return terminals_[node]; }

 private:
  std::unordered_map<uint64_t, int32_t> children_;
  std::vector<TokenId> terminals_;
};

// Ordered surface -> id map. Ids are dense and never change once assigned;
// growing the vocabulary always produces a new value with the old ids as a
// prefix. Instances are immutable and safe to share across threads.
class Vocabulary {
 public:
  // Vocabulary holding only the five special tokens.
  Vocabulary();

  size_t size() const { return entries_.size(); }
  const VocabEntry &entry(TokenId id) const;
  const std::vector<VocabEntry> &entries() const { return entries_; }

  // An entity atom may share its surface with a base token; Find prefers
  // the atom.
  std::optional<TokenId> Find(std::string_view surface) const;
  std::optional<TokenId> FindEntity(std::string_view surface) const;
  bool IsSpecial(TokenId id) const { return id >= 0 && id < kNumSpecialTokens; }
  bool IsEntity(TokenId id) const;
  size_t num_entities() const { return num_entities_; }

  const SurfaceTrie &base_trie() const { return *base_trie_; }
  const SurfaceTrie &entity_trie() const { return *entity_trie_; }

  // Appends an entry. Fails on a surface already used by the same kind. Used by the builders; the
  // public construction paths are BuildBaseVocab, AddEntityAtoms and Load.
  TokenId Append(VocabEntry entry);

  // JSON Lines file, one entry per line after the implicit specials.
  void Save(const std::filesystem::path &path) const;
  std::string Serialize() const;
  static Vocabulary Load(const std::filesystem::path &path);
  static Vocabulary Parse(std::string_view jsonl);

 private:
  std::vector<VocabEntry> entries_;
  std::unordered_map<std::string, TokenId> index_;
  std::unordered_map<std::string, TokenId> entity_index_;
  std::shared_ptr<SurfaceTrie> base_trie_;
  std::shared_ptr<SurfaceTrie> entity_trie_;
  size_t num_entities_ = 0;
};

}  // namespace atomlm

#endif  // ATOMLM_VOCABULARY_H_

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

#include "atomlm/vocabulary.h"

#include "json.hpp"

#include "atomlm/tokenizer.h"
#include "atomlm/util.h"

namespace atomlm {

using ordered_json = nlohmann::ordered_json;

SurfaceTrie::SurfaceTrie() : terminals_(1, -1) {}

void SurfaceTrie::Insert(std::string_view surface, TokenId id) {
  int32_t node = kRoot;
  for (unsigned char c : surface) {
    uint64_t key = (static_cast<uint64_t>(node) << 8) | c;
    auto it = children_.find(key);
    if (it == children_.end()) {
      int32_t next = static_cast<int32_t>(terminals_.size());
      terminals_.push_back(-1);
      children_.emplace(key, next);
      node = next;
    } else {
      node = it->second;
    }
  }
  terminals_[node] = id;
}

int32_t SurfaceTrie::Child(int32_t node, unsigned char c) const {
  auto it = children_.find((static_cast<uint64_t>(node) << 8) | c);
  return it == children_.end() ? kNone : it->second;
}

Vocabulary::Vocabulary()
    : base_trie_(std::make_shared<SurfaceTrie>()),
      entity_trie_(std::make_shared<SurfaceTrie>()) {
  for (TokenId id = 0; id < kNumSpecialTokens; ++id) {
    VocabEntry e;
    e.surface = std::string(kSpecialSurfaces[id]);
    entries_.push_back(e);
    index_.emplace(e.surface, id);
  }
}

const VocabEntry &Vocabulary::entry(TokenId id) const {
  if (id < 0 || static_cast<size_t>(id) >= entries_.size()) {
    throw Error("id out of range: " + std::to_string(id));
  }
  return entries_[id];
}

std::optional<TokenId> Vocabulary::Find(std::string_view surface) const {
  if (auto atom = FindEntity(surface)) return atom;
  auto it = index_.find(std::string(surface));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<TokenId> Vocabulary::FindEntity(std::string_view surface) const {
  auto it = entity_index_.find(std::string(surface));
  if (it == entity_index_.end()) return std::nullopt;
  return it->second;
}

bool Vocabulary::IsEntity(TokenId id) const {
  return id >= 0 && static_cast<size_t>(id) < entries_.size() &&
         entries_[id].kind == TokenKind::kEntity;
}

TokenId Vocabulary::Append(VocabEntry entry) {
  if (entry.surface.empty()) throw Error("empty surface");
  const bool entity = entry.kind == TokenKind::kEntity;
  auto &index = entity ? entity_index_ : index_;
  if (index.contains(entry.surface)) {
    throw Error("duplicate surface: " + entry.surface);
  }
  auto id = static_cast<TokenId>(entries_.size());
  // Copies share tries; clone before mutating one that someone else holds.
  auto &trie = entity ? entity_trie_ : base_trie_;
  if (trie.use_count() > 1) trie = std::make_shared<SurfaceTrie>(*trie);
  trie->Insert(entry.surface, id);
  if (entity) ++num_entities_;
  index.emplace(entry.surface, id);
  entries_.push_back(std::move(entry));
  return id;
}

std::string Vocabulary::Serialize() const {
  std::string out;
  for (size_t i = kNumSpecialTokens; i < entries_.size(); ++i) {
    const VocabEntry &e = entries_[i];
    ordered_json j;
    j["surface"] = e.surface;
    j["kind"] = e.kind == TokenKind::kEntity ? "entity" : "base";
    j["type"] = e.entity_type ? ordered_json(*e.entity_type) : ordered_json();
    j["entity_id"] = e.entity_id ? ordered_json(*e.entity_id) : ordered_json();
    out += j.dump();
    out += '\n';
  }
  return out;
}

void Vocabulary::Save(const std::filesystem::path &path) const {
  WriteFile(path, Serialize());
}

Vocabulary Vocabulary::Parse(std::string_view jsonl) {
  Vocabulary vocab;
  size_t line_no = 0;
  size_t pos = 0;
  while (pos < jsonl.size()) {
    size_t eol = jsonl.find('\n', pos);
    if (eol == std::string_view::npos) eol = jsonl.size();
    std::string_view line = Trim(jsonl.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (line.empty()) continue;
    auto where = [&] { return " (vocabulary line " + std::to_string(line_no) + ")"; };
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception &e) {
      throw Error(std::string("malformed vocabulary entry: ") + e.what() +
                  where());
    }
    if (!j.is_object() || !j.contains("surface") ||
        !j["surface"].is_string()) {
      throw Error("vocabulary entry without surface" + where());
    }
    VocabEntry e;
    e.surface = j["surface"].get<std::string>();
    std::string kind = j.value("kind", std::string("base"));
    if (kind == "entity") {
      e.kind = TokenKind::kEntity;
    } else if (kind != "base") {
      throw Error("unknown kind '" + kind + "'" + where());
    }
    if (j.contains("type") && j["type"].is_string()) {
      e.entity_type = j["type"].get<std::string>();
    }
    if (j.contains("entity_id") && j["entity_id"].is_string()) {
      e.entity_id = j["entity_id"].get<std::string>();
    }
    try {
      vocab.Append(std::move(e));
    } catch (const Error &err) {
      throw Error(err.what() + where());
    }
  }
  // Constituents need the complete base inventory.
  for (auto &e : vocab.entries_) {
    if (e.kind != TokenKind::kEntity) continue;
    TokenSequence seq = Tokenize(e.surface, vocab, /*entity_matching=*/false);
    e.constituents = seq.ids;
  }
  return vocab;
}

Vocabulary Vocabulary::Load(const std::filesystem::path &path) {
  return Parse(ReadFile(path));
}

}  // namespace atomlm

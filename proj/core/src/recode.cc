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

#include "atomlm/recode.h"

#include <spdlog/spdlog.h>

#include <cmath>

#include "json.hpp"
#include "atomlm/util.h"

namespace atomlm {

std::vector<float> RecodeVector(std::span<const std::vector<float>> rows) {
  if (rows.empty()) throw Error("recode needs at least one row");
  const size_t width = rows.front().size();
  std::vector<double> mean(width, 0.0);
  for (const auto &row : rows) {
    if (row.size() != width) throw Error("recode rows differ in length");
    for (size_t j = 0; j < width; ++j) mean[j] += row[j];
  }
  double norm_sq = 0.0;
  for (double &x : mean) {
    x /= static_cast<double>(rows.size());
    norm_sq += x * x;
  }
  double norm = std::sqrt(norm_sq);
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw DegenerateRecode("degenerate recode");
  }
  std::vector<float> out(width);
  for (size_t j = 0; j < width; ++j) out[j] = static_cast<float>(mean[j] / norm);
  return out;
}

RecodePlan MakeRecodePlan(const Vocabulary &vocab, int old_v) {
  RecodePlan plan;
  for (size_t id = static_cast<size_t>(old_v); id < vocab.size(); ++id) {
    const VocabEntry &e = vocab.entry(static_cast<TokenId>(id));
    if (e.kind != TokenKind::kEntity) {
      throw Error("vocabulary id " + std::to_string(id) +
                  " beyond the model is not an entity atom");
    }
    plan.entries.push_back({static_cast<TokenId>(id), e.constituents, e.surface});
  }
  return plan;
}

namespace {

std::vector<std::vector<float>> GatherRows(const Matrix<float> &m,
                                           std::span<const TokenId> ids) {
  std::vector<std::vector<float>> rows;
  rows.reserve(ids.size());
  for (TokenId id : ids) {
    rows.emplace_back(m.row(id).data(), m.row(id).data() + m.cols());
  }
  return rows;
}

std::vector<float> RandomUnit(Rng &rng, int width) {
  std::vector<double> v(width);
  double norm_sq = 0.0;
  do {
    norm_sq = 0.0;
    for (double &x : v) {
      x = rng.Normal();
      norm_sq += x * x;
    }
  } while (norm_sq == 0.0);
  double norm = std::sqrt(norm_sq);
  std::vector<float> out(width);
  for (int j = 0; j < width; ++j) out[j] = static_cast<float>(v[j] / norm);
  return out;
}

void SetRow(Matrix<float> &m, TokenId id, const std::vector<float> &row) {
  for (size_t j = 0; j < row.size(); ++j) m(id, static_cast<Eigen::Index>(j)) = row[j];
}

}  // namespace

ExpandResult ExpandModel(const MlmModel &model, const RecodePlan &plan,
                         NewRowInit init, uint64_t seed) {
  const int old_v = model.config.vocab_size;
  const int width = model.config.hidden;
  for (size_t k = 0; k < plan.entries.size(); ++k) {
    const RecodeEntry &e = plan.entries[k];
    if (e.atom_id != old_v + static_cast<int>(k)) {
      throw Error("recode plan ids must be exactly old_v..old_v+k-1");
    }
    if (e.constituents.empty()) {
      throw Error("recode entry without constituents: " + e.surface);
    }
    for (TokenId c : e.constituents) {
      if (c < 0 || c >= old_v) {
        throw Error("constituent id out of range for " + e.surface);
      }
    }
  }

  ExpandResult result{
      ResizeVocab(model, old_v + static_cast<int>(plan.entries.size())), {}};
  auto &p = result.model.params;
  Rng rng(DeriveSeed(seed, "expand"));
  for (const RecodeEntry &e : plan.entries) {
    std::vector<float> input_row, output_row;
    bool random = init == NewRowInit::kRandomUnit;
    if (!random) {
      try {
        input_row = RecodeVector(GatherRows(model.params.token_embeddings,
                                            e.constituents));
        output_row = RecodeVector(GatherRows(model.params.output_projection,
                                             e.constituents));
      } catch (const DegenerateRecode &) {
        spdlog::warn("degenerate recode for '{}'; using random unit init",
                     e.surface);
        result.warnings.push_back(e.surface);
        random = true;
      }
    }
    if (random) {
      input_row = RandomUnit(rng, width);
      output_row = RandomUnit(rng, width);
    }
    SetRow(p.token_embeddings, e.atom_id, input_row);
    SetRow(p.output_projection, e.atom_id, output_row);
    double bias = 0.0;
    if (init == NewRowInit::kRecode) {
      for (TokenId c : e.constituents) bias += model.params.output_bias(0, c);
      bias /= static_cast<double>(e.constituents.size());
    }
    p.output_bias(0, e.atom_id) = static_cast<float>(bias);
  }
  return result;
}

std::string SerializeRecodePlan(const RecodePlan &plan) {
  std::string out;
  for (const RecodeEntry &e : plan.entries) {
    nlohmann::ordered_json j;
    j["surface"] = e.surface;
    j["atom_id"] = e.atom_id;
    j["constituents"] = e.constituents;
    out += j.dump();
    out += '\n';
  }
  return out;
}

RecodePlan ParseRecodePlan(std::string_view jsonl) {
  RecodePlan plan;
  size_t pos = 0;
  while (pos < jsonl.size()) {
    size_t eol = jsonl.find('\n', pos);
    if (eol == std::string_view::npos) eol = jsonl.size();
    std::string_view line = Trim(jsonl.substr(pos, eol - pos));
    pos = eol + 1;
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line);
    plan.entries.push_back({j.at("atom_id").get<TokenId>(),
                            j.at("constituents").get<std::vector<TokenId>>(),
                            j.at("surface").get<std::string>()});
  }
  return plan;
}

}  // namespace atomlm

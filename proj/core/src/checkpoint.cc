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

#include "atomlm/checkpoint.h"

#include <bit>
#include <cstring>

#include "json.hpp"
#include "atomlm/util.h"

namespace atomlm {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json ConfigToJson(const ModelConfig &c) {
  ordered_json j;
  j["hidden"] = c.hidden;
  j["layers"] = c.layers;
  j["heads"] = c.heads;
  j["ff_width"] = c.ff_width;
  j["max_seq_len"] = c.max_seq_len;
  j["vocab_size"] = c.vocab_size;
  j["seed"] = c.seed;
  return j;
}

ModelConfig ConfigFromJson(const nlohmann::json &j) {
  ModelConfig c;
  c.hidden = j.at("hidden").get<int>();
  c.layers = j.at("layers").get<int>();
  c.heads = j.at("heads").get<int>();
  c.ff_width = j.at("ff_width").get<int>();
  c.max_seq_len = j.at("max_seq_len").get<int>();
  c.vocab_size = j.at("vocab_size").get<int>();
  c.seed = j.at("seed").get<uint64_t>();
  return c;
}

}  // namespace

void SaveCheckpoint(const MlmModel &model, const fs::path &dir) {
  fs::create_directories(dir);
  ordered_json manifest;
  manifest["format"] = "atomlm-checkpoint";
  manifest["version"] = 1;
  manifest["config"] = ConfigToJson(model.config);
  manifest["dtype"] = "f32";
  ordered_json tensors = ordered_json::array();
  std::string blob;
  model.params.ForEach([&](const std::string &name, const Matrix<float> &m) {
    ordered_json t;
    t["name"] = name;
    t["shape"] = {m.rows(), m.cols()};
    t["offset"] = blob.size();
    size_t bytes = static_cast<size_t>(m.size()) * sizeof(float);
    t["bytes"] = bytes;
    blob.append(reinterpret_cast<const char *>(m.data()), bytes);
    tensors.push_back(std::move(t));
  });
  manifest["tensors"] = std::move(tensors);
  WriteFile(dir / "tensors.bin", blob);
  WriteFile(dir / "manifest.json", manifest.dump(2) + "\n");
}

MlmModel LoadCheckpoint(const fs::path &dir) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(ReadFile(dir / "manifest.json"));
  } catch (const nlohmann::json::exception &e) {
    throw Error("malformed checkpoint manifest in " + dir.string() + ": " +
                e.what());
  }
  if (manifest.value("dtype", "") != "f32") {
    throw Error("unsupported checkpoint dtype in " + dir.string());
  }
  ModelConfig config = ConfigFromJson(manifest.at("config"));
  // The freshly initialized model fixes the expected shapes.
  MlmModel model = InitModel<float>(config);
  std::string blob = ReadFile(dir / "tensors.bin");

  const auto &entries = manifest.at("tensors");
  size_t index = 0;
  model.params.ForEach([&](const std::string &name, Matrix<float> &m) {
    if (index >= entries.size()) {
      throw Error("checkpoint missing tensor " + name);
    }
    const auto &t = entries[index++];
    if (t.at("name").get<std::string>() != name) {
      throw Error("checkpoint tensor order mismatch at " + name);
    }
    auto shape = t.at("shape").get<std::vector<int64_t>>();
    if (shape.size() != 2 || shape[0] != m.rows() || shape[1] != m.cols()) {
      throw Error("checkpoint shape mismatch for " + name);
    }
    size_t offset = t.at("offset").get<size_t>();
    size_t bytes = static_cast<size_t>(m.size()) * sizeof(float);
    if (offset + bytes > blob.size()) {
      throw Error("checkpoint tensors.bin truncated at " + name);
    }
    std::memcpy(m.data(), blob.data() + offset, bytes);
  });
  if (index != entries.size()) throw Error("checkpoint has extra tensors");
  return model;
}

}  // namespace atomlm

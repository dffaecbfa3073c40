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

#ifndef ATOMLM_CHECKPOINT_H_
#define ATOMLM_CHECKPOINT_H_

#include <filesystem>

#include "atomlm/model.h"

namespace atomlm {

// Checkpoint directory layout:
//   manifest.json  config, tensor names, shapes, dtype "f32", byte offsets
//   tensors.bin    row-major little-endian f32 blobs in manifest order
void SaveCheckpoint(const MlmModel &model, const std::filesystem::path &dir);

// Loads and validates every tensor shape against the stored config.
MlmModel LoadCheckpoint(const std::filesystem::path &dir);

}  // namespace atomlm

#endif  // ATOMLM_CHECKPOINT_H_

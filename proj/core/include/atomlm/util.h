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

#ifndef ATOMLM_UTIL_H_
#define ATOMLM_UTIL_H_

#include <cstdint>
#include <random>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace atomlm {

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File helpers. All reads are binary; WriteFile replaces the target through a
// sibling ".partial" file so a crash never leaves a truncated artifact under
// the final name.
std::string ReadFile(const std::filesystem::path &path);
void WriteFile(const std::filesystem::path &path, std::string_view content);
std::vector<std::string> ReadLines(const std::filesystem::path &path);

// Hex digests.
std::string Sha1Hex(std::string_view data);
std::string Sha256Hex(std::string_view data);
std::string Sha256File(const std::filesystem::path &path);

// Strips ASCII whitespace from both ends.
std::string_view Trim(std::string_view s);

// Deterministic random source. The engine output is fixed by the standard and
// the derived distributions are implemented here, so streams are identical
// across standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed);

  uint64_t Next();
  // Uniform integer in [0, n). n must be positive.
  uint64_t Uniform(uint64_t n);
  // Uniform double in [0, 1).
  double UniformReal();
  // Standard normal via Box-Muller.
  double Normal();

  template <typename It>
  void Shuffle(It first, It last) {
    auto n = static_cast<uint64_t>(last - first);
    for (uint64_t i = n; i > 1; --i) {
      uint64_t j = Uniform(i);
      std::swap(first[i - 1], first[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Mixes a seed with a stream tag so independent consumers of one user seed
// get decorrelated streams.
uint64_t DeriveSeed(uint64_t seed, std::string_view tag);

}  // namespace atomlm

#endif  // ATOMLM_UTIL_H_

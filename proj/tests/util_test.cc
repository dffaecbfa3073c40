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

#include "atomlm/util.h"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numeric>

namespace atomlm {
namespace {

namespace fs = std::filesystem;

TEST(Digest, KnownVectors) {
  EXPECT_EQ(Sha1Hex("abc"), "a9993e364706816aba3e25717850c26c9cd0d89d");
  EXPECT_EQ(Sha256Hex(""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(Trim, StripsAsciiWhitespace) {
  EXPECT_EQ(Trim("  a b\t\n"), "a b");
  EXPECT_EQ(Trim(" \t "), "");
}

TEST(WriteFile, ReplacesAtomically) {
  fs::path dir = fs::path(testing::TempDir()) / "util_write";
  fs::create_directories(dir);
  WriteFile(dir / "x.txt", "one");
  WriteFile(dir / "x.txt", "two\nthree\n");
  EXPECT_EQ(ReadFile(dir / "x.txt"), "two\nthree\n");
  EXPECT_FALSE(fs::exists(dir / "x.txt.partial"));
  EXPECT_EQ(ReadLines(dir / "x.txt"), (std::vector<std::string>{"two", "three"}));
  EXPECT_EQ(Sha256File(dir / "x.txt"), Sha256Hex("two\nthree\n"));
}

TEST(ReadFile, MissingFileThrows) {
  EXPECT_THROW(ReadFile("/nonexistent/atomlm/file"), Error);
}

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a.Next(), b.Next());
}

TEST(Rng, UniformStaysInRange) {
  Rng rng(3);
  std::vector<int> hist(7, 0);
  for (int i = 0; i < 7000; ++i) ++hist[rng.Uniform(7)];
  for (int h : hist) EXPECT_NEAR(h, 1000, 150);
  EXPECT_THROW(rng.Uniform(0), Error);
}

TEST(Rng, NormalMoments) {
  Rng rng(11);
  double sum = 0, sq = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    double x = rng.Normal();
    sum += x;
    sq += x * x;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.03);
  EXPECT_NEAR(sq / n, 1.0, 0.05);
}

TEST(Rng, ShuffleIsPermutation) {
  Rng rng(5);
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  rng.Shuffle(v.begin(), v.end());
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) EXPECT_EQ(sorted[i], i);
}

TEST(DeriveSeed, TagsDecorrelate) {
  EXPECT_EQ(DeriveSeed(7, "a"), DeriveSeed(7, "a"));
  EXPECT_NE(DeriveSeed(7, "a"), DeriveSeed(7, "b"));
  EXPECT_NE(DeriveSeed(7, "a"), DeriveSeed(8, "a"));
}

}  // namespace
}  // namespace atomlm

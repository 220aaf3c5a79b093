// Copyright 2026 The Obliviofuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "obliviofuzz/prng.h"

#include <array>
#include <cstdint>

#include "gtest/gtest.h"

namespace obliviofuzz {
namespace {

// Published SplitMix64 reference outputs.
TEST(PrngTest, MatchesReferenceSequence) {
  Prng zero(0);
  EXPECT_EQ(zero.NextU64(), 0xe220a8397b1dcdafULL);
  Prng rng(1234567);
  EXPECT_EQ(rng.NextU64(), 6457827717110365317ULL);
  EXPECT_EQ(rng.NextU64(), 3203168211198807973ULL);
  EXPECT_EQ(rng.NextU64(), 9817491932198370423ULL);
}

TEST(PrngTest, SameSeedSameStream) {
  Prng a(42);
  Prng b(42);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a.NextU64(), b.NextU64());
}

TEST(PrngTest, SplitLabelsDiffer) {
  Prng p1(9);
  Prng p2(9);
  Prng c1 = p1.Split(1);
  Prng c2 = p2.Split(2);
  EXPECT_NE(c1.NextU64(), c2.NextU64());
  // Both parents advanced by exactly one step.
  EXPECT_EQ(p1.state(), p2.state());
}

TEST(PrngTest, BitFrequencyIsBalanced) {
  Prng rng(2024);
  std::array<int, 64> ones{};
  constexpr int kDraws = 1'000'000;
  for (int i = 0; i < kDraws; ++i) {
    uint64_t x = rng.NextU64();
    for (int b = 0; b < 64; ++b) ones[b] += static_cast<int>((x >> b) & 1);
  }
  for (int b = 0; b < 64; ++b) {
    EXPECT_NEAR(ones[b] / static_cast<double>(kDraws), 0.5, 0.01) << "bit " << b;
  }
}

TEST(PrngTest, BelowStaysInRangeAndCoversIt) {
  Prng rng(77);
  std::array<int, 7> hist{};
  for (int i = 0; i < 70'000; ++i) {
    const uint64_t x = rng.Below(7);
    ASSERT_LT(x, 7u);
    ++hist[x];
  }
  for (int h : hist) EXPECT_NEAR(h, 10'000, 500);
  EXPECT_EQ(rng.Below(1), 0u);
}

TEST(PrngTest, RangeIsInclusive) {
  Prng rng(8);
  bool lo = false;
  bool hi = false;
  for (int i = 0; i < 1000; ++i) {
    const uint64_t x = rng.Range(3, 5);
    ASSERT_GE(x, 3u);
    ASSERT_LE(x, 5u);
    lo |= x == 3;
    hi |= x == 5;
  }
  EXPECT_TRUE(lo && hi);
}

TEST(PrngTest, UniformInUnitInterval) {
  Prng rng(1);
  double sum = 0;
  for (int i = 0; i < 100'000; ++i) {
    const double u = rng.Uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100'000, 0.5, 0.01);
}

}  // namespace
}  // namespace obliviofuzz

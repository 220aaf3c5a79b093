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


#include "obliviofuzz/coverage.h"

#include <algorithm>
#include <cstdint>
#include <vector>

#include "absl/status/status.h"
#include "gtest/gtest.h"
#include "obliviofuzz/prng.h"

namespace obliviofuzz {
namespace {

TEST(CoverageMapTest, SerializesToFourKilobytes) {
  CoverageMap map;
  EXPECT_EQ(map.Serialize().size(), 4096u);
  EXPECT_EQ(map.EdgeCount(), 0u);
}

TEST(CoverageMapTest, EdgeZeroZeroLandsInSlotZero) {
  CoverageMap map;
  map.RecordEdge(0, 0);
  EXPECT_EQ(map.count(0), 1);
  EXPECT_EQ(map.EdgeCount(), 1u);
}

TEST(CoverageMapTest, EdgeTwoThreeLandsInSlotTwo) {
  CoverageMap map;
  map.RecordEdge(2, 3);
  EXPECT_EQ(map.count(2), 1);
  EXPECT_EQ(map.EdgeCount(), 1u);
}

TEST(CoverageMapTest, IndexWrapsAtMapSize) {
  // (0 >> 1) ^ 4097 = 4097, mod 4096 = 1.
  EXPECT_EQ(EdgeIndex(0, 4097), 1u);
  // (0xffff >> 1) ^ 0 = 0x7fff, mod 4096 = 0xfff.
  EXPECT_EQ(EdgeIndex(0xffff, 0), 0xfffu);
}

TEST(CoverageMapTest, CounterSaturatesAt255) {
  CoverageMap map;
  for (int i = 0; i < 300; ++i) map.RecordEdge(7, 9);
  EXPECT_EQ(map.count(EdgeIndex(7, 9)), 255);
  EXPECT_EQ(map.EdgeCount(), 1u);
}

TEST(CoverageMapTest, ClearResetsTouchedSlots) {
  CoverageMap map;
  map.RecordEdge(1, 2);
  map.RecordEdge(100, 200);
  map.Clear();
  EXPECT_EQ(map, CoverageMap());
  EXPECT_TRUE(map.touched().empty());
}

TEST(BucketizeTest, TableValues) {
  EXPECT_EQ(Bucketize(0), 0);
  EXPECT_EQ(Bucketize(6), 4);
  EXPECT_EQ(Bucketize(255), 8);
  const uint8_t expected[][2] = {{1, 1},  {2, 2},  {3, 3},   {4, 4},
                                 {7, 4},  {8, 5},  {15, 5},  {16, 6},
                                 {31, 6}, {32, 7}, {127, 7}, {128, 8}};
  for (const auto& [count, klass] : expected) {
    EXPECT_EQ(Bucketize(count), klass) << int{count};
  }
}

TEST(BucketizeTest, MonotoneOverAllCounts) {
  for (int c = 1; c < 256; ++c) {
    EXPECT_LE(Bucketize(static_cast<uint8_t>(c - 1)),
              Bucketize(static_cast<uint8_t>(c)));
  }
}

TEST(NoveltyTest, AnythingBeatsEmptyGlobal) {
  CoverageMap run;
  run.RecordEdge(3, 4);
  EXPECT_EQ(ComputeNovelty(ClassMap(), run), (Novelty{true, 1}));
}

TEST(NoveltyTest, SelfComparisonIsNotNew) {
  CoverageMap run;
  run.RecordEdge(3, 4);
  run.RecordEdge(5, 6);
  EXPECT_EQ(ComputeNovelty(ClassMap::Classify(run), run), (Novelty{}));
}

TEST(NoveltyTest, SaturatedGlobalRejectsEverything) {
  ClassMap global;
  for (size_t i = 0; i < kMapSize; ++i) global.set_klass(i, kMaxClass);
  Prng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    CoverageMap run;
    const int edges = static_cast<int>(rng.Range(1, 40));
    for (int e = 0; e < edges; ++e) {
      run.RecordEdge(static_cast<SiteId>(rng.NextU64()),
                     static_cast<SiteId>(rng.NextU64()));
    }
    EXPECT_EQ(ComputeNovelty(global, run), (Novelty{}));
  }
}

TEST(NoveltyTest, HigherBucketCountsAsNew) {
  CoverageMap once;
  once.RecordEdge(1, 1);
  CoverageMap twice = once;
  twice.RecordEdge(1, 1);
  EXPECT_EQ(ComputeNovelty(ClassMap::Classify(once), twice), (Novelty{true, 1}));
  // Same bucket (4..7) is not new.
  CoverageMap four;
  for (int i = 0; i < 4; ++i) four.RecordEdge(1, 1);
  CoverageMap six;
  for (int i = 0; i < 6; ++i) six.RecordEdge(1, 1);
  EXPECT_FALSE(ComputeNovelty(ClassMap::Classify(four), six).is_new);
}

ClassMap RandomClassMap(Prng& rng) {
  ClassMap m;
  const int n = static_cast<int>(rng.Below(64));
  for (int i = 0; i < n; ++i) {
    m.set_klass(rng.Below(kMapSize), static_cast<uint8_t>(rng.Range(1, 8)));
  }
  return m;
}

TEST(MergeTest, ZeroMapsMergeToZero) {
  EXPECT_EQ(MergeClass(ClassMap::Classify(CoverageMap()),
                       ClassMap::Classify(CoverageMap())),
            ClassMap());
}

TEST(MergeTest, IdentityIdempotenceAndCommutativity) {
  Prng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const ClassMap x = RandomClassMap(rng);
    const ClassMap y = RandomClassMap(rng);
    EXPECT_EQ(MergeClass(x, ClassMap()), x);
    EXPECT_EQ(MergeClass(x, x), x);
    EXPECT_EQ(MergeClass(x, y), MergeClass(y, x));
    const ClassMap m = MergeClass(x, y);
    EXPECT_TRUE(m.Dominates(x));
    EXPECT_TRUE(m.Dominates(y));
    for (size_t i = 0; i < kMapSize; ++i) {
      ASSERT_EQ(m.klass(i), std::max(x.klass(i), y.klass(i)));
    }
  }
}

TEST(MergeTest, MergeFromCountsRaisedSlots) {
  ClassMap a;
  a.set_klass(1, 3);
  ClassMap b;
  b.set_klass(1, 2);
  b.set_klass(2, 1);
  b.set_klass(3, 5);
  EXPECT_EQ(a.MergeFrom(b), 2u);
  EXPECT_EQ(a.MergeFrom(b), 0u);
  EXPECT_EQ(a.NonZeroCount(), 3u);
}

TEST(ClassMapTest, SignatureRoundTrip) {
  Prng rng(3);
  const ClassMap m = RandomClassMap(rng);
  const std::vector<ClassSlot> sig = m.Signature();
  EXPECT_TRUE(std::is_sorted(sig.begin(), sig.end()));
  EXPECT_EQ(sig.size(), m.NonZeroCount());
  EXPECT_EQ(ClassMap::FromSignature(sig), m);
}

TEST(ClassMapTest, DeserializeRoundTrip) {
  Prng rng(4);
  const ClassMap m = RandomClassMap(rng);
  absl::StatusOr<ClassMap> back = ClassMap::Deserialize(m.Serialize());
  ASSERT_TRUE(back.ok()) << back.status();
  EXPECT_EQ(*back, m);
}

TEST(ClassMapTest, DeserializeRejectsWrongSize) {
  std::vector<uint8_t> bytes(4095, 0);
  EXPECT_EQ(ClassMap::Deserialize(bytes).status().code(),
            absl::StatusCode::kInvalidArgument);
  bytes.resize(4097);
  EXPECT_FALSE(ClassMap::Deserialize(bytes).ok());
}

TEST(ClassMapTest, DeserializeRejectsClassAboveEight) {
  std::vector<uint8_t> bytes(4096, 0);
  bytes[17] = 9;
  EXPECT_FALSE(ClassMap::Deserialize(bytes).ok());
}

}  // namespace
}  // namespace obliviofuzz

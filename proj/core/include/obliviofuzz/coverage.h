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

// Edge coverage: a fixed 4096-slot hit-count map, AFL-style bucket classes,
// and the novelty / merge operations the corpus manager and the cluster sync
// are built on.
//
// Run-local state is a CoverageMap of raw saturating counters. Global state is
// a ClassMap holding one bucket class per slot; storing classes rather than
// counts makes cross-node merging lossless with respect to novelty.
#ifndef OBLIVIOFUZZ_COVERAGE_H_
#define OBLIVIOFUZZ_COVERAGE_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"

namespace obliviofuzz {

inline constexpr size_t kMapSize = 4096;
inline constexpr uint8_t kMaxClass = 8;

// 16-bit code-site identifier emitted by a fuzz target.
using SiteId = uint16_t;

struct Edge {
  SiteId prev;
  SiteId cur;
  bool operator==(const Edge&) const = default;
};

// Slot index of edge (prev, cur).
constexpr size_t EdgeIndex(SiteId prev, SiteId cur) {
  return ((static_cast<size_t>(prev) >> 1) ^ cur) % kMapSize;
}

// Maps a raw hit count to its class code:
// 0, 1, 2, 3, 4-7, 8-15, 16-31, 32-127, 128-255 -> 0..8.
constexpr uint8_t Bucketize(uint8_t count) {
  if (count <= 3) return count;
  if (count < 8) return 4;
  if (count < 16) return 5;
  if (count < 32) return 6;
  if (count < 128) return 7;
  return 8;
}

// Raw per-run hit counters. Also remembers which slots were touched so that
// clearing and novelty checks cost O(edges) rather than O(kMapSize).
class CoverageMap {
 public:
  CoverageMap() { counts_.fill(0); }

  void RecordEdge(SiteId prev, SiteId cur) {
    const size_t index = EdgeIndex(prev, cur);
    uint8_t& c = counts_[index];
    if (c == 0) touched_.push_back(static_cast<uint16_t>(index));
    if (c != 0xff) ++c;
  }
  void RecordEdges(std::span<const Edge> edges) {
    for (const Edge& e : edges) RecordEdge(e.prev, e.cur);
  }

  // Number of slots with a non-zero counter.
  size_t EdgeCount() const { return touched_.size(); }
  uint8_t count(size_t index) const { return counts_[index]; }
  const std::array<uint8_t, kMapSize>& counts() const { return counts_; }
  // Non-zero slots in first-touch order.
  std::span<const uint16_t> touched() const { return touched_; }
  void Clear() {
    for (uint16_t i : touched_) counts_[i] = 0;
    touched_.clear();
  }
  // Serialized form: the 4096 raw counters.
  std::vector<uint8_t> Serialize() const {
    return {counts_.begin(), counts_.end()};
  }

  bool operator==(const CoverageMap& other) const {
    return counts_ == other.counts_;
  }

 private:
  std::array<uint8_t, kMapSize> counts_;
  std::vector<uint16_t> touched_;
};

// One (slot, class) pair of a sparse class signature.
struct ClassSlot {
  uint16_t index;
  uint8_t klass;
  bool operator==(const ClassSlot&) const = default;
  auto operator<=>(const ClassSlot&) const = default;
};

class ClassMap {
 public:
  ClassMap() { classes_.fill(0); }

  static ClassMap Classify(const CoverageMap& map);
  static ClassMap FromSignature(std::span<const ClassSlot> signature);
  // Parses the 4096-byte `.cov` serialization. Rejects wrong sizes and
  // out-of-range class codes.
  static absl::StatusOr<ClassMap> Deserialize(std::span<const uint8_t> bytes);

  uint8_t klass(size_t index) const { return classes_[index]; }
  void set_klass(size_t index, uint8_t klass) { classes_[index] = klass; }
  const std::array<uint8_t, kMapSize>& classes() const { return classes_; }

  // Element-wise maximum in place; returns the number of slots that rose.
  size_t MergeFrom(const ClassMap& other);
  size_t MergeFrom(std::span<const ClassSlot> signature);

  // Sparse list of non-zero slots, ascending by index.
  std::vector<ClassSlot> Signature() const;
  size_t NonZeroCount() const;
  // True iff every slot of `other` is <= the same slot here.
  bool Dominates(const ClassMap& other) const;

  std::vector<uint8_t> Serialize() const {
    return {classes_.begin(), classes_.end()};
  }

  bool operator==(const ClassMap&) const = default;

 private:
  std::array<uint8_t, kMapSize> classes_;
};

struct Novelty {
  bool is_new = false;
  size_t new_slot_count = 0;
  bool operator==(const Novelty&) const = default;
};

// Compares a run against the global classes without modifying either.
Novelty ComputeNovelty(const ClassMap& global, const CoverageMap& run);

ClassMap MergeClass(const ClassMap& a, const ClassMap& b);

}  // namespace obliviofuzz

#endif  // OBLIVIOFUZZ_COVERAGE_H_

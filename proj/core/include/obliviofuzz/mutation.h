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

// Havoc-style input mutation. Every call is a pure function of the input, the
// generator state and the splice pool, so an iteration's seed is enough to
// regenerate the exact input it executed.
#ifndef OBLIVIOFUZZ_MUTATION_H_
#define OBLIVIOFUZZ_MUTATION_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "obliviofuzz/prng.h"

namespace obliviofuzz {

using Bytes = std::vector<uint8_t>;

inline constexpr size_t kDefaultMaxLen = 4096;
inline constexpr int kMaxHavocStack = 8;

enum class MutationOp : uint8_t {
  kBitFlip,
  kByteFlip,
  kByteSet,
  kInterestingValue,
  kDeleteRange,
  kInsertRandom,
  kDuplicateRange,
  kSpliceWithSeed,
};
inline constexpr size_t kMutationOpCount = 8;

std::string_view MutationOpName(MutationOp op);

// Values written by kInterestingValue, each at its natural width
// (1, 2 or 4 bytes, little-endian).
inline constexpr std::array<uint32_t, 7> kInterestingValues = {
    0, 1, 0x7f, 0x80, 0xff, 0xffff, 0x7fffffff};

// Applies a single op in place. `data` must be non-empty and is kept within
// [1, max_len]. kSpliceWithSeed with an empty pool falls back to
// kInsertRandom.
void ApplyMutation(MutationOp op, Bytes& data, Prng& rng, size_t max_len,
                   std::span<const Bytes> splice_pool);

// Applies a stack of 1..8 uniformly chosen ops. kSpliceWithSeed is only
// eligible when `splice_pool` is non-empty. An empty `input` is treated as
// the single byte 0.
Bytes Mutate(std::span<const uint8_t> input, Prng& rng, size_t max_len,
             std::span<const Bytes> splice_pool);

}  // namespace obliviofuzz

#endif  // OBLIVIOFUZZ_MUTATION_H_

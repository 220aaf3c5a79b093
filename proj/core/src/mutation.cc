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

#include "obliviofuzz/mutation.h"

#include <algorithm>

namespace obliviofuzz {
namespace {

size_t WidthOf(uint32_t value) {
  if (value <= 0xff) return 1;
  if (value <= 0xffff) return 2;
  return 4;
}

void Clamp(Bytes& data, size_t max_len) {
  if (data.size() > max_len) data.resize(max_len);
  if (data.empty()) data.push_back(0);
}

}  // namespace

std::string_view MutationOpName(MutationOp op) {
  switch (op) {
    case MutationOp::kBitFlip: return "BitFlip";
    case MutationOp::kByteFlip: return "ByteFlip";
    case MutationOp::kByteSet: return "ByteSet";
    case MutationOp::kInterestingValue: return "InterestingValue";
    case MutationOp::kDeleteRange: return "DeleteRange";
    case MutationOp::kInsertRandom: return "InsertRandom";
    case MutationOp::kDuplicateRange: return "DuplicateRange";
    case MutationOp::kSpliceWithSeed: return "SpliceWithSeed";
  }
  return "?";
}

void ApplyMutation(MutationOp op, Bytes& data, Prng& rng, size_t max_len,
                   std::span<const Bytes> splice_pool) {
  if (data.empty()) data.push_back(0);
  const size_t n = data.size();
  switch (op) {
    case MutationOp::kBitFlip: {
      const size_t bit = rng.Below(n * 8);
      data[bit / 8] ^= static_cast<uint8_t>(1u << (bit % 8));
      break;
    }
    case MutationOp::kByteFlip:
      data[rng.Below(n)] ^= 0xff;
      break;
    case MutationOp::kByteSet:
      data[rng.Below(n)] = rng.Byte();
      break;
    case MutationOp::kInterestingValue: {
      const uint32_t value =
          kInterestingValues[rng.Below(kInterestingValues.size())];
      const size_t pos = rng.Below(n);
      const size_t width = std::min(WidthOf(value), n - pos);
      for (size_t i = 0; i < width; ++i) {
        data[pos + i] = static_cast<uint8_t>(value >> (8 * i));
      }
      break;
    }
    case MutationOp::kDeleteRange: {
      if (n == 1) {
        // Nothing removable; degrade to a byte replacement.
        data[0] = rng.Byte();
        break;
      }
      const size_t len = rng.Range(1, std::min<size_t>(n - 1, 16));
      const size_t pos = rng.Below(n - len + 1);
      data.erase(data.begin() + pos, data.begin() + pos + len);
      break;
    }
    case MutationOp::kInsertRandom: {
      const size_t len = rng.Range(1, 4);
      const size_t pos = rng.Below(n + 1);
      Bytes chunk(len);
      for (uint8_t& b : chunk) b = rng.Byte();
      data.insert(data.begin() + pos, chunk.begin(), chunk.end());
      break;
    }
    case MutationOp::kDuplicateRange: {
      const size_t len = rng.Range(1, std::min<size_t>(n, 16));
      const size_t from = rng.Below(n - len + 1);
      const size_t to = rng.Below(n + 1);
      const Bytes chunk(data.begin() + from, data.begin() + from + len);
      data.insert(data.begin() + to, chunk.begin(), chunk.end());
      break;
    }
    case MutationOp::kSpliceWithSeed: {
      if (splice_pool.empty()) {
        ApplyMutation(MutationOp::kInsertRandom, data, rng, max_len, {});
        return;
      }
      const Bytes& other = splice_pool[rng.Below(splice_pool.size())];
      if (other.empty()) break;
      // Keep a head of `data`, append a tail of `other`.
      const size_t cut = rng.Range(1, n);
      const size_t from = rng.Below(other.size());
      data.resize(cut);
      data.insert(data.end(), other.begin() + from, other.end());
      break;
    }
  }
  Clamp(data, max_len);
}

Bytes Mutate(std::span<const uint8_t> input, Prng& rng, size_t max_len,
             std::span<const Bytes> splice_pool) {
  max_len = std::max<size_t>(max_len, 1);
  Bytes data(input.begin(), input.end());
  Clamp(data, max_len);
  const size_t op_choices =
      splice_pool.empty() ? kMutationOpCount - 1 : kMutationOpCount;
  const int depth = static_cast<int>(rng.Range(1, kMaxHavocStack));
  for (int i = 0; i < depth; ++i) {
    const auto op = static_cast<MutationOp>(rng.Below(op_choices));
    ApplyMutation(op, data, rng, max_len, splice_pool);
  }
  return data;
}

}  // namespace obliviofuzz

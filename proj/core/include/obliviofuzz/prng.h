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

#ifndef OBLIVIOFUZZ_PRNG_H_
#define OBLIVIOFUZZ_PRNG_H_

#include <cstdint>

namespace obliviofuzz {

// SplitMix64 (Steele, Lea, Flood 2014). State advances by the golden-ratio
// increment 0x9e3779b97f4a7c15; output is the state passed through the
// variant-13 finalizer (shift 30/27/31, multipliers 0xbf58476d1ce4e5b9 and
// 0x94d049bb133111eb). Bit-identical on every platform.
class Prng {
 public:
  explicit Prng(uint64_t seed) : state_(seed) {}

  static constexpr uint64_t Mix(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  uint64_t NextU64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return Mix(state_);
  }

  // Child generator keyed by `label`. Consumes exactly one parent step.
  Prng Split(uint32_t label) {
    const uint64_t base = NextU64();
    return Prng(Mix(base ^ (0xd1b54a32d192ed03ULL * (uint64_t{label} + 1))));
  }

  // Uniform in [0, bound). bound must be non-zero. Uses Lemire's multiply-
  // shift reduction with rejection, so the result is exactly uniform.
  uint64_t Below(uint64_t bound) {
    uint64_t x = NextU64();
    __uint128_t m = static_cast<__uint128_t>(x) * bound;
    uint64_t low = static_cast<uint64_t>(m);
    if (low < bound) {
      const uint64_t threshold = -bound % bound;
      while (low < threshold) {
        x = NextU64();
        m = static_cast<__uint128_t>(x) * bound;
        low = static_cast<uint64_t>(m);
      }
    }
    return static_cast<uint64_t>(m >> 64);
  }

  // Uniform in [lo, hi], inclusive.
  uint64_t Range(uint64_t lo, uint64_t hi) { return lo + Below(hi - lo + 1); }

  // Uniform double in [0, 1) with 53 bits of precision.
  double Uniform() { return static_cast<double>(NextU64() >> 11) * 0x1.0p-53; }

  uint8_t Byte() { return static_cast<uint8_t>(NextU64() >> 56); }

  uint64_t state() const { return state_; }

 private:
  uint64_t state_;
};

}  // namespace obliviofuzz

#endif  // OBLIVIOFUZZ_PRNG_H_

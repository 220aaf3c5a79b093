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

// Oblivious crash scheduling. Time is cut into windows of 60 / rate seconds.
// Each window draws one uniform fake-crash deadline; the fake fires at the
// deadline unless a real crash already happened earlier in the same window.
// Real crashes always pass through untouched, so every window shows at least
// one crash and the fakes fill in wherever reals are absent.
#ifndef OBLIVIOFUZZ_OCRASH_H_
#define OBLIVIOFUZZ_OCRASH_H_

#include <cstdint>
#include <optional>

#include "obliviofuzz/mutation.h"
#include "obliviofuzz/prng.h"

namespace obliviofuzz {

struct CrashEvent {
  enum class Kind : uint8_t { kFake = 0, kReal = 1 };

  double at_seconds = 0;
  Kind kind = Kind::kFake;
  int bug_id = -1;  // kReal only
  Bytes input;      // kReal only

  bool real() const { return kind == Kind::kReal; }
  bool operator==(const CrashEvent&) const = default;
};

class CrashScheduler {
 public:
  // `target_rate_per_min` must be positive.
  CrashScheduler(double target_rate_per_min, Prng rng, double start_seconds);

  // Emits the current window's fake if it is due. Rolls to later windows as
  // `now` crosses their start. Call repeatedly until it returns nullopt; a
  // caller must drain it before reporting a real crash at the same `now`.
  std::optional<CrashEvent> Poll(double now);

  // Passes a real crash through. A real before the deadline cancels the
  // window's fake.
  CrashEvent OnRealCrash(double now, int bug_id, Bytes input);

  // Earliest time at which Poll can return an event.
  double next_due() const;

  double window_len() const { return window_len_; }
  double window_start() const { return window_start_; }
  double fake_deadline() const { return fake_deadline_; }
  bool real_seen_before_deadline() const { return real_seen_before_deadline_; }
  bool fake_emitted() const { return fake_emitted_; }

 private:
  void Roll();
  void AdvanceTo(double now);

  double window_len_;
  double window_start_;
  double fake_deadline_ = 0;
  bool real_seen_before_deadline_ = false;
  bool fake_emitted_ = false;
  Prng rng_;
};

}  // namespace obliviofuzz

#endif  // OBLIVIOFUZZ_OCRASH_H_

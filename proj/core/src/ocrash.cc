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

#include "obliviofuzz/ocrash.h"

#include <algorithm>
#include <utility>

namespace obliviofuzz {

CrashScheduler::CrashScheduler(double target_rate_per_min, Prng rng,
                               double start_seconds)
    : window_len_(60.0 / target_rate_per_min),
      window_start_(start_seconds),
      rng_(rng) {
  fake_deadline_ = window_start_ + rng_.Uniform() * window_len_;
}

void CrashScheduler::Roll() {
  window_start_ += window_len_;
  fake_deadline_ = window_start_ + rng_.Uniform() * window_len_;
  real_seen_before_deadline_ = false;
  fake_emitted_ = false;
}

void CrashScheduler::AdvanceTo(double now) {
  while (now >= window_start_ + window_len_) Roll();
}

double CrashScheduler::next_due() const {
  if (!fake_emitted_ && !real_seen_before_deadline_) return fake_deadline_;
  return window_start_ + window_len_;
}

std::optional<CrashEvent> CrashScheduler::Poll(double now) {
  for (;;) {
    if (!fake_emitted_ && !real_seen_before_deadline_ &&
        now >= fake_deadline_) {
      fake_emitted_ = true;
      return CrashEvent{.at_seconds = now, .kind = CrashEvent::Kind::kFake};
    }
    if (now < window_start_ + window_len_) return std::nullopt;
    Roll();
  }
}

CrashEvent CrashScheduler::OnRealCrash(double now, int bug_id, Bytes input) {
  AdvanceTo(now);
  if (now < fake_deadline_) real_seen_before_deadline_ = true;
  return CrashEvent{.at_seconds = now,
                    .kind = CrashEvent::Kind::kReal,
                    .bug_id = bug_id,
                    .input = std::move(input)};
}

}  // namespace obliviofuzz

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

// Simulated enclave: a virtual clock charged through a calibrated cost model,
// resident-memory accounting with an EPC paging cliff, a measurement check at
// load time, and the append-only trace of what the untrusted host can see.
//
// The observer trace is the only enclave state the cloud side may read. Its
// events carry timing, kind and length, never payload or crash cause.
#ifndef OBLIVIOFUZZ_ENCLAVE_H_
#define OBLIVIOFUZZ_ENCLAVE_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "obliviofuzz/crypto.h"

namespace obliviofuzz {

enum class SgxMode : uint8_t { kNoSgx = 0, kSgxSim = 1, kSgxHw = 2 };
inline constexpr size_t kSgxModeCount = 3;

std::string_view SgxModeName(SgxMode mode);  // no-sgx | sgx-sim | sgx-hw
absl::StatusOr<SgxMode> ParseSgxMode(std::string_view name);

// Reference throughput of the toy driver, executions per second.
inline constexpr double kNoSgxExecRate = 73630.0;
inline constexpr double kSgxSimExecRate = 60220.0;
inline constexpr double kSgxHwExecRate = 40320.0;

inline constexpr size_t kMiB = size_t{1} << 20;

struct CostModel {
  SgxMode mode = SgxMode::kSgxHw;
  // Slowdown relative to kNoSgx, indexed by SgxMode. Ratios of the reference
  // throughputs, so cost_units = 1 reproduces them exactly.
  std::array<double, kSgxModeCount> mode_multiplier = {
      1.0, kNoSgxExecRate / kSgxSimExecRate, kNoSgxExecRate / kSgxHwExecRate};
  double base_exec_rate = kNoSgxExecRate;  // execs per virtual second
  double ocall_cost_us = 8.0;
  double restart_cost_us = 2000.0;
  size_t epc_limit_bytes = 128 * kMiB;
  double paging_penalty = 5.0;
  size_t runtime_base_bytes = 2 * kMiB;

  double multiplier() const {
    return mode_multiplier[static_cast<size_t>(mode)];
  }
  absl::Status Validate() const;
};

struct ObserverEvent {
  enum class Kind : uint8_t { kCrashExit, kOCall, kFrameSent };

  double at_us = 0;
  Kind kind = Kind::kOCall;
  uint32_t length = 0;  // bytes, kFrameSent only

  bool operator==(const ObserverEvent&) const = default;
};

std::string_view ObserverKindName(ObserverEvent::Kind kind);

class EnclaveSim {
 public:
  // Measures fuzzer_image || target_image and admits the pair only if the
  // digest matches. A mismatch is reported as kPermissionDenied.
  static absl::StatusOr<EnclaveSim> Load(std::span<const uint8_t> fuzzer_image,
                                         std::span<const uint8_t> target_image,
                                         const Digest& expected_measurement,
                                         const CostModel& cost);

  static Digest Measure(std::span<const uint8_t> fuzzer_image,
                        std::span<const uint8_t> target_image) {
    return Sha256(fuzzer_image, target_image);
  }

  // Each returns the virtual microseconds charged.
  double ChargeExec(uint32_t cost_units);
  double ChargeOCall();
  void EmitCrashExit();
  void RecordFrameSent(uint32_t length);

  double PagingFactor() const {
    return rss_bytes() > cost_.epc_limit_bytes ? cost_.paging_penalty : 1.0;
  }

  double clock_us() const { return clock_us_; }
  double clock_seconds() const { return clock_us_ * 1e-6; }
  size_t rss_bytes() const {
    return cost_.runtime_base_bytes + corpus_bytes_ + transient_bytes_;
  }
  void set_corpus_bytes(size_t bytes) { corpus_bytes_ = bytes; }
  void set_transient_bytes(size_t bytes) { transient_bytes_ = bytes; }
  size_t corpus_bytes() const { return corpus_bytes_; }
  const CostModel& cost() const { return cost_; }
  const Digest& measurement() const { return measurement_; }

  std::span<const ObserverEvent> ObserverView() const { return observer_log_; }

 private:
  EnclaveSim(const CostModel& cost, const Digest& measurement)
      : cost_(cost), measurement_(measurement) {}

  double clock_us_ = 0;
  size_t corpus_bytes_ = 0;
  size_t transient_bytes_ = 0;
  CostModel cost_;
  Digest measurement_;
  std::vector<ObserverEvent> observer_log_;
};

// `t_micros,kind,length` rows; length is empty for non-frame events.
std::string ObserverCsv(std::span<const ObserverEvent> trace);

}  // namespace obliviofuzz

#endif  // OBLIVIOFUZZ_ENCLAVE_H_

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

#include "obliviofuzz/enclave.h"

#include <cstdio>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace obliviofuzz {

std::string_view SgxModeName(SgxMode mode) {
  switch (mode) {
    case SgxMode::kNoSgx: return "no-sgx";
    case SgxMode::kSgxSim: return "sgx-sim";
    case SgxMode::kSgxHw: return "sgx-hw";
  }
  return "?";
}

absl::StatusOr<SgxMode> ParseSgxMode(std::string_view name) {
  if (name == "no-sgx") return SgxMode::kNoSgx;
  if (name == "sgx-sim") return SgxMode::kSgxSim;
  if (name == "sgx-hw") return SgxMode::kSgxHw;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown mode '", std::string(name), "' (want no-sgx|sgx-sim|sgx-hw)"));
}

absl::Status CostModel::Validate() const {
  for (double m : mode_multiplier) {
    if (!(m >= 1.0)) {
      return absl::InvalidArgumentError("mode multipliers must be >= 1.0");
    }
  }
  if (!(paging_penalty >= 1.0)) {
    return absl::InvalidArgumentError("paging_penalty must be >= 1.0");
  }
  if (epc_limit_bytes == 0) {
    return absl::InvalidArgumentError("epc_limit_bytes must be > 0");
  }
  if (!(base_exec_rate > 0)) {
    return absl::InvalidArgumentError("base_exec_rate must be > 0");
  }
  if (!(ocall_cost_us >= 0) || !(restart_cost_us >= 0)) {
    return absl::InvalidArgumentError("costs must be non-negative");
  }
  return absl::OkStatus();
}

std::string_view ObserverKindName(ObserverEvent::Kind kind) {
  switch (kind) {
    case ObserverEvent::Kind::kCrashExit: return "crash_exit";
    case ObserverEvent::Kind::kOCall: return "ocall";
    case ObserverEvent::Kind::kFrameSent: return "frame_sent";
  }
  return "?";
}

absl::StatusOr<EnclaveSim> EnclaveSim::Load(
    std::span<const uint8_t> fuzzer_image,
    std::span<const uint8_t> target_image, const Digest& expected_measurement,
    const CostModel& cost) {
  if (absl::Status s = cost.Validate(); !s.ok()) return s;
  const Digest measured = Measure(fuzzer_image, target_image);
  if (measured != expected_measurement) {
    return absl::PermissionDeniedError(
        absl::StrCat("measurement mismatch: got ", ToHex(measured),
                     ", expected ", ToHex(expected_measurement)));
  }
  return EnclaveSim(cost, measured);
}

double EnclaveSim::ChargeExec(uint32_t cost_units) {
  const double elapsed = static_cast<double>(cost_units) *
                         (1e6 / cost_.base_exec_rate) * cost_.multiplier() *
                         PagingFactor();
  clock_us_ += elapsed;
  return elapsed;
}

double EnclaveSim::ChargeOCall() {
  const double elapsed = cost_.ocall_cost_us * cost_.multiplier();
  observer_log_.push_back({clock_us_, ObserverEvent::Kind::kOCall, 0});
  clock_us_ += elapsed;
  return elapsed;
}

void EnclaveSim::EmitCrashExit() {
  observer_log_.push_back({clock_us_, ObserverEvent::Kind::kCrashExit, 0});
  clock_us_ += cost_.restart_cost_us;
}

void EnclaveSim::RecordFrameSent(uint32_t length) {
  observer_log_.push_back({clock_us_, ObserverEvent::Kind::kFrameSent, length});
}

std::string ObserverCsv(std::span<const ObserverEvent> trace) {
  std::string out = "t_micros,kind,length\n";
  char buf[64];
  for (const ObserverEvent& e : trace) {
    std::snprintf(buf, sizeof(buf), "%.3f", e.at_us);
    absl::StrAppend(&out, buf, ",", std::string(ObserverKindName(e.kind)), ",");
    if (e.kind == ObserverEvent::Kind::kFrameSent) absl::StrAppend(&out, e.length);
    out.push_back('\n');
  }
  return out;
}

}  // namespace obliviofuzz

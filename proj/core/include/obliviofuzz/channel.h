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

// Crash-report channel between the enclave and the end user.
//
// Every report, real or fake, is padded to a 312-byte plaintext and sealed
// with XChaCha20-Poly1305 into a 352-byte frame:
//
//   frame     = nonce[24] || ciphertext+tag[328]
//   plaintext = version u8 | kind u8 | node_id u16 | seq u32 | at_micros u64 |
//               input_len u16 | input[256] | zero padding[38]
//
// Integers are big-endian. The host therefore sees a constant length and a
// timestamp per report and nothing else.
#ifndef OBLIVIOFUZZ_CHANNEL_H_
#define OBLIVIOFUZZ_CHANNEL_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <set>
#include <span>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "obliviofuzz/crypto.h"
#include "obliviofuzz/mutation.h"

namespace obliviofuzz {

inline constexpr uint8_t kReportVersion = 1;
inline constexpr size_t kMaxReportInput = 256;
inline constexpr size_t kPlaintextSize = 312;
inline constexpr size_t kCiphertextSize = kPlaintextSize + kTagSize;  // 328
inline constexpr size_t kFrameSize = kNonceSize + kCiphertextSize;    // 352

struct CrashReport {
  uint8_t version = kReportVersion;
  uint8_t kind = 0;  // 0 = fake, 1 = real
  uint16_t node_id = 0;
  uint32_t seq = 0;
  uint64_t at_micros = 0;
  Bytes input;  // at most kMaxReportInput bytes; empty for fakes

  bool operator==(const CrashReport&) const = default;
};

using ReportFrame = std::array<uint8_t, kFrameSize>;

// Plaintext layout helpers. Pack rejects inputs over kMaxReportInput.
absl::StatusOr<std::array<uint8_t, kPlaintextSize>> PackReport(
    const CrashReport& report);
absl::StatusOr<CrashReport> UnpackReport(std::span<const uint8_t> plaintext);

absl::StatusOr<ReportFrame> EncodeReport(const CrashReport& report,
                                         const SessionKey& key,
                                         const Nonce& nonce);
// Any tampered byte or a wrong key is kUnauthenticated.
absl::StatusOr<CrashReport> DecodeReport(std::span<const uint8_t> frame,
                                         const SessionKey& key);

// Keyed digest of the campaign seed. Stands in for the key an attested TLS
// handshake would establish.
SessionKey DeriveSessionKey(uint64_t campaign_seed);

// Per-node sealing state: sequence numbers and nonce bookkeeping.
class ReportEncoder {
 public:
  ReportEncoder(const SessionKey& key, uint16_t node_id)
      : key_(key), node_id_(node_id) {}

  // Fills node_id and the next seq, derives a fresh nonce and seals.
  absl::StatusOr<ReportFrame> Seal(uint8_t kind, uint64_t at_micros,
                                   std::span<const uint8_t> input);
  // Seals `report` as-is under `nonce`. Refuses a nonce already used with
  // this key (kFailedPrecondition).
  absl::StatusOr<ReportFrame> Encode(const CrashReport& report,
                                     const Nonce& nonce);

  uint32_t next_seq() const { return next_seq_; }

 private:
  SessionKey key_;
  uint16_t node_id_;
  uint32_t next_seq_ = 0;
  std::set<Nonce> used_nonces_;
};

enum class HeartbeatStatus : uint8_t {
  kHealthy = 0,
  kDegradedNetwork = 1,
  kSuspectedMalicious = 2,
  kUnavailable = 3,
};

std::string_view HeartbeatStatusName(HeartbeatStatus status);

struct HeartbeatThresholds {
  double degraded_factor = 1.5;    // gap > 1.5 W is degraded
  double unavailable_factor = 4.0;  // gap > 4 W is unavailable
  int suspicious_run = 3;           // consecutive degraded gaps
};

HeartbeatStatus ClassifyGap(double gap, double window,
                            const HeartbeatThresholds& t = {});

// Aggregates per-gap classes. `window` must be positive; an empty list is
// Healthy.
HeartbeatStatus HeartbeatClassify(std::span<const double> gaps, double window,
                                  const HeartbeatThresholds& t = {});

// End-user side: collects report arrival times and classifies the cadence.
class HeartbeatMonitor {
 public:
  explicit HeartbeatMonitor(double window, HeartbeatThresholds t = {})
      : window_(window), thresholds_(t) {}

  void OnReport(double at_seconds);
  // Includes the open gap from the last report to `now`.
  HeartbeatStatus StatusAt(double now) const;
  std::span<const double> gaps() const { return gaps_; }

 private:
  double window_;
  HeartbeatThresholds thresholds_;
  std::vector<double> gaps_;
  double last_ = 0;
  bool seen_ = false;
};

// ROC AUC of the best single-threshold classifier that labels crash exits
// real or fake from the gap to the previous exit. Folded to [0.5, 1] since a
// threshold can be applied in either direction. `timestamps` must be sorted;
// `is_real` is test-only ground truth. Needs at least two scored events of
// each kind (the first event has no gap).
absl::StatusOr<double> DistinguisherAuc(std::span<const double> timestamps,
                                        std::span<const bool> is_real);

// Mann-Whitney estimate of P(score of a positive > score of a negative), ties
// counted half. Unfolded.
double RocAuc(std::span<const double> positives,
              std::span<const double> negatives);

}  // namespace obliviofuzz

#endif  // OBLIVIOFUZZ_CHANNEL_H_

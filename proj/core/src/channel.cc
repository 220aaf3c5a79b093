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

#include "obliviofuzz/channel.h"

#include <algorithm>
#include <cstring>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace obliviofuzz {
namespace {

constexpr size_t kInputLenOffset = 16;
constexpr size_t kInputOffset = 18;

template <typename T>
void PutBe(uint8_t* out, T v) {
  for (size_t i = 0; i < sizeof(T); ++i) {
    out[i] = static_cast<uint8_t>(v >> (8 * (sizeof(T) - 1 - i)));
  }
}

template <typename T>
T GetBe(const uint8_t* in) {
  T v = 0;
  for (size_t i = 0; i < sizeof(T); ++i) v = static_cast<T>(v << 8 | in[i]);
  return v;
}

}  // namespace

absl::StatusOr<std::array<uint8_t, kPlaintextSize>> PackReport(
    const CrashReport& r) {
  if (r.input.size() > kMaxReportInput) {
    return absl::InvalidArgumentError(
        absl::StrCat("report input is ", r.input.size(), " bytes, max ",
                     kMaxReportInput));
  }
  std::array<uint8_t, kPlaintextSize> pt{};
  pt[0] = r.version;
  pt[1] = r.kind;
  PutBe(&pt[2], r.node_id);
  PutBe(&pt[4], r.seq);
  PutBe(&pt[8], r.at_micros);
  PutBe(&pt[kInputLenOffset], static_cast<uint16_t>(r.input.size()));
  std::copy(r.input.begin(), r.input.end(), pt.begin() + kInputOffset);
  return pt;
}

absl::StatusOr<CrashReport> UnpackReport(std::span<const uint8_t> pt) {
  if (pt.size() != kPlaintextSize) {
    return absl::DataLossError("report plaintext has the wrong size");
  }
  CrashReport r;
  r.version = pt[0];
  r.kind = pt[1];
  r.node_id = GetBe<uint16_t>(&pt[2]);
  r.seq = GetBe<uint32_t>(&pt[4]);
  r.at_micros = GetBe<uint64_t>(&pt[8]);
  const auto len = GetBe<uint16_t>(&pt[kInputLenOffset]);
  if (r.version != kReportVersion || r.kind > 1 || len > kMaxReportInput) {
    return absl::DataLossError("malformed report plaintext");
  }
  r.input.assign(pt.begin() + kInputOffset,
                 pt.begin() + kInputOffset + len);
  return r;
}

absl::StatusOr<ReportFrame> EncodeReport(const CrashReport& report,
                                         const SessionKey& key,
                                         const Nonce& nonce) {
  absl::StatusOr<std::array<uint8_t, kPlaintextSize>> pt = PackReport(report);
  if (!pt.ok()) return pt.status();
  const std::vector<uint8_t> sealed = AeadSeal(*pt, key, nonce);
  ReportFrame frame;
  std::copy(nonce.begin(), nonce.end(), frame.begin());
  std::copy(sealed.begin(), sealed.end(), frame.begin() + kNonceSize);
  return frame;
}

absl::StatusOr<CrashReport> DecodeReport(std::span<const uint8_t> frame,
                                         const SessionKey& key) {
  if (frame.size() != kFrameSize) {
    return absl::InvalidArgumentError(
        absl::StrCat("frame must be ", kFrameSize, " bytes"));
  }
  Nonce nonce;
  std::copy(frame.begin(), frame.begin() + kNonceSize, nonce.begin());
  std::optional<std::vector<uint8_t>> pt =
      AeadOpen(frame.subspan(kNonceSize), key, nonce);
  if (!pt) return absl::UnauthenticatedError("report authentication failed");
  return UnpackReport(*pt);
}

SessionKey DeriveSessionKey(uint64_t campaign_seed) {
  uint8_t msg[8];
  PutBe(msg, campaign_seed);
  return HmacSha256(AsBytes("obliviofuzz/session-key/v1"), msg);
}

absl::StatusOr<ReportFrame> ReportEncoder::Seal(
    uint8_t kind, uint64_t at_micros, std::span<const uint8_t> input) {
  CrashReport r;
  r.kind = kind;
  r.node_id = node_id_;
  r.seq = next_seq_;
  r.at_micros = at_micros;
  r.input.assign(input.begin(), input.end());
  // node_id and seq make the nonce unique per key.
  Nonce nonce{};
  std::memcpy(nonce.data(), "oblvfuzz", 8);
  PutBe(&nonce[8], node_id_);
  PutBe(&nonce[10], next_seq_);
  absl::StatusOr<ReportFrame> frame = Encode(r, nonce);
  if (frame.ok()) ++next_seq_;
  return frame;
}

absl::StatusOr<ReportFrame> ReportEncoder::Encode(const CrashReport& report,
                                                  const Nonce& nonce) {
  if (used_nonces_.contains(nonce)) {
    return absl::FailedPreconditionError("nonce reused under session key");
  }
  absl::StatusOr<ReportFrame> frame = EncodeReport(report, key_, nonce);
  if (frame.ok()) used_nonces_.insert(nonce);
  return frame;
}

std::string_view HeartbeatStatusName(HeartbeatStatus status) {
  switch (status) {
    case HeartbeatStatus::kHealthy: return "healthy";
    case HeartbeatStatus::kDegradedNetwork: return "degraded-network";
    case HeartbeatStatus::kSuspectedMalicious: return "suspected-malicious";
    case HeartbeatStatus::kUnavailable: return "unavailable";
  }
  return "?";
}

HeartbeatStatus ClassifyGap(double gap, double window,
                            const HeartbeatThresholds& t) {
  if (gap > t.unavailable_factor * window) return HeartbeatStatus::kUnavailable;
  if (gap > t.degraded_factor * window) return HeartbeatStatus::kDegradedNetwork;
  return HeartbeatStatus::kHealthy;
}

HeartbeatStatus HeartbeatClassify(std::span<const double> gaps, double window,
                                  const HeartbeatThresholds& t) {
  HeartbeatStatus worst = HeartbeatStatus::kHealthy;
  int run = 0;
  for (double gap : gaps) {
    const HeartbeatStatus s = ClassifyGap(gap, window, t);
    if (s == HeartbeatStatus::kUnavailable) return s;
    run = s == HeartbeatStatus::kDegradedNetwork ? run + 1 : 0;
    if (run >= t.suspicious_run) worst = HeartbeatStatus::kSuspectedMalicious;
    worst = std::max(worst, s);
  }
  return worst;
}

void HeartbeatMonitor::OnReport(double at_seconds) {
  if (seen_) gaps_.push_back(at_seconds - last_);
  last_ = at_seconds;
  seen_ = true;
}

HeartbeatStatus HeartbeatMonitor::StatusAt(double now) const {
  std::vector<double> gaps = gaps_;
  if (seen_ && now > last_) gaps.push_back(now - last_);
  return HeartbeatClassify(gaps, window_, thresholds_);
}

double RocAuc(std::span<const double> positives,
              std::span<const double> negatives) {
  std::vector<std::pair<double, bool>> all;
  all.reserve(positives.size() + negatives.size());
  for (double v : positives) all.emplace_back(v, true);
  for (double v : negatives) all.emplace_back(v, false);
  std::sort(all.begin(), all.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  // Sum of average ranks of the positives.
  double rank_sum = 0;
  for (size_t i = 0; i < all.size();) {
    size_t j = i;
    while (j < all.size() && all[j].first == all[i].first) ++j;
    const double avg_rank = (static_cast<double>(i + j) + 1.0) / 2.0;
    for (size_t k = i; k < j; ++k) {
      if (all[k].second) rank_sum += avg_rank;
    }
    i = j;
  }
  const auto p = static_cast<double>(positives.size());
  const auto n = static_cast<double>(negatives.size());
  return (rank_sum - p * (p + 1) / 2) / (p * n);
}

absl::StatusOr<double> DistinguisherAuc(std::span<const double> timestamps,
                                        std::span<const bool> is_real) {
  if (timestamps.size() != is_real.size()) {
    return absl::InvalidArgumentError("timestamps and labels differ in size");
  }
  std::vector<double> real_gaps, fake_gaps;
  for (size_t i = 1; i < timestamps.size(); ++i) {
    const double gap = timestamps[i] - timestamps[i - 1];
    (is_real[i] ? real_gaps : fake_gaps).push_back(gap);
  }
  if (real_gaps.size() < 2 || fake_gaps.size() < 2) {
    return absl::InvalidArgumentError(
        "distinguisher needs at least two gaps of each kind");
  }
  const double auc = RocAuc(real_gaps, fake_gaps);
  return std::max(auc, 1.0 - auc);
}

}  // namespace obliviofuzz

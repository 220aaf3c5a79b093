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

#include "cli/report.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <tuple>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "obliviofuzz/crypto.h"

namespace obliviofuzz::cli {

std::vector<RateRow> RateRows(std::span<const CrashRecord> timeline,
                              int minutes) {
  if (minutes <= 0) {
    for (const CrashRecord& r : timeline) {
      minutes = std::max(minutes,
                         static_cast<int>(std::floor(r.at_seconds / 60)) + 1);
    }
  }
  std::vector<RateRow> rows(static_cast<size_t>(std::max(minutes, 0)));
  for (size_t m = 0; m < rows.size(); ++m) rows[m].minute = static_cast<int>(m);
  for (const CrashRecord& r : timeline) {
    const auto m = static_cast<size_t>(std::floor(r.at_seconds / 60));
    if (m >= rows.size()) continue;
    ++(r.real() ? rows[m].real : rows[m].fake);
  }
  return rows;
}

std::string RateCsv(std::span<const CrashRecord> timeline, int minutes) {
  std::string out = "minute,real,fake,total\n";
  for (const RateRow& r : RateRows(timeline, minutes)) {
    absl::StrAppend(&out, r.minute, ",", r.real, ",", r.fake, ",", r.total(),
                    "\n");
  }
  return out;
}

std::string CrashesCsv(std::span<const CrashRecord> timeline) {
  std::string out = "t_seconds,kind,bug_id,input_hex\n";
  char t[48];
  for (const CrashRecord& r : timeline) {
    std::snprintf(t, sizeof(t), "%.6f", r.at_seconds);
    absl::StrAppend(&out, t, ",", r.real() ? "real" : "fake", ",");
    if (r.real()) absl::StrAppend(&out, r.bug_id);
    absl::StrAppend(&out, ",", ToHex(r.input), "\n");
  }
  return out;
}

std::string ThroughputCsv(std::span<const ScalingRow> rows) {
  std::string out = "cores,exec_per_sec\n";
  char v[48];
  for (const ScalingRow& r : rows) {
    std::snprintf(v, sizeof(v), "%.3f", r.exec_per_sec);
    absl::StrAppend(&out, r.cores, ",", v, "\n");
  }
  return out;
}

absl::StatusOr<std::vector<CrashRecord>> DecodeTimeline(
    std::span<const ReportFrame> frames, const SessionKey& key) {
  std::vector<CrashReport> reports;
  reports.reserve(frames.size());
  for (const ReportFrame& f : frames) {
    absl::StatusOr<CrashReport> r = DecodeReport(f, key);
    if (!r.ok()) return r.status();
    reports.push_back(*std::move(r));
  }
  std::sort(reports.begin(), reports.end(),
            [](const CrashReport& a, const CrashReport& b) {
              return std::tie(a.at_micros, a.node_id, a.seq) <
                     std::tie(b.at_micros, b.node_id, b.seq);
            });
  // Real reports carry no bug id on the wire; the end user learns it by
  // replaying the input. The caller fills it in (see AnnotateBugIds).
  std::vector<CrashRecord> out;
  out.reserve(reports.size());
  for (CrashReport& r : reports) {
    CrashRecord rec;
    rec.at_seconds = static_cast<double>(r.at_micros) * 1e-6;
    rec.node_id = r.node_id;
    rec.seq = r.seq;
    rec.kind = r.kind == 1 ? CrashEvent::Kind::kReal : CrashEvent::Kind::kFake;
    rec.input = std::move(r.input);
    out.push_back(std::move(rec));
  }
  return out;
}

void AnnotateBugIds(std::span<CrashRecord> timeline, const FuzzTarget& target) {
  for (CrashRecord& r : timeline) {
    if (!r.real()) continue;
    const ExecOutcome out = target.Execute(r.input);
    r.bug_id = out.crashed() ? out.bug_id : -1;
  }
}

std::vector<uint8_t> SerializeFrames(std::span<const ReportFrame> frames) {
  std::vector<uint8_t> out;
  out.reserve(frames.size() * kFrameSize);
  for (const ReportFrame& f : frames) out.insert(out.end(), f.begin(), f.end());
  return out;
}

absl::StatusOr<std::vector<ReportFrame>> ParseFrames(
    std::span<const uint8_t> bytes) {
  if (bytes.size() % kFrameSize != 0) {
    return absl::DataLossError(absl::StrCat(
        "frame stream length ", bytes.size(), " is not a multiple of ",
        kFrameSize));
  }
  std::vector<ReportFrame> out(bytes.size() / kFrameSize);
  for (size_t i = 0; i < out.size(); ++i) {
    std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(i * kFrameSize),
                kFrameSize, out[i].begin());
  }
  return out;
}

}  // namespace obliviofuzz::cli

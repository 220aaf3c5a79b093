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

// CSV artifacts a campaign produces for the end user and the host.
//
//   rate.csv        minute,real,fake,total
//   crashes.csv     t_seconds,kind,bug_id,input_hex
//   observer.csv    t_micros,kind,length
//   throughput.csv  cores,exec_per_sec
#ifndef OBLIVIOFUZZ_TOOLS_CLI_REPORT_H_
#define OBLIVIOFUZZ_TOOLS_CLI_REPORT_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "obliviofuzz/channel.h"
#include "obliviofuzz/cluster.h"
#include "obliviofuzz/target.h"

namespace obliviofuzz::cli {

// One row per minute in [0, minutes). A zero `minutes` derives the count
// from the last event; an empty timeline then yields only the header.
std::string RateCsv(std::span<const CrashRecord> timeline, int minutes = 0);
std::string CrashesCsv(std::span<const CrashRecord> timeline);
std::string ThroughputCsv(std::span<const ScalingRow> rows);

struct RateRow {
  int minute = 0;
  int real = 0;
  int fake = 0;
  int total() const { return real + fake; }
};
std::vector<RateRow> RateRows(std::span<const CrashRecord> timeline,
                              int minutes = 0);

// Decrypts every frame with `key` and orders the reports by
// (at_micros, node_id, seq). Times come from the report, so the result is
// exactly what the end user can reconstruct.
absl::StatusOr<std::vector<CrashRecord>> DecodeTimeline(
    std::span<const ReportFrame> frames, const SessionKey& key);

// Replays each real record's input through `target` and stores the bug it
// fires (-1 if it no longer crashes). Fakes are left untouched.
void AnnotateBugIds(std::span<CrashRecord> timeline, const FuzzTarget& target);

// frames.bin is the concatenation of 352-byte frames.
std::vector<uint8_t> SerializeFrames(std::span<const ReportFrame> frames);
absl::StatusOr<std::vector<ReportFrame>> ParseFrames(
    std::span<const uint8_t> bytes);

}  // namespace obliviofuzz::cli

#endif  // OBLIVIOFUZZ_TOOLS_CLI_REPORT_H_

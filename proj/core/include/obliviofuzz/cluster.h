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

// Service workflow, the per-node fuzzing loop, and multi-node campaigns.
//
// Nodes run on independent virtual clocks. A campaign advances every node to
// the end of the current epoch (in parallel when allowed), then performs the
// pending shared-directory syncs one at a time in (clock, node id) order.
// Nodes interact only at those barriers, so thread scheduling cannot change
// any result.
#ifndef OBLIVIOFUZZ_CLUSTER_H_
#define OBLIVIOFUZZ_CLUSTER_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "obliviofuzz/channel.h"
#include "obliviofuzz/corpus.h"
#include "obliviofuzz/coverage.h"
#include "obliviofuzz/enclave.h"
#include "obliviofuzz/ocrash.h"
#include "obliviofuzz/prng.h"
#include "obliviofuzz/shared_dir.h"
#include "obliviofuzz/target.h"

namespace obliviofuzz {

// ---- Provisioning workflow ------------------------------------------------

enum class ProvisionStage : uint8_t {
  kInitial,
  kToolchainPublished,
  kLoaderProvisioned,
  kAwaitingImages,
  kLoaded,
  kRunning,
  kReporting,
};

struct ProvisionState {
  ProvisionStage stage = ProvisionStage::kInitial;
  bool target_present = false;  // kAwaitingImages only
  bool fuzzer_present = false;  // kAwaitingImages only
  bool operator==(const ProvisionState&) const = default;
};

struct ProvisionEvent {
  enum class Kind : uint8_t {
    kPublishToolchain,
    kProvisionLoader,
    kSubmitTarget,
    kSubmitFuzzer,
    kVerifyLoad,
    kStart,
    kReport,
  };
  Kind kind;
  bool ok = true;  // kVerifyLoad only: did the measurement check pass
};

std::string_view ProvisionStageName(ProvisionStage stage);

// Out-of-order events are kFailedPrecondition; a failed load verification is
// kPermissionDenied. Neither changes the caller's state.
absl::StatusOr<ProvisionState> ProvisionAdvance(const ProvisionState& state,
                                                ProvisionEvent event);

// Images a node loads; the end user computes the expected measurement from
// the same bytes.
Bytes FuzzerImage();
Bytes TargetImage(std::string_view target_name);

// ---- Nodes ----------------------------------------------------------------

struct NodeConfig {
  uint16_t node_id = 0;
  uint64_t seed = 1;
  SgxMode mode = SgxMode::kSgxHw;
  std::string target = "toy";
  double target_rate_per_min = 3.0;
  size_t mem_budget = kDefaultMemBudget;
  double duration_seconds = 60;
  std::filesystem::path shared_dir;
  CostModel cost;  // mode is taken from `mode`
  size_t max_len = kDefaultMaxLen;
  uint64_t session_seed = 1;  // campaign-wide; derives the report key
  // Overrides the measurement the end user expects; tamper testing only.
  std::optional<Digest> expected_measurement;
};

// One crash as the end user sees it after decryption, plus the node-local
// iteration seed that produced it.
struct CrashRecord {
  double at_seconds = 0;
  uint16_t node_id = 0;
  uint32_t seq = 0;
  CrashEvent::Kind kind = CrashEvent::Kind::kFake;
  int bug_id = -1;
  Bytes input;
  uint64_t iteration_seed = 0;

  bool real() const { return kind == CrashEvent::Kind::kReal; }
  bool operator==(const CrashRecord&) const = default;
};

struct NodeStats {
  uint16_t node_id = 0;
  uint64_t execs = 0;
  double elapsed_seconds = 0;
  uint64_t real_crashes = 0;
  uint64_t fake_crashes = 0;
  uint64_t duplicate_crashes = 0;  // already-known bugs, not re-reported
  std::set<int> distinct_bugs;
  uint64_t syncs = 0;
  uint64_t sync_failures = 0;
  ClassMap final_map;
  size_t corpus_size = 0;
  size_t corpus_mem_bytes = 0;
  size_t rss_bytes = 0;

  double exec_per_sec() const {
    return elapsed_seconds > 0 ? static_cast<double>(execs) / elapsed_seconds
                               : 0;
  }
  bool operator==(const NodeStats&) const = default;
};

struct NodeRun {
  NodeStats stats;
  std::vector<CrashRecord> timeline;
  std::vector<ObserverEvent> observer;
  std::vector<ReportFrame> frames;
};

class NodeWorker {
 public:
  // Provisions the node through the workflow up to kRunning and loads the
  // initial corpus from the shared directory.
  static absl::StatusOr<std::unique_ptr<NodeWorker>> Create(
      const NodeConfig& cfg, const FuzzTarget& target);

  // Fuzzes until the virtual clock reaches min(until, duration).
  void RunUntil(double until_seconds);
  bool done() const { return clock_seconds() >= cfg_.duration_seconds; }
  bool WantsSync() const;
  absl::Status SyncNow();

  double clock_seconds() const { return enclave_.clock_seconds(); }
  const NodeConfig& config() const { return cfg_; }
  const Corpus& corpus() const { return corpus_; }
  const EnclaveSim& enclave() const { return enclave_; }
  const ProvisionState& provision_state() const { return state_; }
  const std::vector<CrashRecord>& timeline() const { return timeline_; }
  const std::vector<ReportFrame>& frames() const { return frames_; }

  NodeRun Finish();

 private:
  NodeWorker(const NodeConfig& cfg, const FuzzTarget& target, EnclaveSim enc,
             Corpus corpus, ProvisionState state);

  void Step();
  void DrainFakes();
  void Raise(const CrashEvent& event, uint64_t iteration_seed);
  Bytes TrimCrashInput(const Bytes& input, int bug_id);
  std::string StatsCsv() const;

  NodeConfig cfg_;
  const FuzzTarget& target_;
  SharedDir dir_;
  EnclaveSim enclave_;
  Corpus corpus_;
  ProvisionState state_;
  Prng rng_;
  CrashScheduler scheduler_;
  ReportEncoder encoder_;
  CoverageMap run_;
  Bytes default_seed_{0};
  NodeStats stats_;
  std::vector<CrashRecord> timeline_;
  std::vector<ReportFrame> frames_;
  std::string stats_rows_;
};

// Standalone single-node run: a one-node campaign without aggregation.
absl::StatusOr<NodeRun> RunNode(const NodeConfig& cfg,
                                const FuzzTarget& target);

// ---- Campaigns ------------------------------------------------------------

struct CampaignOptions {
  bool parallel = true;
  double epoch_seconds = 1.0;
  unsigned max_threads = 0;  // 0 = hardware concurrency
};

struct CampaignStats {
  std::vector<NodeStats> nodes;
  double aggregate_exec_per_sec = 0;
  ClassMap union_coverage;
  std::vector<CrashRecord> timeline;  // merged, ordered by time
  std::vector<std::vector<ObserverEvent>> observer;  // per node
  std::vector<std::vector<ReportFrame>> frames;      // per node
  double duration_seconds = 0;
};

absl::StatusOr<CampaignStats> RunCampaign(std::span<const NodeConfig> cfgs,
                                          const std::filesystem::path& shared,
                                          const CampaignOptions& options = {});

// `cores` identical nodes derived from `base`: node i gets id i and an
// independent seed split from base.seed.
std::vector<NodeConfig> MakeNodeConfigs(const NodeConfig& base, int cores);

struct ScalingRow {
  int cores = 0;
  double exec_per_sec = 0;
};

std::vector<ScalingRow> AggregateScaling(
    std::span<const std::pair<int, CampaignStats>> sweep);

// All nodes' observer events merged by time (ties by node id).
std::vector<ObserverEvent> MergedObserverTrace(const CampaignStats& stats);

}  // namespace obliviofuzz

#endif  // OBLIVIOFUZZ_CLUSTER_H_

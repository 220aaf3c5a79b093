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

// In-enclave corpus. Seeds and the global class map live in enclave memory;
// the shared directory is touched only when the sync policy fires, and each
// file operation then costs one OCall on the enclave clock.
#ifndef OBLIVIOFUZZ_CORPUS_H_
#define OBLIVIOFUZZ_CORPUS_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "obliviofuzz/coverage.h"
#include "obliviofuzz/crypto.h"
#include "obliviofuzz/enclave.h"
#include "obliviofuzz/mutation.h"
#include "obliviofuzz/prng.h"
#include "obliviofuzz/shared_dir.h"
#include "obliviofuzz/target.h"

namespace obliviofuzz {

inline constexpr size_t kEntryOverheadBytes = 64;
inline constexpr size_t kDefaultMemBudget = 64 * kMiB;

struct CorpusEntry {
  Bytes input;
  std::vector<ClassSlot> signature;  // classes of the entry's own run
  uint32_t exec_cost = 1;
  double found_at = 0;  // virtual seconds
  Digest hash{};
  bool synced = false;  // already present in the shared directory
};

// Selection weight: signature slots per unit of execution cost.
double SeedWeight(const CorpusEntry& entry);

// Greedy set cover over (slot, class) units: an entry with class c at slot i
// covers units (i, 1..c). Picks the entry adding the most uncovered units,
// ties broken by lower exec_cost, then shorter input, then smaller hash; then
// drops any pick that became redundant. Returns indices into `entries`,
// ascending. The result covers the union exactly and no kept entry can be
// removed without losing a unit.
std::vector<size_t> Minimize(std::span<const CorpusEntry> entries);

struct SyncPolicy {
  double mem_fraction = 0.8;
  size_t max_adds = 64;
  size_t max_new_slots = 32;
  double period_seconds = 60;
};

struct SyncReport {
  size_t wrote = 0;
  size_t deleted = 0;
  size_t pulled = 0;
  size_t ocalls_charged = 0;
};

enum class AddResult { kAdded, kRejected };

class Corpus {
 public:
  explicit Corpus(size_t mem_budget = kDefaultMemBudget,
                  SyncPolicy policy = {});

  // Ingests every seed file (deduplicated by content) by executing it once,
  // and merges every `.cov` sidecar into the global map. Executions are
  // charged to `enclave` when given.
  static absl::StatusOr<Corpus> LoadFromDir(const SharedDir& dir,
                                            const FuzzTarget& target,
                                            size_t mem_budget,
                                            EnclaveSim* enclave = nullptr,
                                            SyncPolicy policy = {});

  // Admits `input` iff its run raises some slot's class.
  AddResult AddIfInteresting(std::span<const uint8_t> input,
                             const ExecOutcome& outcome, double now);
  AddResult AddIfInteresting(std::span<const uint8_t> input,
                             const CoverageMap& run, uint32_t exec_cost,
                             double now);

  bool ShouldSync(double now) const;

  // Writes unsynced entries and this node's class map, pulls unseen remote
  // seeds through AddIfInteresting, then minimizes the directory's seed set.
  // On a write failure nothing is reset and the sync can be retried.
  absl::StatusOr<SyncReport> Sync(const SharedDir& dir,
                                  std::string_view node_id,
                                  EnclaveSim& enclave,
                                  const FuzzTarget& target);

  // Evicts the lowest-weight synced entries while memory exceeds the policy
  // threshold. Their coverage stays in the global map. Returns the count.
  size_t EvictUnderPressure();

  // Weighted by SeedWeight. kFailedPrecondition when empty (the caller
  // should fall back to a one-byte seed).
  absl::StatusOr<const CorpusEntry*> SelectSeed(Prng& rng) const;

  size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::map<Digest, CorpusEntry>& entries() const { return entries_; }
  const CorpusEntry* Find(const Digest& d) const;
  const ClassMap& global() const { return global_; }
  size_t mem_bytes() const { return mem_bytes_; }
  size_t mem_budget() const { return mem_budget_; }
  size_t adds_since_sync() const { return adds_since_sync_; }
  size_t new_slots_since_sync() const { return new_slots_since_sync_; }
  double last_sync_at() const { return last_sync_at_; }
  const SyncPolicy& policy() const { return policy_; }
  // Inputs of all entries, for splicing. Rebuilt lazily.
  std::span<const Bytes> splice_pool() const;

  // From-scratch recomputations, for checking the incremental state.
  size_t RecomputeMemBytes() const;
  ClassMap RecomputeGlobal() const;

 private:
  void Insert(CorpusEntry entry);
  void RefreshCaches() const;

  size_t mem_budget_;
  SyncPolicy policy_;
  std::map<Digest, CorpusEntry> entries_;
  // Coverage not owned by any resident entry: loaded sidecars and evictions.
  ClassMap base_;
  ClassMap global_;
  size_t mem_bytes_;
  size_t adds_since_sync_ = 0;
  size_t new_slots_since_sync_ = 0;
  double last_sync_at_ = 0;
  // Remote seeds already examined, with the signature they produced.
  std::map<Digest, CorpusEntry> remote_seen_;

  mutable bool caches_dirty_ = true;
  mutable std::vector<const CorpusEntry*> order_;
  mutable std::vector<double> cumulative_;
  mutable std::vector<Bytes> pool_;
};

}  // namespace obliviofuzz

#endif  // OBLIVIOFUZZ_CORPUS_H_

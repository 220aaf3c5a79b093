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

#include "obliviofuzz/corpus.h"

#include <algorithm>
#include <tuple>
#include <utility>

#include "absl/status/status.h"

namespace obliviofuzz {
namespace {

std::vector<ClassSlot> SignatureOf(const CoverageMap& run) {
  std::vector<ClassSlot> sig;
  sig.reserve(run.touched().size());
  for (uint16_t i : run.touched()) sig.push_back({i, Bucketize(run.count(i))});
  std::sort(sig.begin(), sig.end());
  return sig;
}

CorpusEntry MakeEntry(std::span<const uint8_t> input, const CoverageMap& run,
                      uint32_t exec_cost, double now) {
  CorpusEntry e;
  e.input.assign(input.begin(), input.end());
  e.signature = SignatureOf(run);
  e.exec_cost = exec_cost;
  e.found_at = now;
  e.hash = Sha256(input);
  return e;
}

size_t EntryBytes(const CorpusEntry& e) {
  return e.input.size() + kEntryOverheadBytes;
}

}  // namespace

double SeedWeight(const CorpusEntry& entry) {
  return static_cast<double>(std::max<size_t>(entry.signature.size(), 1)) /
         static_cast<double>(std::max<uint32_t>(entry.exec_cost, 1));
}

std::vector<size_t> Minimize(std::span<const CorpusEntry> entries) {
  std::array<uint8_t, kMapSize> covered{};
  std::vector<bool> taken(entries.size(), false);
  std::vector<size_t> picks;

  auto gain = [&](const CorpusEntry& e) {
    size_t g = 0;
    for (const ClassSlot& s : e.signature) {
      if (s.klass > covered[s.index]) g += s.klass - covered[s.index];
    }
    return g;
  };
  // True iff `a` is preferred over `b` at equal gain.
  auto better_tie = [](const CorpusEntry& a, const CorpusEntry& b) {
    return std::forward_as_tuple(a.exec_cost, a.input.size(), a.hash) <
           std::forward_as_tuple(b.exec_cost, b.input.size(), b.hash);
  };

  for (;;) {
    size_t best = entries.size();
    size_t best_gain = 0;
    for (size_t i = 0; i < entries.size(); ++i) {
      if (taken[i]) continue;
      const size_t g = gain(entries[i]);
      if (g == 0) continue;
      if (g > best_gain ||
          (g == best_gain && better_tie(entries[i], entries[best]))) {
        best = i;
        best_gain = g;
      }
    }
    if (best == entries.size()) break;
    taken[best] = true;
    picks.push_back(best);
    for (const ClassSlot& s : entries[best].signature) {
      covered[s.index] = std::max(covered[s.index], s.klass);
    }
  }

  // Irreducibility pass, latest picks first: drop an entry when every unit
  // it covers is still covered by the remaining picks.
  std::vector<bool> kept(entries.size(), false);
  for (size_t i : picks) kept[i] = true;
  for (auto it = picks.rbegin(); it != picks.rend(); ++it) {
    std::array<uint8_t, kMapSize> others{};
    for (size_t j : picks) {
      if (j == *it || !kept[j]) continue;
      for (const ClassSlot& s : entries[j].signature) {
        others[s.index] = std::max(others[s.index], s.klass);
      }
    }
    const bool redundant = std::all_of(
        entries[*it].signature.begin(), entries[*it].signature.end(),
        [&](const ClassSlot& s) { return others[s.index] >= s.klass; });
    if (redundant) kept[*it] = false;
  }

  std::vector<size_t> out;
  for (size_t i = 0; i < entries.size(); ++i) {
    if (kept[i]) out.push_back(i);
  }
  return out;
}

Corpus::Corpus(size_t mem_budget, SyncPolicy policy)
    : mem_budget_(mem_budget), policy_(policy), mem_bytes_(kMapSize) {}

absl::StatusOr<Corpus> Corpus::LoadFromDir(const SharedDir& dir,
                                           const FuzzTarget& target,
                                           size_t mem_budget,
                                           EnclaveSim* enclave,
                                           SyncPolicy policy) {
  Corpus corpus(mem_budget, policy);
  absl::StatusOr<std::vector<Bytes>> seeds = dir.ReadAllSeedFiles();
  if (!seeds.ok()) return seeds.status();
  absl::StatusOr<std::vector<Digest>> canonical = dir.ListSeeds();
  if (!canonical.ok()) return canonical.status();
  const std::set<Digest> in_dir(canonical->begin(), canonical->end());

  CoverageMap run;
  for (const Bytes& seed : *seeds) {
    const ExecOutcome outcome = target.Execute(seed);
    if (enclave != nullptr) enclave->ChargeExec(outcome.cost_units);
    run.Clear();
    run.RecordEdges(outcome.edges);
    const double now = enclave != nullptr ? enclave->clock_seconds() : 0;
    CorpusEntry e = MakeEntry(seed, run, outcome.cost_units, now);
    if (corpus.entries_.contains(e.hash)) continue;
    e.synced = in_dir.contains(e.hash);
    if (e.synced) corpus.remote_seen_.emplace(e.hash, CorpusEntry{});
    corpus.Insert(std::move(e));
  }

  absl::StatusOr<std::vector<std::pair<std::string, ClassMap>>> covs =
      dir.ReadCoverages();
  if (!covs.ok()) return covs.status();
  for (const auto& [node, map] : *covs) {
    corpus.base_.MergeFrom(map);
    corpus.global_.MergeFrom(map);
  }
  if (enclave != nullptr) {
    corpus.last_sync_at_ = enclave->clock_seconds();
    enclave->set_corpus_bytes(corpus.mem_bytes_);
  }
  return corpus;
}

void Corpus::Insert(CorpusEntry entry) {
  global_.MergeFrom(entry.signature);
  mem_bytes_ += EntryBytes(entry);
  const Digest key = entry.hash;
  entries_.emplace(key, std::move(entry));
  caches_dirty_ = true;
}

const CorpusEntry* Corpus::Find(const Digest& d) const {
  auto it = entries_.find(d);
  return it == entries_.end() ? nullptr : &it->second;
}

AddResult Corpus::AddIfInteresting(std::span<const uint8_t> input,
                                   const ExecOutcome& outcome, double now) {
  CoverageMap run;
  run.RecordEdges(outcome.edges);
  return AddIfInteresting(input, run, outcome.cost_units, now);
}

AddResult Corpus::AddIfInteresting(std::span<const uint8_t> input,
                                   const CoverageMap& run, uint32_t exec_cost,
                                   double now) {
  const Novelty novelty = ComputeNovelty(global_, run);
  if (!novelty.is_new) return AddResult::kRejected;
  CorpusEntry e = MakeEntry(input, run, exec_cost, now);
  if (entries_.contains(e.hash)) return AddResult::kRejected;
  Insert(std::move(e));
  ++adds_since_sync_;
  new_slots_since_sync_ += novelty.new_slot_count;
  return AddResult::kAdded;
}

bool Corpus::ShouldSync(double now) const {
  return static_cast<double>(mem_bytes_) >
             policy_.mem_fraction * static_cast<double>(mem_budget_) ||
         adds_since_sync_ >= policy_.max_adds ||
         new_slots_since_sync_ >= policy_.max_new_slots ||
         now - last_sync_at_ >= policy_.period_seconds;
}

absl::StatusOr<SyncReport> Corpus::Sync(const SharedDir& dir,
                                        std::string_view node_id,
                                        EnclaveSim& enclave,
                                        const FuzzTarget& target) {
  SyncReport report;
  auto ocall = [&] {
    enclave.ChargeOCall();
    ++report.ocalls_charged;
  };

  // Push local discoveries.
  for (auto& [hash, entry] : entries_) {
    if (entry.synced) continue;
    ocall();
    absl::StatusOr<bool> wrote = dir.WriteSeed(hash, entry.input);
    if (!wrote.ok()) return wrote.status();
    if (*wrote) ++report.wrote;
    entry.synced = true;
    remote_seen_.emplace(hash, CorpusEntry{});
  }

  // Pull seeds other nodes published since the last look.
  ocall();
  absl::StatusOr<std::vector<Digest>> listed = dir.ListSeeds();
  if (!listed.ok()) return listed.status();
  CoverageMap run;
  for (const Digest& d : *listed) {
    if (entries_.contains(d) || remote_seen_.contains(d)) continue;
    ocall();
    absl::StatusOr<Bytes> data = dir.ReadSeed(d);
    if (!data.ok()) continue;  // deleted concurrently by a minimizing peer
    if (Sha256(*data) != d) {
      // Name does not match content; never trust it as a seed.
      remote_seen_.emplace(d, CorpusEntry{});
      continue;
    }
    ++report.pulled;
    const ExecOutcome outcome = target.Execute(*data);
    enclave.ChargeExec(outcome.cost_units);
    run.Clear();
    run.RecordEdges(outcome.edges);
    if (outcome.crashed() ||
        AddIfInteresting(*data, run, outcome.cost_units,
                         enclave.clock_seconds()) == AddResult::kRejected) {
      // Remember what it covers so the directory can still be minimized.
      CorpusEntry seen = MakeEntry(*data, run, outcome.cost_units,
                                   enclave.clock_seconds());
      remote_seen_.emplace(d, std::move(seen));
    } else {
      entries_.at(d).synced = true;
      remote_seen_.emplace(d, CorpusEntry{});
    }
  }

  ocall();
  if (absl::Status s = dir.WriteCoverage(node_id, global_); !s.ok()) return s;

  // Keep only a covering subset of the directory.
  std::vector<CorpusEntry> candidates;
  for (const Digest& d : *listed) {
    if (const CorpusEntry* e = Find(d)) {
      candidates.push_back(*e);
    } else if (auto it = remote_seen_.find(d);
               it != remote_seen_.end() && !it->second.input.empty()) {
      candidates.push_back(it->second);
    }
  }
  std::vector<bool> keep(candidates.size(), false);
  for (size_t i : Minimize(candidates)) keep[i] = true;
  for (size_t i = 0; i < candidates.size(); ++i) {
    if (keep[i]) continue;
    ocall();
    if (absl::Status s = dir.DeleteSeed(candidates[i].hash); !s.ok()) return s;
    ++report.deleted;
  }

  adds_since_sync_ = 0;
  new_slots_since_sync_ = 0;
  last_sync_at_ = enclave.clock_seconds();
  return report;
}

size_t Corpus::EvictUnderPressure() {
  size_t evicted = 0;
  const double limit =
      policy_.mem_fraction * static_cast<double>(mem_budget_);
  while (static_cast<double>(mem_bytes_) > limit && entries_.size() > 1) {
    auto victim = entries_.end();
    for (auto it = entries_.begin(); it != entries_.end(); ++it) {
      if (!it->second.synced) continue;
      if (victim == entries_.end() ||
          SeedWeight(it->second) < SeedWeight(victim->second)) {
        victim = it;
      }
    }
    if (victim == entries_.end()) break;
    base_.MergeFrom(victim->second.signature);
    mem_bytes_ -= EntryBytes(victim->second);
    entries_.erase(victim);
    caches_dirty_ = true;
    ++evicted;
  }
  return evicted;
}

void Corpus::RefreshCaches() const {
  if (!caches_dirty_) return;
  order_.clear();
  cumulative_.clear();
  pool_.clear();
  double total = 0;
  for (const auto& [hash, entry] : entries_) {
    order_.push_back(&entry);
    total += SeedWeight(entry);
    cumulative_.push_back(total);
    pool_.push_back(entry.input);
  }
  caches_dirty_ = false;
}

absl::StatusOr<const CorpusEntry*> Corpus::SelectSeed(Prng& rng) const {
  if (entries_.empty()) {
    return absl::FailedPreconditionError("corpus is empty: no initial seed");
  }
  RefreshCaches();
  const double x = rng.Uniform() * cumulative_.back();
  const size_t i = static_cast<size_t>(
      std::upper_bound(cumulative_.begin(), cumulative_.end(), x) -
      cumulative_.begin());
  return order_[std::min(i, order_.size() - 1)];
}

std::span<const Bytes> Corpus::splice_pool() const {
  RefreshCaches();
  return pool_;
}

size_t Corpus::RecomputeMemBytes() const {
  size_t total = kMapSize;
  for (const auto& [hash, entry] : entries_) total += EntryBytes(entry);
  return total;
}

ClassMap Corpus::RecomputeGlobal() const {
  ClassMap out = base_;
  for (const auto& [hash, entry] : entries_) out.MergeFrom(entry.signature);
  return out;
}

}  // namespace obliviofuzz

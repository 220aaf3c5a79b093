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

#include "obliviofuzz/cluster.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <thread>
#include <tuple>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace obliviofuzz {

std::string_view ProvisionStageName(ProvisionStage stage) {
  switch (stage) {
    case ProvisionStage::kInitial: return "initial";
    case ProvisionStage::kToolchainPublished: return "toolchain-published";
    case ProvisionStage::kLoaderProvisioned: return "loader-provisioned";
    case ProvisionStage::kAwaitingImages: return "awaiting-images";
    case ProvisionStage::kLoaded: return "loaded";
    case ProvisionStage::kRunning: return "running";
    case ProvisionStage::kReporting: return "reporting";
  }
  return "?";
}

absl::StatusOr<ProvisionState> ProvisionAdvance(const ProvisionState& state,
                                                ProvisionEvent event) {
  using K = ProvisionEvent::Kind;
  using S = ProvisionStage;
  ProvisionState next = state;
  const bool submit =
      event.kind == K::kSubmitTarget || event.kind == K::kSubmitFuzzer;

  switch (state.stage) {
    case S::kInitial:
      if (event.kind == K::kPublishToolchain) {
        next.stage = S::kToolchainPublished;
        return next;
      }
      break;
    case S::kToolchainPublished:
      if (event.kind == K::kProvisionLoader) {
        next.stage = S::kLoaderProvisioned;
        return next;
      }
      break;
    case S::kLoaderProvisioned:
    case S::kAwaitingImages:
      if (submit) {
        bool& present = event.kind == K::kSubmitTarget ? next.target_present
                                                        : next.fuzzer_present;
        if (present) break;  // duplicate submission
        present = true;
        next.stage = S::kAwaitingImages;
        return next;
      }
      if (event.kind == K::kVerifyLoad && state.target_present &&
          state.fuzzer_present) {
        if (!event.ok) {
          return absl::PermissionDeniedError(
              "load verification failed: measurement mismatch");
        }
        return ProvisionState{S::kLoaded, false, false};
      }
      break;
    case S::kLoaded:
      if (event.kind == K::kStart) {
        next.stage = S::kRunning;
        return next;
      }
      break;
    case S::kRunning:
    case S::kReporting:
      if (event.kind == K::kReport) {
        next.stage = S::kReporting;
        return next;
      }
      break;
  }
  return absl::FailedPreconditionError(
      absl::StrCat("illegal transition from ", std::string(ProvisionStageName(state.stage)),
                   " on event ", static_cast<int>(event.kind)));
}

Bytes FuzzerImage() {
  const std::string_view image = "obliviofuzz-fuzzer/1";
  return Bytes(image.begin(), image.end());
}

Bytes TargetImage(std::string_view target_name) {
  const std::string image = absl::StrCat("obliviofuzz-target/", std::string(target_name));
  return Bytes(image.begin(), image.end());
}

namespace {

constexpr uint32_t kSchedulerLabel = 0x5c4ed;
constexpr uint32_t kLoopLabel = 0x100b;

std::string NodeName(uint16_t node_id) { return absl::StrCat(node_id); }

absl::Status Advance(ProvisionState& state, ProvisionEvent event) {
  absl::StatusOr<ProvisionState> next = ProvisionAdvance(state, event);
  if (!next.ok()) return next.status();
  state = *next;
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<std::unique_ptr<NodeWorker>> NodeWorker::Create(
    const NodeConfig& cfg, const FuzzTarget& target) {
  using K = ProvisionEvent::Kind;
  ProvisionState state;
  for (K k : {K::kPublishToolchain, K::kProvisionLoader, K::kSubmitTarget,
              K::kSubmitFuzzer}) {
    if (absl::Status s = Advance(state, {k}); !s.ok()) return s;
  }

  CostModel cost = cfg.cost;
  cost.mode = cfg.mode;
  const Bytes fuzzer = FuzzerImage();
  const Bytes image = TargetImage(target.name());
  const Digest expected =
      cfg.expected_measurement.value_or(EnclaveSim::Measure(fuzzer, image));
  absl::StatusOr<EnclaveSim> enclave =
      EnclaveSim::Load(fuzzer, image, expected, cost);
  if (absl::Status s = Advance(state, {K::kVerifyLoad, enclave.ok()}); !s.ok()) {
    return enclave.ok() ? s : enclave.status();
  }
  if (absl::Status s = Advance(state, {K::kStart}); !s.ok()) return s;

  const SharedDir dir(cfg.shared_dir);
  if (absl::Status s = dir.Init(); !s.ok()) return s;
  absl::StatusOr<Corpus> corpus =
      Corpus::LoadFromDir(dir, target, cfg.mem_budget, &*enclave);
  if (!corpus.ok()) return corpus.status();

  return std::unique_ptr<NodeWorker>(new NodeWorker(
      cfg, target, *std::move(enclave), *std::move(corpus), state));
}

NodeWorker::NodeWorker(const NodeConfig& cfg, const FuzzTarget& target,
                       EnclaveSim enc, Corpus corpus, ProvisionState state)
    : cfg_(cfg),
      target_(target),
      dir_(cfg.shared_dir),
      enclave_(std::move(enc)),
      corpus_(std::move(corpus)),
      state_(state),
      rng_(Prng(cfg.seed).Split(kLoopLabel)),
      scheduler_(cfg.target_rate_per_min, Prng(cfg.seed).Split(kSchedulerLabel),
                 enclave_.clock_seconds()),
      encoder_(DeriveSessionKey(cfg.session_seed), cfg.node_id) {
  stats_.node_id = cfg.node_id;
  stats_rows_ = "t_seconds,execs,exec_per_sec,corpus_size,real_crashes,"
                "fake_crashes\n";
}

void NodeWorker::RunUntil(double until_seconds) {
  const double stop = std::min(until_seconds, cfg_.duration_seconds);
  while (enclave_.clock_seconds() < stop) Step();
}

void NodeWorker::Step() {
  const uint64_t iteration_seed = rng_.NextU64();
  Prng it(iteration_seed);

  std::span<const uint8_t> base = default_seed_;
  if (absl::StatusOr<const CorpusEntry*> seed = corpus_.SelectSeed(it);
      seed.ok()) {
    base = (*seed)->input;
  }
  Bytes input = Mutate(base, it, cfg_.max_len, corpus_.splice_pool());
  enclave_.set_transient_bytes(input.size());
  const ExecOutcome out = target_.Execute(input);
  enclave_.ChargeExec(out.cost_units);
  ++stats_.execs;

  DrainFakes();
  if (out.crashed()) {
    if (!stats_.distinct_bugs.insert(out.bug_id).second) {
      ++stats_.duplicate_crashes;
    } else {
      Bytes reported = TrimCrashInput(input, out.bug_id);
      DrainFakes();
      const CrashEvent real = scheduler_.OnRealCrash(
          enclave_.clock_seconds(), out.bug_id, std::move(reported));
      Raise(real, iteration_seed);
      DrainFakes();
    }
  } else {
    run_.Clear();
    run_.RecordEdges(out.edges);
    if (corpus_.AddIfInteresting(input, run_, out.cost_units,
                                 enclave_.clock_seconds()) ==
        AddResult::kAdded) {
      enclave_.set_corpus_bytes(corpus_.mem_bytes());
    }
  }
  enclave_.set_transient_bytes(0);
}

void NodeWorker::DrainFakes() {
  while (enclave_.clock_seconds() >= scheduler_.next_due()) {
    std::optional<CrashEvent> fake = scheduler_.Poll(enclave_.clock_seconds());
    if (!fake) continue;  // the window rolled over; re-check the new one
    Raise(*fake, 0);
  }
}

void NodeWorker::Raise(const CrashEvent& event, uint64_t iteration_seed) {
  // Real and fake crashes take exactly the same observable path.
  enclave_.EmitCrashExit();
  const auto at_micros =
      static_cast<uint64_t>(std::llround(event.at_seconds * 1e6));
  const uint32_t seq = encoder_.next_seq();
  const std::span<const uint8_t> payload(
      event.input.data(), std::min(event.input.size(), kMaxReportInput));
  absl::StatusOr<ReportFrame> frame =
      encoder_.Seal(event.real() ? 1 : 0, at_micros, payload);
  if (frame.ok()) {
    enclave_.RecordFrameSent(kFrameSize);
    frames_.push_back(*frame);
  }
  if (event.real()) {
    ++stats_.real_crashes;
  } else {
    ++stats_.fake_crashes;
  }
  timeline_.push_back(CrashRecord{.at_seconds = event.at_seconds,
                                  .node_id = cfg_.node_id,
                                  .seq = seq,
                                  .kind = event.kind,
                                  .bug_id = event.bug_id,
                                  .input = event.input,
                                  .iteration_seed = iteration_seed});
}

// Shrinks a crashing input to fit a report by deleting chunks that do not
// affect which bug fires. Each probe is a charged execution.
Bytes NodeWorker::TrimCrashInput(const Bytes& input, int bug_id) {
  if (input.size() <= kMaxReportInput) return input;
  Bytes cur = input;
  for (size_t chunk = cur.size() / 2; chunk >= 1 && cur.size() > kMaxReportInput;
       chunk /= 2) {
    for (size_t pos = 0; pos + chunk <= cur.size() &&
                         cur.size() > kMaxReportInput;) {
      Bytes probe = cur;
      probe.erase(probe.begin() + static_cast<std::ptrdiff_t>(pos),
                  probe.begin() + static_cast<std::ptrdiff_t>(pos + chunk));
      const ExecOutcome out = target_.Execute(probe);
      enclave_.ChargeExec(out.cost_units);
      if (out.crashed() && out.bug_id == bug_id) {
        cur = std::move(probe);
      } else {
        pos += chunk;
      }
    }
  }
  return cur;
}

bool NodeWorker::WantsSync() const {
  return corpus_.ShouldSync(enclave_.clock_seconds());
}

std::string NodeWorker::StatsCsv() const { return stats_rows_; }

absl::Status NodeWorker::SyncNow() {
  absl::StatusOr<SyncReport> report =
      corpus_.Sync(dir_, NodeName(cfg_.node_id), enclave_, target_);
  if (!report.ok()) {
    ++stats_.sync_failures;
    return report.status();
  }
  ++stats_.syncs;
  corpus_.EvictUnderPressure();
  enclave_.set_corpus_bytes(corpus_.mem_bytes());

  const double t = enclave_.clock_seconds();
  char row[160];
  std::snprintf(row, sizeof(row), "%.6f,%llu,%.3f,%zu,%llu,%llu\n", t,
                static_cast<unsigned long long>(stats_.execs),
                t > 0 ? static_cast<double>(stats_.execs) / t : 0.0,
                corpus_.size(),
                static_cast<unsigned long long>(stats_.real_crashes),
                static_cast<unsigned long long>(stats_.fake_crashes));
  stats_rows_ += row;
  enclave_.ChargeOCall();
  return dir_.WriteStats(NodeName(cfg_.node_id), stats_rows_);
}

NodeRun NodeWorker::Finish() {
  using K = ProvisionEvent::Kind;
  if (absl::StatusOr<ProvisionState> s = ProvisionAdvance(state_, {K::kReport});
      s.ok()) {
    state_ = *s;
  }
  NodeRun run;
  stats_.elapsed_seconds = enclave_.clock_seconds();
  stats_.final_map = corpus_.global();
  stats_.corpus_size = corpus_.size();
  stats_.corpus_mem_bytes = corpus_.mem_bytes();
  stats_.rss_bytes = enclave_.rss_bytes();
  run.stats = stats_;
  run.timeline = timeline_;
  run.observer.assign(enclave_.ObserverView().begin(),
                      enclave_.ObserverView().end());
  run.frames = frames_;
  return run;
}

std::vector<NodeConfig> MakeNodeConfigs(const NodeConfig& base, int cores) {
  std::vector<NodeConfig> out;
  for (int i = 0; i < cores; ++i) {
    NodeConfig cfg = base;
    cfg.node_id = static_cast<uint16_t>(i);
    cfg.seed = Prng(base.seed).Split(static_cast<uint32_t>(i)).NextU64();
    cfg.session_seed = base.seed;
    out.push_back(std::move(cfg));
  }
  return out;
}

namespace {

void RunEpoch(std::vector<std::unique_ptr<NodeWorker>>& workers, double until,
              const CampaignOptions& options) {
  unsigned threads = options.max_threads != 0
                         ? options.max_threads
                         : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(workers.size()));
  if (!options.parallel || threads <= 1) {
    for (auto& w : workers) w->RunUntil(until);
    return;
  }
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (size_t i = t; i < workers.size(); i += threads) {
        workers[i]->RunUntil(until);
      }
    });
  }
}

void SyncBarrier(std::vector<std::unique_ptr<NodeWorker>>& workers) {
  std::vector<NodeWorker*> pending;
  for (auto& w : workers) {
    if (w->WantsSync()) pending.push_back(w.get());
  }
  std::sort(pending.begin(), pending.end(),
            [](const NodeWorker* a, const NodeWorker* b) {
              return std::make_tuple(a->clock_seconds(), a->config().node_id) <
                     std::make_tuple(b->clock_seconds(), b->config().node_id);
            });
  // A failed sync leaves the node's counters armed; it retries next barrier.
  for (NodeWorker* w : pending) (void)w->SyncNow();
}

}  // namespace

absl::StatusOr<CampaignStats> RunCampaign(std::span<const NodeConfig> cfgs,
                                          const std::filesystem::path& shared,
                                          const CampaignOptions& options) {
  std::set<uint16_t> ids;
  for (const NodeConfig& c : cfgs) {
    if (!ids.insert(c.node_id).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate node id ", c.node_id));
    }
  }
  const SharedDir dir(shared);
  if (absl::Status s = dir.Init(); !s.ok()) return s;

  std::map<std::string, std::unique_ptr<FuzzTarget>> targets;
  std::vector<std::unique_ptr<NodeWorker>> workers;
  double horizon = 0;
  for (NodeConfig cfg : cfgs) {
    cfg.shared_dir = shared;
    auto& target = targets[cfg.target];
    if (!target) {
      absl::StatusOr<std::unique_ptr<FuzzTarget>> t = MakeTarget(cfg.target);
      if (!t.ok()) return t.status();
      target = *std::move(t);
    }
    absl::StatusOr<std::unique_ptr<NodeWorker>> w =
        NodeWorker::Create(cfg, *target);
    if (!w.ok()) return w.status();
    workers.push_back(*std::move(w));
    horizon = std::max(horizon, cfg.duration_seconds);
  }

  const double epoch = options.epoch_seconds > 0 ? options.epoch_seconds : 1.0;
  for (int64_t k = 1;; ++k) {
    const double until = std::min(static_cast<double>(k) * epoch, horizon);
    RunEpoch(workers, until, options);
    SyncBarrier(workers);
    if (until >= horizon) break;
  }
  // Final round: every node publishes, in id order, so the directory
  // dominates each node's final state.
  std::vector<NodeWorker*> by_id;
  for (auto& w : workers) by_id.push_back(w.get());
  std::sort(by_id.begin(), by_id.end(), [](auto* a, auto* b) {
    return a->config().node_id < b->config().node_id;
  });
  for (NodeWorker* w : by_id) {
    if (absl::Status s = w->SyncNow(); !s.ok()) return s;
  }

  CampaignStats stats;
  stats.duration_seconds = horizon;
  uint64_t total_execs = 0;
  double max_elapsed = 0;
  for (NodeWorker* w : by_id) {
    NodeRun run = w->Finish();
    total_execs += run.stats.execs;
    max_elapsed = std::max(max_elapsed, run.stats.elapsed_seconds);
    stats.union_coverage.MergeFrom(run.stats.final_map);
    stats.timeline.insert(stats.timeline.end(), run.timeline.begin(),
                          run.timeline.end());
    stats.observer.push_back(std::move(run.observer));
    stats.frames.push_back(std::move(run.frames));
    stats.nodes.push_back(std::move(run.stats));
  }
  stats.aggregate_exec_per_sec =
      max_elapsed > 0 ? static_cast<double>(total_execs) / max_elapsed : 0;
  std::stable_sort(stats.timeline.begin(), stats.timeline.end(),
                   [](const CrashRecord& a, const CrashRecord& b) {
                     return std::tie(a.at_seconds, a.node_id, a.seq) <
                            std::tie(b.at_seconds, b.node_id, b.seq);
                   });
  return stats;
}

absl::StatusOr<NodeRun> RunNode(const NodeConfig& cfg,
                                const FuzzTarget& target) {
  absl::StatusOr<std::unique_ptr<NodeWorker>> w = NodeWorker::Create(cfg, target);
  if (!w.ok()) return w.status();
  NodeWorker& worker = **w;
  const double epoch = 1.0;
  for (int64_t k = 1; !worker.done(); ++k) {
    worker.RunUntil(static_cast<double>(k) * epoch);
    if (worker.WantsSync()) (void)worker.SyncNow();
  }
  if (absl::Status s = worker.SyncNow(); !s.ok()) return s;
  return worker.Finish();
}

std::vector<ScalingRow> AggregateScaling(
    std::span<const std::pair<int, CampaignStats>> sweep) {
  std::vector<ScalingRow> rows;
  for (const auto& [cores, stats] : sweep) {
    rows.push_back({cores, stats.aggregate_exec_per_sec});
  }
  std::sort(rows.begin(), rows.end(),
            [](const ScalingRow& a, const ScalingRow& b) {
              return a.cores < b.cores;
            });
  return rows;
}

std::vector<ObserverEvent> MergedObserverTrace(const CampaignStats& stats) {
  std::vector<std::pair<size_t, ObserverEvent>> tagged;
  for (size_t n = 0; n < stats.observer.size(); ++n) {
    for (const ObserverEvent& e : stats.observer[n]) tagged.emplace_back(n, e);
  }
  std::stable_sort(tagged.begin(), tagged.end(),
                   [](const auto& a, const auto& b) {
                     return std::tie(a.second.at_us, a.first) <
                            std::tie(b.second.at_us, b.first);
                   });
  std::vector<ObserverEvent> out;
  out.reserve(tagged.size());
  for (auto& [n, e] : tagged) out.push_back(e);
  return out;
}

}  // namespace obliviofuzz

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
#include <fstream>
#include <set>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "gtest/gtest.h"
#include "obliviofuzz/target.h"
#include "test_util.h"

namespace obliviofuzz {
namespace {

using ::obliviofuzz::testing::ScratchDir;
using K = ProvisionEvent::Kind;
using S = ProvisionStage;

absl::StatusOr<ProvisionState> Replay(std::initializer_list<ProvisionEvent> evs) {
  ProvisionState s;
  for (const ProvisionEvent& e : evs) {
    absl::StatusOr<ProvisionState> next = ProvisionAdvance(s, e);
    if (!next.ok()) return next.status();
    s = *next;
  }
  return s;
}

TEST(ProvisionTest, HappyPathEndsReporting) {
  absl::StatusOr<ProvisionState> s =
      Replay({{K::kPublishToolchain}, {K::kProvisionLoader}, {K::kSubmitTarget},
           {K::kSubmitFuzzer}, {K::kVerifyLoad, true}, {K::kStart},
           {K::kReport}, {K::kReport}});
  ASSERT_TRUE(s.ok()) << s.status();
  EXPECT_EQ(s->stage, S::kReporting);
}

TEST(ProvisionTest, ImagesInEitherOrder) {
  absl::StatusOr<ProvisionState> s =
      Replay({{K::kPublishToolchain}, {K::kProvisionLoader}, {K::kSubmitFuzzer},
           {K::kSubmitTarget}, {K::kVerifyLoad, true}});
  ASSERT_TRUE(s.ok());
  EXPECT_EQ(s->stage, S::kLoaded);
}

TEST(ProvisionTest, TargetBeforeLoaderIsIllegal) {
  absl::StatusOr<ProvisionState> s =
      Replay({{K::kPublishToolchain}, {K::kSubmitTarget}});
  EXPECT_EQ(s.status().code(), absl::StatusCode::kFailedPrecondition);
}

TEST(ProvisionTest, FailedVerificationLeavesStateAlone) {
  absl::StatusOr<ProvisionState> ready =
      Replay({{K::kPublishToolchain}, {K::kProvisionLoader}, {K::kSubmitTarget},
           {K::kSubmitFuzzer}});
  ASSERT_TRUE(ready.ok());
  const ProvisionState before = *ready;
  EXPECT_EQ(ProvisionAdvance(before, {K::kVerifyLoad, false}).status().code(),
            absl::StatusCode::kPermissionDenied);
  EXPECT_EQ(before.stage, S::kAwaitingImages);
  EXPECT_TRUE(ProvisionAdvance(before, {K::kVerifyLoad, true}).ok());
}

TEST(ProvisionTest, VerifyNeedsBothImages) {
  EXPECT_FALSE(Replay({{K::kPublishToolchain}, {K::kProvisionLoader},
                    {K::kSubmitTarget}, {K::kVerifyLoad, true}})
                   .ok());
}

TEST(ProvisionTest, DuplicateSubmissionIsIllegal) {
  EXPECT_FALSE(Replay({{K::kPublishToolchain}, {K::kProvisionLoader},
                    {K::kSubmitTarget}, {K::kSubmitTarget}})
                   .ok());
}

TEST(ProvisionTest, StartOnlyAfterLoad) {
  EXPECT_FALSE(Replay({{K::kStart}}).ok());
  EXPECT_FALSE(Replay({{K::kReport}}).ok());
}

NodeConfig BaseCfg(const ScratchDir& s, std::string target = "toy") {
  NodeConfig c;
  c.target = std::move(target);
  c.shared_dir = s.path();
  c.duration_seconds = 5;
  return c;
}

std::unique_ptr<FuzzTarget> Make(const std::string& name) {
  return *MakeTarget(name);
}

TEST(NodeTest, WrongMeasurementIsRejected) {
  ScratchDir s("node-measure");
  NodeConfig c = BaseCfg(s);
  c.expected_measurement = Sha256(TargetImage("something-else"));
  auto t = Make("toy");
  EXPECT_EQ(NodeWorker::Create(c, *t).status().code(),
            absl::StatusCode::kPermissionDenied);
}

TEST(NodeTest, CreatedNodeIsRunning) {
  ScratchDir s("node-running");
  auto t = Make("toy");
  absl::StatusOr<std::unique_ptr<NodeWorker>> w =
      NodeWorker::Create(BaseCfg(s), *t);
  ASSERT_TRUE(w.ok()) << w.status();
  EXPECT_EQ((*w)->provision_state().stage, S::kRunning);
  EXPECT_EQ((*w)->Finish().stats.node_id, 0);
}

TEST(NodeTest, ZeroDurationDoesNothing) {
  ScratchDir s("node-zero");
  NodeConfig c = BaseCfg(s);
  c.duration_seconds = 0;
  auto t = Make("toy");
  absl::StatusOr<NodeRun> r = RunNode(c, *t);
  ASSERT_TRUE(r.ok()) << r.status();
  EXPECT_EQ(r->stats.execs, 0u);
  EXPECT_TRUE(r->timeline.empty());
  EXPECT_TRUE(r->frames.empty());
}

TEST(NodeTest, ToySecretFoundWithinBudget) {
  for (uint64_t seed : {1, 2, 3}) {
    ScratchDir s("node-toy");
    NodeConfig c = BaseCfg(s);
    c.seed = seed;
    c.duration_seconds = 1e6;
    auto t = Make("toy");
    absl::StatusOr<std::unique_ptr<NodeWorker>> w = NodeWorker::Create(c, *t);
    ASSERT_TRUE(w.ok());
    auto has_real = [&] {
      const auto& tl = (*w)->timeline();
      return std::any_of(tl.begin(), tl.end(),
                         [](const CrashRecord& r) { return r.real(); });
    };
    for (double until = 1; !has_real() && !(*w)->done(); until += 1) {
      (*w)->RunUntil(until);
      if ((*w)->WantsSync()) ASSERT_TRUE((*w)->SyncNow().ok());
    }
    ASSERT_TRUE(has_real()) << "seed " << seed;
    const NodeRun run = (*w)->Finish();
    EXPECT_TRUE(run.stats.distinct_bugs.contains(0));
    const auto real = std::find_if(run.timeline.begin(), run.timeline.end(),
                                   [](const CrashRecord& r) { return r.real(); });
    EXPECT_EQ(real->bug_id, 0);
    EXPECT_TRUE(t->Execute(real->input).crashed());
  }
}

TEST(NodeTest, SameConfigSameStats) {
  auto t = Make("bugmatrix");
  std::vector<NodeRun> runs;
  for (int i = 0; i < 2; ++i) {
    ScratchDir s("node-det");
    NodeConfig c = BaseCfg(s, "bugmatrix");
    c.duration_seconds = 30;
    absl::StatusOr<NodeRun> r = RunNode(c, *t);
    ASSERT_TRUE(r.ok());
    runs.push_back(*std::move(r));
  }
  EXPECT_EQ(runs[0].stats, runs[1].stats);
  EXPECT_EQ(runs[0].timeline, runs[1].timeline);
  EXPECT_EQ(runs[0].frames, runs[1].frames);
  EXPECT_EQ(runs[0].observer, runs[1].observer);
}

TEST(NodeTest, EveryCrashIsOneExitAndOneFrame) {
  ScratchDir s("node-frames");
  NodeConfig c = BaseCfg(s, "bugmatrix");
  c.duration_seconds = 120;
  auto t = Make("bugmatrix");
  absl::StatusOr<NodeRun> r = RunNode(c, *t);
  ASSERT_TRUE(r.ok());
  size_t exits = 0;
  size_t sent = 0;
  for (const ObserverEvent& e : r->observer) {
    exits += e.kind == ObserverEvent::Kind::kCrashExit;
    if (e.kind == ObserverEvent::Kind::kFrameSent) {
      ++sent;
      EXPECT_EQ(e.length, kFrameSize);
    }
  }
  EXPECT_EQ(exits, r->timeline.size());
  EXPECT_EQ(sent, r->timeline.size());
  EXPECT_EQ(r->frames.size(), r->timeline.size());
  EXPECT_EQ(r->stats.real_crashes + r->stats.fake_crashes, r->timeline.size());
  // Three windows a minute, each showing at least one crash.
  EXPECT_GE(r->timeline.size(), 6u);
}

TEST(NodeTest, MemoryIsRuntimeBasePlusCorpus) {
  ScratchDir s("node-mem");
  NodeConfig c = BaseCfg(s, "bugmatrix");
  c.duration_seconds = 20;
  auto t = Make("bugmatrix");
  absl::StatusOr<NodeRun> r = RunNode(c, *t);
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r->stats.rss_bytes, 2 * kMiB + r->stats.corpus_mem_bytes);
  EXPECT_GT(r->stats.corpus_size, 0u);
}

TEST(NodeTest, MissingSharedDirIsFatal) {
  ScratchDir s("node-nodir");
  NodeConfig c = BaseCfg(s);
  std::ofstream(s.path() / "file") << "x";
  c.shared_dir = s.path() / "file";
  auto t = Make("toy");
  EXPECT_FALSE(RunNode(c, *t).ok());
}

TEST(MakeNodeConfigsTest, DistinctIdsAndSeeds) {
  NodeConfig base;
  base.seed = 7;
  const std::vector<NodeConfig> cfgs = MakeNodeConfigs(base, 8);
  ASSERT_EQ(cfgs.size(), 8u);
  std::set<uint64_t> seeds;
  for (size_t i = 0; i < cfgs.size(); ++i) {
    EXPECT_EQ(cfgs[i].node_id, i);
    seeds.insert(cfgs[i].seed);
  }
  EXPECT_EQ(seeds.size(), 8u);
  EXPECT_EQ(MakeNodeConfigs(base, 8)[3].seed, cfgs[3].seed);
}

TEST(CampaignTest, DuplicateNodeIdsRejected) {
  ScratchDir s("camp-dup");
  std::vector<NodeConfig> cfgs(2);
  EXPECT_EQ(RunCampaign(cfgs, s.path()).status().code(),
            absl::StatusCode::kInvalidArgument);
}

TEST(CampaignTest, UnknownTargetRejected) {
  ScratchDir s("camp-target");
  NodeConfig c;
  c.target = "nope";
  EXPECT_FALSE(RunCampaign(std::vector<NodeConfig>{c}, s.path()).ok());
}

TEST(CampaignTest, UnionCoversEveryNode) {
  ScratchDir s("camp-union");
  NodeConfig base;
  base.target = "bugmatrix";
  base.duration_seconds = 60;
  const std::vector<NodeConfig> cfgs = MakeNodeConfigs(base, 2);
  absl::StatusOr<CampaignStats> st = RunCampaign(cfgs, s.path());
  ASSERT_TRUE(st.ok()) << st.status();
  std::set<int> all;
  for (const CrashRecord& r : st->timeline) {
    if (r.real()) all.insert(r.bug_id);
  }
  for (const NodeStats& n : st->nodes) {
    EXPECT_TRUE(std::includes(all.begin(), all.end(), n.distinct_bugs.begin(),
                              n.distinct_bugs.end()));
    EXPECT_TRUE(st->union_coverage.Dominates(n.final_map));
  }
  auto covs = SharedDir(s.path()).ReadCoverages();
  ASSERT_TRUE(covs.ok());
  EXPECT_EQ(covs->size(), 2u);
  for (const auto& [node, map] : *covs) {
    EXPECT_TRUE(st->union_coverage.Dominates(map)) << node;
  }
  EXPECT_TRUE(std::is_sorted(
      st->timeline.begin(), st->timeline.end(),
      [](const CrashRecord& a, const CrashRecord& b) {
        return a.at_seconds < b.at_seconds;
      }));
}

TEST(CampaignTest, ParallelAndSequentialAgree) {
  NodeConfig base;
  base.target = "bugmatrix";
  base.duration_seconds = 20;
  const std::vector<NodeConfig> cfgs = MakeNodeConfigs(base, 3);
  ScratchDir a("camp-par");
  ScratchDir b("camp-seq");
  absl::StatusOr<CampaignStats> par =
      RunCampaign(cfgs, a.path(), {.parallel = true, .max_threads = 3});
  absl::StatusOr<CampaignStats> seq =
      RunCampaign(cfgs, b.path(), {.parallel = false});
  ASSERT_TRUE(par.ok());
  ASSERT_TRUE(seq.ok());
  EXPECT_EQ(par->nodes, seq->nodes);
  EXPECT_EQ(par->timeline, seq->timeline);
}

TEST(CampaignTest, MergedObserverTraceIsOrdered) {
  ScratchDir s("camp-observer");
  NodeConfig base;
  base.target = "toy";
  base.duration_seconds = 30;
  absl::StatusOr<CampaignStats> st =
      RunCampaign(MakeNodeConfigs(base, 2), s.path());
  ASSERT_TRUE(st.ok());
  const std::vector<ObserverEvent> merged = MergedObserverTrace(*st);
  EXPECT_EQ(merged.size(), st->observer[0].size() + st->observer[1].size());
  EXPECT_TRUE(std::is_sorted(merged.begin(), merged.end(),
                             [](const ObserverEvent& a, const ObserverEvent& b) {
                               return a.at_us < b.at_us;
                             }));
}

TEST(ScalingTest, SinglePoint) {
  std::vector<std::pair<int, CampaignStats>> sweep(1);
  sweep[0].first = 1;
  sweep[0].second.aggregate_exec_per_sec = 123.0;
  const std::vector<ScalingRow> rows = AggregateScaling(sweep);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].cores, 1);
  EXPECT_EQ(rows[0].exec_per_sec, 123.0);
}

TEST(ScalingTest, ZeroSyncCostIsLinear) {
  NodeConfig base;
  base.target = "toy";
  base.mode = SgxMode::kNoSgx;
  base.duration_seconds = 2;
  base.cost.ocall_cost_us = 0;
  base.cost.restart_cost_us = 0;
  base.target_rate_per_min = 0.001;
  std::vector<std::pair<int, CampaignStats>> sweep;
  for (int cores : {4, 1, 8, 2}) {
    ScratchDir s("scale-zero");
    absl::StatusOr<CampaignStats> st =
        RunCampaign(MakeNodeConfigs(base, cores), s.path());
    ASSERT_TRUE(st.ok());
    sweep.emplace_back(cores, *std::move(st));
  }
  const std::vector<ScalingRow> rows = AggregateScaling(sweep);
  ASSERT_EQ(rows.size(), 4u);
  const double per_node = rows[0].exec_per_sec;
  EXPECT_EQ(rows[0].cores, 1);
  for (const ScalingRow& r : rows) {
    EXPECT_NEAR(r.exec_per_sec / (per_node * r.cores), 1.0, 1e-3)
        << r.cores << " cores";
  }
}

}  // namespace
}  // namespace obliviofuzz

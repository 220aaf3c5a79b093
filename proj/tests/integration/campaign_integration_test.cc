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


// End-to-end runs through the command-line front end: artifacts, replay and
// determinism across whole campaigns.
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "cli/cli.h"
#include "cli/report.h"
#include "gtest/gtest.h"
#include "obliviofuzz/crypto.h"
#include "obliviofuzz/shared_dir.h"
#include "obliviofuzz/target.h"
#include "test_util.h"

namespace obliviofuzz::cli {
namespace {

namespace fs = std::filesystem;
using ::obliviofuzz::testing::ScratchDir;

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

absl::Status RunCli(std::vector<std::string> args) {
  args.insert(args.begin(), "obliviofuzz");
  absl::StatusOr<Command> cmd = ParseArgs(args);
  if (!cmd.ok()) return cmd.status();
  std::ostringstream log;
  return Execute(*cmd, log);
}

std::vector<std::vector<std::string>> CsvRows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

TEST(CampaignIntegrationTest, MultiNodeArtifactsAreConsistent) {
  ScratchDir s("int-multi");
  const fs::path out = s.path() / "out";
  ASSERT_TRUE(RunCli({"campaign", "--target", "bugmatrix", "--cores", "4",
                      "--duration", "180", "--out", out.string()})
                  .ok());

  // Every window of every node shows a crash: at least 3 per node-minute.
  int total = 0;
  int real = 0;
  const auto rate = CsvRows(Slurp(out / "rate.csv"));
  ASSERT_EQ(rate.size(), 3u);
  for (const auto& row : rate) {
    total += std::stoi(row[3]);
    real += std::stoi(row[1]);
  }
  EXPECT_GE(total, 3 * 3 * 4);
  EXPECT_GT(real, 0);

  // Each real row names the bug its input still fires.
  std::unique_ptr<FuzzTarget> target = *MakeTarget("bugmatrix");
  int reals_checked = 0;
  for (const auto& row : CsvRows(Slurp(out / "crashes.csv"))) {
    ASSERT_EQ(row.size(), 4u);
    if (row[1] != "real") {
      EXPECT_EQ(row[2], "");
      EXPECT_EQ(row[3], "");
      continue;
    }
    std::optional<std::vector<uint8_t>> input = FromHex(row[3]);
    ASSERT_TRUE(input.has_value());
    EXPECT_LE(input->size(), kMaxReportInput);
    EXPECT_EQ(target->Execute(*input).bug_id, std::stoi(row[2]));
    ++reals_checked;
  }
  EXPECT_EQ(reals_checked, real);

  // The shared directory holds one class map per node and a minimized
  // seed set whose coverage reaches each map.
  const SharedDir shared(out / "shared");
  auto covs = shared.ReadCoverages();
  ASSERT_TRUE(covs.ok());
  ASSERT_EQ(covs->size(), 4u);
  ClassMap from_seeds;
  auto seeds = shared.ListSeeds();
  ASSERT_TRUE(seeds.ok());
  for (const Digest& d : *seeds) {
    const Bytes seed = *shared.ReadSeed(d);
    EXPECT_EQ(Sha256(seed), d);
    CoverageMap run;
    run.RecordEdges(target->Execute(seed).edges);
    from_seeds.MergeFrom(ClassMap::Classify(run));
  }
  EXPECT_GT(from_seeds.NonZeroCount(), 0u);

  // Frame stream is whole frames, one per crash row.
  const auto frames = fs::file_size(out / "frames.bin");
  EXPECT_EQ(frames % kFrameSize, 0u);
  EXPECT_EQ(frames / kFrameSize, CsvRows(Slurp(out / "crashes.csv")).size());
}

TEST(CampaignIntegrationTest, SameSeedSameBytes) {
  ScratchDir s("int-det");
  std::vector<fs::path> outs = {s.path() / "a", s.path() / "b"};
  for (const fs::path& out : outs) {
    ASSERT_TRUE(RunCli({"campaign", "--target", "bugmatrix", "--cores", "3",
                        "--duration", "120", "--seed", "11", "--out",
                        out.string()})
                    .ok());
  }
  for (const char* f : {"crashes.csv", "rate.csv", "observer.csv", "frames.bin"}) {
    EXPECT_EQ(Slurp(outs[0] / f), Slurp(outs[1] / f)) << f;
  }
  // Thread count does not matter either.
  const fs::path seq = s.path() / "seq";
  ASSERT_TRUE(RunCli({"campaign", "--target", "bugmatrix", "--cores", "3",
                      "--duration", "120", "--seed", "11", "--sequential",
                      "--out", seq.string()})
                  .ok());
  EXPECT_EQ(Slurp(outs[0] / "crashes.csv"), Slurp(seq / "crashes.csv"));
}

TEST(CampaignIntegrationTest, DifferentSeedsDiverge) {
  ScratchDir s("int-seeds");
  for (const char* seed : {"1", "2"}) {
    ASSERT_TRUE(RunCli({"run", "--target", "bugmatrix", "--duration", "60",
                        "--seed", seed, "--out", (s.path() / seed).string()})
                    .ok());
  }
  EXPECT_NE(Slurp(s.path() / "1" / "crashes.csv"),
            Slurp(s.path() / "2" / "crashes.csv"));
}

TEST(CampaignIntegrationTest, SweepWritesOneRowPerPoint) {
  ScratchDir s("int-sweep");
  const fs::path out = s.path() / "out";
  ASSERT_TRUE(RunCli({"campaign", "--target", "toy", "--mode", "no-sgx",
                      "--sweep", "2,1,4", "--duration", "5", "--out",
                      out.string()})
                  .ok());
  const auto rows = CsvRows(Slurp(out / "throughput.csv"));
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0][0], "1");
  EXPECT_EQ(rows[1][0], "2");
  EXPECT_EQ(rows[2][0], "4");
  for (int cores : {1, 2, 4}) {
    EXPECT_TRUE(fs::is_directory(out / "shared" / ("sweep-" + std::to_string(cores))));
  }
  EXPECT_LT(std::stod(rows[0][1]), std::stod(rows[2][1]));
}

TEST(CampaignIntegrationTest, UserSeedsInSharedDirAreUsed) {
  ScratchDir s("int-userseed");
  const fs::path shared = s.path() / "shared";
  ASSERT_TRUE(SharedDir(shared).Init().ok());
  std::ofstream(shared / "corpus" / "hint.txt") << "0bl1v!0";
  const fs::path out = s.path() / "out";
  ASSERT_TRUE(RunCli({"run", "--target", "toy", "--duration", "2",
                      "--shared-dir", shared.string(), "--out", out.string()})
                  .ok());
  const auto rows = CsvRows(Slurp(out / "crashes.csv"));
  EXPECT_TRUE(std::any_of(rows.begin(), rows.end(), [](const auto& r) {
    return r[1] == "real" && r[2] == "0";
  }));
}

TEST(CampaignIntegrationTest, UnwritableOutputIsIoError) {
  ScratchDir s("int-io");
  std::ofstream(s.path() / "blocker") << "x";
  const absl::Status st = RunCli({"run", "--target", "toy", "--duration", "1",
                                  "--out", (s.path() / "blocker" / "out").string()});
  EXPECT_EQ(ExitCodeFor(st), kExitIo);
}

}  // namespace
}  // namespace obliviofuzz::cli

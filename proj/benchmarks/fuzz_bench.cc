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


// Wall-clock microbenchmarks of the hot paths. Virtual-clock throughput is
// what `obliviofuzz bench` reports; these measure the host cost.
#include <memory>
#include <vector>

#include "benchmark/benchmark.h"
#include "obliviofuzz/channel.h"
#include "obliviofuzz/cluster.h"
#include "obliviofuzz/coverage.h"
#include "obliviofuzz/mutation.h"
#include "obliviofuzz/prng.h"
#include "obliviofuzz/target.h"

namespace obliviofuzz {
namespace {

void BM_Novelty(benchmark::State& state) {
  Prng rng(1);
  ClassMap global;
  CoverageMap run;
  for (int i = 0; i < state.range(0); ++i) {
    run.RecordEdge(static_cast<SiteId>(rng.Below(5000)),
                   static_cast<SiteId>(rng.Below(5000)));
  }
  global.MergeFrom(ClassMap::Classify(run));
  for (auto _ : state) benchmark::DoNotOptimize(ComputeNovelty(global, run));
}
BENCHMARK(BM_Novelty)->Arg(16)->Arg(256)->Arg(2048);

void BM_Mutate(benchmark::State& state) {
  Prng rng(2);
  Bytes seed(static_cast<size_t>(state.range(0)));
  for (uint8_t& b : seed) b = rng.Byte();
  const std::vector<Bytes> pool = {seed, Bytes(64, 7)};
  for (auto _ : state) {
    benchmark::DoNotOptimize(Mutate(seed, rng, 4096, pool));
  }
}
BENCHMARK(BM_Mutate)->Arg(8)->Arg(256)->Arg(4096);

void BM_Execute(benchmark::State& state, const char* name) {
  const std::unique_ptr<FuzzTarget> target = *MakeTarget(name);
  Prng rng(3);
  std::vector<Bytes> inputs(256);
  for (Bytes& in : inputs) {
    in.resize(rng.Range(1, 64));
    for (uint8_t& b : in) b = rng.Byte();
  }
  size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(target->Execute(inputs[i++ % inputs.size()]));
  }
}
BENCHMARK_CAPTURE(BM_Execute, toy, "toy");
BENCHMARK_CAPTURE(BM_Execute, expr, "expr");
BENCHMARK_CAPTURE(BM_Execute, bugmatrix, "bugmatrix");

void BM_SealFrame(benchmark::State& state) {
  ReportEncoder enc(DeriveSessionKey(4), 0);
  const Bytes input(200, 0x41);
  for (auto _ : state) benchmark::DoNotOptimize(enc.Seal(1, 0, input));
}
BENCHMARK(BM_SealFrame);

// One virtual second of a single node on the toy target, per iteration.
void BM_NodeSecond(benchmark::State& state) {
  NodeConfig cfg;
  cfg.target = "toy";
  cfg.duration_seconds = 1;
  cfg.shared_dir = std::filesystem::temp_directory_path() / "obliviofuzz-bench";
  const std::unique_ptr<FuzzTarget> target = *MakeTarget("toy");
  for (auto _ : state) {
    std::filesystem::remove_all(cfg.shared_dir);
    absl::StatusOr<NodeRun> run = RunNode(cfg, *target);
    if (!run.ok()) {
      state.SkipWithError("node run failed");
      break;
    }
    state.counters["virtual_execs"] = static_cast<double>(run->stats.execs);
  }
  std::filesystem::remove_all(cfg.shared_dir);
}
BENCHMARK(BM_NodeSecond)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace obliviofuzz

BENCHMARK_MAIN();

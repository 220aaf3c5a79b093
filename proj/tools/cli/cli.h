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

// Command-line front end: settings resolution (defaults < OBLIVIOFUZZ_SEED <
// config file < flags), subcommand dispatch and exit-code mapping.
#ifndef OBLIVIOFUZZ_TOOLS_CLI_CLI_H_
#define OBLIVIOFUZZ_TOOLS_CLI_CLI_H_

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "obliviofuzz/cluster.h"
#include "obliviofuzz/enclave.h"

namespace obliviofuzz::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitProvisioning = 3;
inline constexpr int kExitIo = 4;

struct Settings {
  std::optional<std::string> target;
  SgxMode mode = SgxMode::kSgxHw;
  int cores = 1;
  double duration_s = 600;
  double crash_rate_per_min = 3;
  uint64_t seed = 1;
  size_t mem_budget_bytes = kDefaultMemBudget;
  std::string shared_dir;  // empty: <out_dir>/shared
  std::string out_dir = "obliviofuzz-out";
  CostModel cost;
  std::vector<int> sweep;  // campaign only: core counts for throughput.csv
  bool sequential = false;
};

enum class CommandKind { kRun, kCampaign, kReport, kBench, kHelp };

struct Command {
  CommandKind kind = CommandKind::kHelp;
  Settings settings;
  std::string help;  // kHelp only
};

// Applies a JSON campaign config onto `settings`. Unknown keys and
// non-positive numbers are kInvalidArgument.
absl::Status ApplyConfigJson(std::string_view json_text, Settings& settings);

// argv[0] is the program name. `env_seed` is the value of OBLIVIOFUZZ_SEED,
// if set. Usage problems are kInvalidArgument.
absl::StatusOr<Command> ParseArgs(std::span<const std::string> argv,
                                  std::optional<std::string> env_seed = {});

int ExitCodeFor(const absl::Status& status);

// Runs a parsed command, writing human-readable progress to `out`.
absl::Status Execute(const Command& command, std::ostream& out);

// Simulated throughput for cost_units = 1 in `mode`, measured by executing
// the toy target `execs` times on the virtual clock.
double BenchExecRate(const CostModel& base, SgxMode mode,
                     uint64_t execs = 1'000'000, size_t rss_bytes = 0);

NodeConfig BaseNodeConfig(const Settings& settings);

}  // namespace obliviofuzz::cli

#endif  // OBLIVIOFUZZ_TOOLS_CLI_CLI_H_

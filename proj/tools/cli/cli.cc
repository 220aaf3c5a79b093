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

#include "cli/cli.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "absl/strings/str_cat.h"
#include "cli/report.h"
#include "json.hpp"
#include "obliviofuzz/shared_dir.h"
#include "obliviofuzz/target.h"

namespace obliviofuzz::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

absl::Status Usage(const std::string& msg) {
  return absl::InvalidArgumentError(msg);
}

absl::StatusOr<uint64_t> ParseU64(std::string_view s) {
  uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    return Usage(absl::StrCat("not an unsigned 64-bit integer: '", std::string(s), "'"));
  }
  return v;
}

template <typename T>
absl::StatusOr<T> PositiveNumber(const json& j, const std::string& key) {
  if (!j.is_number()) return Usage(absl::StrCat(key, " must be a number"));
  if constexpr (std::is_integral_v<T>) {
    if (!j.is_number_integer()) {
      return Usage(absl::StrCat(key, " must be an integer"));
    }
    if (j.is_number_unsigned() ? j.get<uint64_t>() == 0
                               : j.get<int64_t>() <= 0) {
      return Usage(absl::StrCat(key, " must be positive"));
    }
  } else if (!(j.get<double>() > 0)) {
    return Usage(absl::StrCat(key, " must be positive"));
  }
  return j.get<T>();
}

#define OF_ASSIGN_OR_RETURN(lhs, expr)          \
  do {                                          \
    auto _v = (expr);                           \
    if (!_v.ok()) return _v.status();           \
    lhs = *std::move(_v);                       \
  } while (0)

absl::Status ApplyCostModel(const json& j, CostModel& cost) {
  if (!j.is_object()) return Usage("cost_model must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "base_exec_rate") {
      OF_ASSIGN_OR_RETURN(cost.base_exec_rate, PositiveNumber<double>(value, key));
    } else if (key == "ocall_cost_us") {
      OF_ASSIGN_OR_RETURN(cost.ocall_cost_us, PositiveNumber<double>(value, key));
    } else if (key == "restart_cost_us") {
      OF_ASSIGN_OR_RETURN(cost.restart_cost_us,
                          PositiveNumber<double>(value, key));
    } else if (key == "epc_limit_bytes") {
      OF_ASSIGN_OR_RETURN(cost.epc_limit_bytes,
                          PositiveNumber<uint64_t>(value, key));
    } else if (key == "paging_penalty") {
      OF_ASSIGN_OR_RETURN(cost.paging_penalty,
                          PositiveNumber<double>(value, key));
    } else if (key == "runtime_base_bytes") {
      OF_ASSIGN_OR_RETURN(cost.runtime_base_bytes,
                          PositiveNumber<uint64_t>(value, key));
    } else if (key == "mode_multipliers") {
      if (!value.is_array() || value.size() != kSgxModeCount) {
        return Usage("mode_multipliers must be an array of 3 numbers");
      }
      for (size_t i = 0; i < kSgxModeCount; ++i) {
        OF_ASSIGN_OR_RETURN(cost.mode_multiplier[i],
                            PositiveNumber<double>(value[i], key));
      }
    } else {
      return Usage(absl::StrCat("unknown cost_model key '", key, "'"));
    }
  }
  return cost.Validate();
}

}  // namespace

absl::Status ApplyConfigJson(std::string_view json_text, Settings& s) {
  const json j = json::parse(json_text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) return Usage("config is not valid JSON");
  if (!j.is_object()) return Usage("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "target") {
      if (!value.is_string()) return Usage("target must be a string");
      s.target = value.get<std::string>();
    } else if (key == "mode") {
      if (!value.is_string()) return Usage("mode must be a string");
      absl::StatusOr<SgxMode> m = ParseSgxMode(value.get<std::string>());
      if (!m.ok()) return m.status();
      s.mode = *m;
    } else if (key == "cores") {
      OF_ASSIGN_OR_RETURN(s.cores, PositiveNumber<int>(value, key));
    } else if (key == "duration_s") {
      OF_ASSIGN_OR_RETURN(s.duration_s, PositiveNumber<double>(value, key));
    } else if (key == "crash_rate_per_min") {
      OF_ASSIGN_OR_RETURN(s.crash_rate_per_min,
                          PositiveNumber<double>(value, key));
    } else if (key == "seed") {
      OF_ASSIGN_OR_RETURN(s.seed, PositiveNumber<uint64_t>(value, key));
    } else if (key == "mem_budget_bytes") {
      OF_ASSIGN_OR_RETURN(s.mem_budget_bytes,
                          PositiveNumber<uint64_t>(value, key));
    } else if (key == "shared_dir") {
      if (!value.is_string()) return Usage("shared_dir must be a string");
      s.shared_dir = value.get<std::string>();
    } else if (key == "out_dir") {
      if (!value.is_string()) return Usage("out_dir must be a string");
      s.out_dir = value.get<std::string>();
    } else if (key == "cost_model") {
      if (absl::Status st = ApplyCostModel(value, s.cost); !st.ok()) return st;
    } else {
      return Usage(absl::StrCat("unknown config key '", key, "'"));
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<Command> ParseArgs(std::span<const std::string> argv,
                                  std::optional<std::string> env_seed) {
  CLI::App app{"obliviofuzz: privacy-preserving fuzzing campaigns on a "
               "simulated enclave"};
  app.require_subcommand(1);

  struct Flags {
    std::string target, mode, seed, shared_dir, out, config, sweep;
    int cores = 0;
    double duration = 0, crash_rate = 0;
    bool sequential = false;
  } f;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--target", f.target, "toy | expr | bugmatrix");
    sub->add_option("--mode", f.mode, "no-sgx | sgx-sim | sgx-hw");
    sub->add_option("--cores", f.cores, "number of nodes")
        ->check(CLI::PositiveNumber);
    sub->add_option("--duration", f.duration, "virtual seconds per node")
        ->check(CLI::PositiveNumber);
    sub->add_option("--crash-rate", f.crash_rate,
                    "normalized crashes per minute")
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", f.seed, "64-bit campaign seed");
    sub->add_option("--shared-dir", f.shared_dir, "shared corpus directory");
    sub->add_option("--out", f.out, "output directory");
    sub->add_option("--config", f.config, "JSON config file");
  };
  CLI::App* run = app.add_subcommand("run", "fuzz on a single node");
  CLI::App* campaign = app.add_subcommand("campaign", "multi-node campaign");
  CLI::App* report =
      app.add_subcommand("report", "rebuild CSVs from a stored frame trace");
  CLI::App* bench =
      app.add_subcommand("bench", "cost-model calibration check");
  for (CLI::App* sub : {run, campaign, report, bench}) add_common(sub);
  campaign->add_option("--sweep", f.sweep,
                       "comma-separated core counts for throughput.csv");
  campaign->add_flag("--sequential", f.sequential,
                     "run nodes on one thread");

  std::vector<std::string> args(argv.begin() + (argv.empty() ? 0 : 1),
                                argv.end());
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    return Command{CommandKind::kHelp, {}, app.help()};
  } catch (const CLI::CallForAllHelp&) {
    return Command{CommandKind::kHelp, {}, app.help()};
  } catch (const CLI::ParseError& e) {
    return Usage(absl::StrCat(e.what(), "\n", app.help()));
  }

  Command cmd;
  CLI::App* chosen = app.get_subcommands().front();
  if (chosen == run) cmd.kind = CommandKind::kRun;
  if (chosen == campaign) cmd.kind = CommandKind::kCampaign;
  if (chosen == report) cmd.kind = CommandKind::kReport;
  if (chosen == bench) cmd.kind = CommandKind::kBench;
  Settings& s = cmd.settings;

  if (env_seed) {
    absl::StatusOr<uint64_t> v = ParseU64(*env_seed);
    if (!v.ok()) return Usage("OBLIVIOFUZZ_SEED is not a 64-bit integer");
    s.seed = *v;
  }
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) {
      return absl::UnavailableError(
          absl::StrCat("cannot read config ", f.config));
    }
    std::stringstream text;
    text << in.rdbuf();
    if (absl::Status st = ApplyConfigJson(text.str(), s); !st.ok()) return st;
  }
  if (chosen->count("--target") != 0) s.target = f.target;
  if (chosen->count("--mode") != 0) {
    absl::StatusOr<SgxMode> m = ParseSgxMode(f.mode);
    if (!m.ok()) return m.status();
    s.mode = *m;
  }
  if (chosen->count("--cores") != 0) s.cores = f.cores;
  if (chosen->count("--duration") != 0) s.duration_s = f.duration;
  if (chosen->count("--crash-rate") != 0) s.crash_rate_per_min = f.crash_rate;
  if (chosen->count("--seed") != 0) {
    absl::StatusOr<uint64_t> v = ParseU64(f.seed);
    if (!v.ok()) return v.status();
    s.seed = *v;
  }
  if (chosen->count("--shared-dir") != 0) s.shared_dir = f.shared_dir;
  if (chosen->count("--out") != 0) s.out_dir = f.out;
  s.sequential = f.sequential;
  if (!f.sweep.empty()) {
    std::stringstream list(f.sweep);
    for (std::string item; std::getline(list, item, ',');) {
      absl::StatusOr<uint64_t> v = ParseU64(item);
      if (!v.ok() || *v == 0 || *v > 65535) {
        return Usage(absl::StrCat("bad --sweep entry '", item, "'"));
      }
      s.sweep.push_back(static_cast<int>(*v));
    }
  }

  if (cmd.kind == CommandKind::kRun || cmd.kind == CommandKind::kCampaign) {
    if (!s.target) return Usage("--target is required (toy|expr|bugmatrix)");
    if (absl::StatusOr<std::unique_ptr<FuzzTarget>> t = MakeTarget(*s.target);
        !t.ok()) {
      return t.status();
    }
  }
  if (cmd.kind == CommandKind::kRun && s.cores != 1) {
    return Usage("run is single-node; use campaign for --cores > 1");
  }
  return cmd;
}

int ExitCodeFor(const absl::Status& status) {
  switch (status.code()) {
    case absl::StatusCode::kOk: return kExitOk;
    case absl::StatusCode::kInvalidArgument: return kExitUsage;
    case absl::StatusCode::kPermissionDenied:
    case absl::StatusCode::kFailedPrecondition: return kExitProvisioning;
    case absl::StatusCode::kUnavailable:
    case absl::StatusCode::kDataLoss:
    case absl::StatusCode::kNotFound:
    case absl::StatusCode::kUnauthenticated: return kExitIo;
    default: return 1;
  }
}

NodeConfig BaseNodeConfig(const Settings& s) {
  NodeConfig cfg;
  cfg.seed = s.seed;
  cfg.session_seed = s.seed;
  cfg.mode = s.mode;
  cfg.target = s.target.value_or("toy");
  cfg.target_rate_per_min = s.crash_rate_per_min;
  cfg.mem_budget = s.mem_budget_bytes;
  cfg.duration_seconds = s.duration_s;
  cfg.cost = s.cost;
  return cfg;
}

double BenchExecRate(const CostModel& base, SgxMode mode, uint64_t execs,
                     size_t rss_bytes) {
  CostModel cost = base;
  cost.mode = mode;
  const Bytes fuzzer = FuzzerImage();
  const Bytes image = TargetImage("toy");
  absl::StatusOr<EnclaveSim> enclave = EnclaveSim::Load(
      fuzzer, image, EnclaveSim::Measure(fuzzer, image), cost);
  if (!enclave.ok()) return 0;
  if (rss_bytes > cost.runtime_base_bytes) {
    enclave->set_transient_bytes(rss_bytes - cost.runtime_base_bytes);
  }
  const ToyTarget toy;
  const Bytes input = {'0', 'b', 'l'};
  for (uint64_t i = 0; i < execs; ++i) {
    enclave->ChargeExec(toy.Execute(input).cost_units);
  }
  return static_cast<double>(execs) / enclave->clock_seconds();
}

namespace {

absl::Status WriteText(const fs::path& path, std::string_view text) {
  return WriteFileAtomic(path, AsBytes(text));
}

fs::path SharedPath(const Settings& s) {
  return s.shared_dir.empty() ? fs::path(s.out_dir) / "shared"
                              : fs::path(s.shared_dir);
}

int Minutes(double duration_s) {
  return static_cast<int>(std::ceil(duration_s / 60.0));
}

absl::Status WriteEndUserCsvs(const fs::path& out,
                              std::span<const ReportFrame> frames,
                              uint64_t seed, const FuzzTarget& target,
                              double duration_s) {
  absl::StatusOr<std::vector<CrashRecord>> timeline =
      DecodeTimeline(frames, DeriveSessionKey(seed));
  if (!timeline.ok()) return timeline.status();
  AnnotateBugIds(*timeline, target);
  if (absl::Status st = WriteText(out / "crashes.csv", CrashesCsv(*timeline));
      !st.ok()) {
    return st;
  }
  return WriteText(out / "rate.csv", RateCsv(*timeline, Minutes(duration_s)));
}

absl::Status RunCampaignCommand(const Command& cmd, std::ostream& os) {
  const Settings& s = cmd.settings;
  const fs::path out(s.out_dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) return absl::UnavailableError(absl::StrCat("cannot create ", s.out_dir));

  absl::StatusOr<std::unique_ptr<FuzzTarget>> target = MakeTarget(*s.target);
  if (!target.ok()) return target.status();
  const NodeConfig base = BaseNodeConfig(s);
  CampaignOptions options;
  options.parallel = !s.sequential;

  std::vector<int> plan = s.sweep.empty() ? std::vector<int>{s.cores} : s.sweep;
  std::vector<std::pair<int, CampaignStats>> sweep;
  for (int cores : plan) {
    const fs::path shared = s.sweep.empty()
                                ? SharedPath(s)
                                : SharedPath(s) / absl::StrCat("sweep-", cores);
    std::vector<NodeConfig> cfgs = MakeNodeConfigs(base, cores);
    absl::StatusOr<CampaignStats> stats = RunCampaign(cfgs, shared, options);
    if (!stats.ok()) return stats.status();
    char line[160];
    std::snprintf(line, sizeof(line),
                  "cores=%d exec/s=%.1f real=%zu distinct-bugs=%zu\n", cores,
                  stats->aggregate_exec_per_sec,
                  static_cast<size_t>(std::count_if(
                      stats->timeline.begin(), stats->timeline.end(),
                      [](const CrashRecord& r) { return r.real(); })),
                  [&] {
                    std::set<int> bugs;
                    for (const NodeStats& n : stats->nodes) {
                      bugs.insert(n.distinct_bugs.begin(), n.distinct_bugs.end());
                    }
                    return bugs.size();
                  }());
    os << line;
    sweep.emplace_back(cores, *std::move(stats));
  }

  const CampaignStats& last = sweep.back().second;
  std::vector<ReportFrame> frames;
  for (const auto& node_frames : last.frames) {
    frames.insert(frames.end(), node_frames.begin(), node_frames.end());
  }
  const std::vector<uint8_t> frame_bytes = SerializeFrames(frames);
  if (absl::Status st = WriteFileAtomic(out / "frames.bin", frame_bytes);
      !st.ok()) {
    return st;
  }
  if (absl::Status st = WriteEndUserCsvs(out, frames, s.seed, **target,
                                         s.duration_s);
      !st.ok()) {
    return st;
  }
  if (absl::Status st = WriteText(out / "observer.csv",
                                  ObserverCsv(MergedObserverTrace(last)));
      !st.ok()) {
    return st;
  }
  if (absl::Status st =
          WriteText(out / "throughput.csv", ThroughputCsv(AggregateScaling(sweep)));
      !st.ok()) {
    return st;
  }
  const json meta = {
      {"target", *s.target},
      {"mode", std::string(SgxModeName(s.mode))},
      {"cores", sweep.back().first},
      {"duration_s", s.duration_s},
      {"crash_rate_per_min", s.crash_rate_per_min},
      {"seed", s.seed},
  };
  if (absl::Status st = WriteText(out / "campaign.json", meta.dump(2) + "\n");
      !st.ok()) {
    return st;
  }
  os << "wrote " << out.string() << "/{crashes,rate,observer,throughput}.csv\n";
  return absl::OkStatus();
}

absl::Status RunReportCommand(const Command& cmd, std::ostream& os) {
  const Settings& s = cmd.settings;
  const fs::path out(s.out_dir);
  absl::StatusOr<Bytes> meta_text = ReadFileBytes(out / "campaign.json");
  if (!meta_text.ok()) return meta_text.status();
  const json meta = json::parse(meta_text->begin(), meta_text->end(), nullptr,
                                /*allow_exceptions=*/false);
  if (meta.is_discarded() || !meta.contains("seed") ||
      !meta.contains("target") || !meta.contains("duration_s")) {
    return absl::DataLossError("campaign.json is malformed");
  }
  absl::StatusOr<Bytes> raw = ReadFileBytes(out / "frames.bin");
  if (!raw.ok()) return raw.status();
  absl::StatusOr<std::vector<ReportFrame>> frames = ParseFrames(*raw);
  if (!frames.ok()) return frames.status();
  absl::StatusOr<std::unique_ptr<FuzzTarget>> target =
      MakeTarget(meta["target"].get<std::string>());
  if (!target.ok()) return target.status();
  if (absl::Status st = WriteEndUserCsvs(out, *frames,
                                         meta["seed"].get<uint64_t>(), **target,
                                         meta["duration_s"].get<double>());
      !st.ok()) {
    return st;
  }
  os << "decoded " << frames->size() << " frames into " << out.string()
     << "/{crashes,rate}.csv\n";
  return absl::OkStatus();
}

absl::Status RunBenchCommand(const Command& cmd, std::ostream& os) {
  const CostModel& cost = cmd.settings.cost;
  double rates[kSgxModeCount];
  char line[160];
  for (size_t m = 0; m < kSgxModeCount; ++m) {
    const auto mode = static_cast<SgxMode>(m);
    rates[m] = BenchExecRate(cost, mode);
    std::snprintf(line, sizeof(line), "%-8s %10.2f exec/sec\n",
                  std::string(SgxModeName(mode)).c_str(), rates[m]);
    os << line;
  }
  std::snprintf(line, sizeof(line), "sgx-hw overhead vs no-sgx: %.2f%%\n",
                100.0 * (rates[0] - rates[2]) / rates[0]);
  os << line;
  const double low = BenchExecRate(cost, SgxMode::kSgxHw, 100'000,
                                   cost.epc_limit_bytes / 2);
  const double high = BenchExecRate(cost, SgxMode::kSgxHw, 100'000,
                                    cost.epc_limit_bytes * 3 / 2);
  std::snprintf(line, sizeof(line),
                "epc paging throughput ratio (1.5x / 0.5x limit): %.3f\n",
                high / low);
  os << line;
  return absl::OkStatus();
}

}  // namespace

absl::Status Execute(const Command& cmd, std::ostream& os) {
  switch (cmd.kind) {
    case CommandKind::kHelp:
      os << cmd.help;
      return absl::OkStatus();
    case CommandKind::kRun:
    case CommandKind::kCampaign:
      return RunCampaignCommand(cmd, os);
    case CommandKind::kReport:
      return RunReportCommand(cmd, os);
    case CommandKind::kBench:
      return RunBenchCommand(cmd, os);
  }
  return absl::InternalError("unreachable");
}

}  // namespace obliviofuzz::cli

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

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "cli/cli.h"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  std::optional<std::string> env_seed;
  if (const char* s = std::getenv("OBLIVIOFUZZ_SEED")) env_seed = s;

  absl::StatusOr<obliviofuzz::cli::Command> cmd =
      obliviofuzz::cli::ParseArgs(args, env_seed);
  if (!cmd.ok()) {
    std::cerr << "obliviofuzz: " << cmd.status().message() << "\n";
    return obliviofuzz::cli::ExitCodeFor(cmd.status());
  }
  const absl::Status status = obliviofuzz::cli::Execute(*cmd, std::cout);
  if (!status.ok()) {
    std::cerr << "obliviofuzz: " << status.message() << "\n";
  }
  return obliviofuzz::cli::ExitCodeFor(status);
}

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

// The shared corpus directory that nodes synchronize through:
//
//   corpus/<64-hex sha256>.seed   raw input bytes
//   coverage/<node-id>.cov        4096-byte class map
//   stats/<node-id>.csv           per-node throughput rows
//
// Every write goes to a temporary name and is renamed into place, so readers
// see either the old or the new file set and never a partial file.
#ifndef OBLIVIOFUZZ_SHARED_DIR_H_
#define OBLIVIOFUZZ_SHARED_DIR_H_

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "obliviofuzz/coverage.h"
#include "obliviofuzz/crypto.h"
#include "obliviofuzz/mutation.h"

namespace obliviofuzz {

class SharedDir {
 public:
  explicit SharedDir(std::filesystem::path root) : root_(std::move(root)) {}

  // Creates the three subdirectories if missing.
  absl::Status Init() const;

  // Digests of canonically named seeds, ascending.
  absl::StatusOr<std::vector<Digest>> ListSeeds() const;
  // Every regular seed file, canonical or not (initial user seeds may carry
  // arbitrary names). Sorted by file name.
  absl::StatusOr<std::vector<Bytes>> ReadAllSeedFiles() const;
  absl::StatusOr<Bytes> ReadSeed(const Digest& digest) const;
  // Returns false without writing if the seed already exists.
  absl::StatusOr<bool> WriteSeed(const Digest& digest,
                                 std::span<const uint8_t> input) const;
  absl::Status DeleteSeed(const Digest& digest) const;

  absl::Status WriteCoverage(std::string_view node_id,
                             const ClassMap& map) const;
  // (node id, map) for every .cov file, sorted by node id.
  absl::StatusOr<std::vector<std::pair<std::string, ClassMap>>>
  ReadCoverages() const;

  absl::Status WriteStats(std::string_view node_id,
                          std::string_view csv) const;

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path corpus_dir() const { return root_ / "corpus"; }
  std::filesystem::path coverage_dir() const { return root_ / "coverage"; }
  std::filesystem::path stats_dir() const { return root_ / "stats"; }
  std::filesystem::path SeedPath(const Digest& digest) const;

 private:
  std::filesystem::path root_;
};

absl::StatusOr<Bytes> ReadFileBytes(const std::filesystem::path& path);
absl::Status WriteFileAtomic(const std::filesystem::path& path,
                             std::span<const uint8_t> data);

}  // namespace obliviofuzz

#endif  // OBLIVIOFUZZ_SHARED_DIR_H_

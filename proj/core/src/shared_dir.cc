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

#include "obliviofuzz/shared_dir.h"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iterator>
#include <system_error>
#include <thread>

#include "absl/strings/str_cat.h"

namespace obliviofuzz {
namespace fs = std::filesystem;
namespace {

constexpr std::string_view kSeedExt = ".seed";
constexpr std::string_view kCovExt = ".cov";
constexpr std::string_view kTmpMarker = ".tmp.";

bool IsTemp(const fs::path& p) {
  return p.filename().string().find(kTmpMarker) != std::string::npos;
}

absl::Status IoError(std::string_view what, const fs::path& p,
                     const std::error_code& ec) {
  return absl::UnavailableError(
      absl::StrCat(std::string(what), " ", p.string(), ": ", ec.message()));
}

}  // namespace

absl::StatusOr<Bytes> ReadFileBytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::UnavailableError(absl::StrCat("cannot read ", path.string()));
  Bytes data((std::istreambuf_iterator<char>(in)),
             std::istreambuf_iterator<char>());
  if (in.bad()) {
    return absl::UnavailableError(absl::StrCat("read error on ", path.string()));
  }
  return data;
}

absl::Status WriteFileAtomic(const fs::path& path,
                             std::span<const uint8_t> data) {
  static std::atomic<uint64_t> counter{0};
  const fs::path tmp = fs::path(path).concat(absl::StrCat(
      std::string(kTmpMarker), std::hash<std::thread::id>{}(std::this_thread::get_id()),
      ".", counter.fetch_add(1)));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      return absl::UnavailableError(absl::StrCat("cannot write ", tmp.string()));
    }
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
    if (!out) {
      return absl::UnavailableError(absl::StrCat("write error on ", tmp.string()));
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    return IoError("cannot rename into", path, ec);
  }
  return absl::OkStatus();
}

absl::Status SharedDir::Init() const {
  for (const fs::path& d : {corpus_dir(), coverage_dir(), stats_dir()}) {
    std::error_code ec;
    fs::create_directories(d, ec);
    if (ec || !fs::is_directory(d)) return IoError("cannot create", d, ec);
  }
  return absl::OkStatus();
}

fs::path SharedDir::SeedPath(const Digest& digest) const {
  return corpus_dir() / absl::StrCat(ToHex(digest), std::string(kSeedExt));
}

absl::StatusOr<std::vector<Digest>> SharedDir::ListSeeds() const {
  std::error_code ec;
  fs::directory_iterator it(corpus_dir(), ec);
  if (ec) return IoError("cannot list", corpus_dir(), ec);
  std::vector<Digest> out;
  for (const fs::directory_entry& e : it) {
    if (!e.is_regular_file() || IsTemp(e.path())) continue;
    const std::string name = e.path().filename().string();
    if (name.size() != 2 * kDigestSize + kSeedExt.size() ||
        !name.ends_with(kSeedExt)) {
      continue;
    }
    std::optional<std::vector<uint8_t>> raw =
        FromHex(std::string_view(name).substr(0, 2 * kDigestSize));
    if (!raw) continue;
    Digest d;
    std::copy(raw->begin(), raw->end(), d.begin());
    out.push_back(d);
  }
  std::sort(out.begin(), out.end());
  return out;
}

absl::StatusOr<std::vector<Bytes>> SharedDir::ReadAllSeedFiles() const {
  std::error_code ec;
  fs::directory_iterator it(corpus_dir(), ec);
  if (ec) return IoError("cannot list", corpus_dir(), ec);
  std::vector<fs::path> paths;
  for (const fs::directory_entry& e : it) {
    if (e.is_regular_file() && !IsTemp(e.path())) paths.push_back(e.path());
  }
  std::sort(paths.begin(), paths.end());
  std::vector<Bytes> out;
  for (const fs::path& p : paths) {
    absl::StatusOr<Bytes> data = ReadFileBytes(p);
    if (!data.ok()) return data.status();
    out.push_back(*std::move(data));
  }
  return out;
}

absl::StatusOr<Bytes> SharedDir::ReadSeed(const Digest& digest) const {
  return ReadFileBytes(SeedPath(digest));
}

absl::StatusOr<bool> SharedDir::WriteSeed(const Digest& digest,
                                          std::span<const uint8_t> input) const {
  const fs::path path = SeedPath(digest);
  std::error_code ec;
  if (fs::exists(path, ec)) return false;
  if (absl::Status s = WriteFileAtomic(path, input); !s.ok()) return s;
  return true;
}

absl::Status SharedDir::DeleteSeed(const Digest& digest) const {
  std::error_code ec;
  fs::remove(SeedPath(digest), ec);
  if (ec) return IoError("cannot delete", SeedPath(digest), ec);
  return absl::OkStatus();
}

absl::Status SharedDir::WriteCoverage(std::string_view node_id,
                                      const ClassMap& map) const {
  const std::vector<uint8_t> bytes = map.Serialize();
  return WriteFileAtomic(coverage_dir() / absl::StrCat(std::string(node_id), std::string(kCovExt)), bytes);
}

absl::StatusOr<std::vector<std::pair<std::string, ClassMap>>>
SharedDir::ReadCoverages() const {
  std::error_code ec;
  fs::directory_iterator it(coverage_dir(), ec);
  if (ec) return IoError("cannot list", coverage_dir(), ec);
  std::vector<std::pair<std::string, ClassMap>> out;
  for (const fs::directory_entry& e : it) {
    if (!e.is_regular_file() || IsTemp(e.path()) ||
        e.path().extension() != kCovExt) {
      continue;
    }
    absl::StatusOr<Bytes> data = ReadFileBytes(e.path());
    if (!data.ok()) return data.status();
    absl::StatusOr<ClassMap> map = ClassMap::Deserialize(*data);
    if (!map.ok()) {
      return absl::DataLossError(absl::StrCat(e.path().string(), ": ",
                                              map.status().message()));
    }
    out.emplace_back(e.path().stem().string(), *map);
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

absl::Status SharedDir::WriteStats(std::string_view node_id,
                                   std::string_view csv) const {
  return WriteFileAtomic(stats_dir() / absl::StrCat(std::string(node_id), ".csv"),
                         AsBytes(csv));
}

}  // namespace obliviofuzz

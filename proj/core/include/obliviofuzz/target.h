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

// libFuzzer-style fuzz targets. A target is a pure function from an input to
// an ExecOutcome: the edges it traversed, an abstract cost, and whether one of
// its injected bugs fired. Crashes are values here; the enclave layer turns
// them into observable crash exits.
#ifndef OBLIVIOFUZZ_TARGET_H_
#define OBLIVIOFUZZ_TARGET_H_

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "obliviofuzz/coverage.h"
#include "obliviofuzz/mutation.h"

namespace obliviofuzz {

struct ExecOutcome {
  enum class Status : uint8_t { kOk, kCrash };

  Status status = Status::kOk;
  int bug_id = -1;  // >= 0 iff status == kCrash
  std::vector<Edge> edges;
  uint32_t cost_units = 1;

  bool crashed() const { return status == Status::kCrash; }
  bool operator==(const ExecOutcome&) const = default;
};

class FuzzTarget {
 public:
  virtual ~FuzzTarget() = default;

  virtual std::string_view name() const = 0;
  // Number of distinct code sites the target can emit.
  virtual size_t site_count() const = 0;
  // Must be a pure function of `input`.
  virtual ExecOutcome Execute(std::span<const uint8_t> input) const = 0;
};

// Byte-by-byte comparison against an 8-byte secret. Every matched prefix
// byte adds one edge after the entry edge; a full match is Crash(0).
class ToyTarget final : public FuzzTarget {
 public:
  static constexpr std::array<uint8_t, 8> kSecret = {'0', 'b', 'l', '1',
                                                     'v', '!', '0', 'u'};
  std::string_view name() const override { return "toy"; }
  size_t site_count() const override { return kSecret.size() + 1; }
  ExecOutcome Execute(std::span<const uint8_t> input) const override;
};

// Recursive-descent evaluator over digits, + - * / and parentheses:
//   expr   := term (('+' | '-') term)*
//   term   := factor (('*' | '/') factor)*
//   factor := number | '(' expr ')'
// Division by zero is Crash(1); nesting deeper than 64 is Crash(2). Malformed
// input ends evaluation with Ok.
class ExprTarget final : public FuzzTarget {
 public:
  static constexpr int kMaxDepth = 64;
  static constexpr int kDivByZeroBug = 1;
  static constexpr int kNestingBug = 2;

  std::string_view name() const override { return "expr"; }
  size_t site_count() const override;
  ExecOutcome Execute(std::span<const uint8_t> input) const override;
};

struct BugTrigger {
  Bytes token;  // 3..6 bytes; must appear somewhere in the input
  int depth;    // guard bytes that must prefix the input first
  int tier;     // 0..3, see BugMatrixTarget
  bool magic() const { return tier == 3; }
};

// `n_bugs` injected bugs. Bug i needs the first i/8 bytes of a guard string
// at the start of the input (each matched guard byte is an edge), and then
// its token anywhere in the input. The lowest-index fully present, unlocked
// token fires.
//
// Difficulty comes in four tiers by index. Tier 0 tokens are all boundary
// bytes (0x00, 0x01, 0x7f, 0x80, 0xff), which the mutator produces often.
// Tiers 1 and 2 end in one or two near-boundary bytes, a single bit away
// from a boundary value. Tiers 0-2 report each matched prefix byte as an
// edge, so coverage guidance can walk to them. Tier 3 tokens are arbitrary
// "magic" words with no partial feedback: reachable, but not in a short
// campaign.
class BugMatrixTarget final : public FuzzTarget {
 public:
  static constexpr int kBugsPerDepth = 8;
  static constexpr uint32_t kBaseCost = 32;

  BugMatrixTarget(int n_bugs, uint64_t seed);

  std::string_view name() const override { return "bugmatrix"; }
  size_t site_count() const override;
  ExecOutcome Execute(std::span<const uint8_t> input) const override;

  int bug_count() const { return static_cast<int>(triggers_.size()); }
  const std::vector<BugTrigger>& triggers() const { return triggers_; }
  const Bytes& guard() const { return guard_; }
  // Shortest input that fires exactly bug `i`.
  Bytes TriggerInput(int i) const;

 private:
  // Prefix tree over the tokens of tiers 0-2. Every node is a code site;
  // matching a token prefix visits its path.
  struct Node {
    SiteId site = 0;
    int parent = -1;
    int min_depth = 0;  // shallowest token passing through this node
    int bug = -1;       // token ending here
  };

  int Child(int node, uint8_t byte) const {
    return next_[static_cast<size_t>(node) * 256 + byte];
  }
  void Insert(int bug);
  void Erase(int bug);
  // Walks the input; marks visited trie nodes in `visited` (if given) and
  // returns the lowest firing bug or -1.
  int Scan(std::span<const uint8_t> input, size_t unlocked,
           std::vector<int>* visited) const;

  uint64_t site_ns_;
  Bytes guard_;
  std::vector<BugTrigger> triggers_;
  std::vector<Node> nodes_;
  std::vector<int16_t> next_;  // nodes_.size() x 256 child table, -1 = none
  std::array<std::vector<int>, 256> magic_by_first_byte_;
  SiteId entry_site_;
  std::vector<SiteId> guard_sites_;
};

inline constexpr int kDefaultBugCount = 50;
inline constexpr uint64_t kDefaultBugMatrixSeed = 0x5eed0b1;

// Builds a built-in target by CLI name: toy | expr | bugmatrix.
absl::StatusOr<std::unique_ptr<FuzzTarget>> MakeTarget(
    std::string_view name, int n_bugs = kDefaultBugCount,
    uint64_t seed = kDefaultBugMatrixSeed);

}  // namespace obliviofuzz

#endif  // OBLIVIOFUZZ_TARGET_H_

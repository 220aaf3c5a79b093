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

#include "obliviofuzz/target.h"

#include <algorithm>
#include <cstring>
#include <set>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "obliviofuzz/prng.h"

namespace obliviofuzz {
namespace {

// Scatters a (namespace, index) pair over the 16-bit site space, the way
// compile-time instrumentation assigns random ids to blocks.
SiteId SiteFor(uint64_t ns, uint64_t index) {
  return static_cast<SiteId>(Prng::Mix(ns * 0x100000001b3ULL + index) &
                             0xffff);
}

constexpr uint64_t kToyNs = 0x7011;
constexpr uint64_t kExprNs = 0xe4a9;

}  // namespace

ExecOutcome ToyTarget::Execute(std::span<const uint8_t> input) const {
  ExecOutcome out;
  out.cost_units = 1 + static_cast<uint32_t>(input.size() / 256);
  SiteId prev = SiteFor(kToyNs, 0);
  out.edges.push_back({0, prev});
  size_t k = 0;
  for (; k < kSecret.size() && k < input.size(); ++k) {
    if (input[k] != kSecret[k]) break;
    const SiteId cur = SiteFor(kToyNs, k + 1);
    out.edges.push_back({prev, cur});
    prev = cur;
  }
  if (k == kSecret.size()) {
    out.status = ExecOutcome::Status::kCrash;
    out.bug_id = 0;
  }
  return out;
}

namespace {

enum ExprSite : uint64_t {
  kEntry,
  kExpr,
  kTerm,
  kFactor,
  kNumber,
  kOpen,
  kClose,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kSyntaxError,
  kDivZero,
  kTooDeep,
  kExprSiteCount,
};

struct ExprFault {
  int bug_id;
};

class ExprEvaluator {
 public:
  ExprEvaluator(std::span<const uint8_t> in, ExecOutcome& out)
      : in_(in), out_(out) {}

  // Returns false on a syntax error. Throws ExprFault on an injected bug.
  bool Run() {
    Visit(kEntry);
    uint64_t v = 0;
    return Expr(v);
  }

 private:
  void Visit(ExprSite site) {
    const SiteId cur = SiteFor(kExprNs, site);
    out_.edges.push_back({prev_, cur});
    prev_ = cur;
  }
  int Peek() const { return pos_ < in_.size() ? in_[pos_] : -1; }

  bool Expr(uint64_t& value) {
    Visit(kExpr);
    if (!Term(value)) return false;
    for (;;) {
      const int c = Peek();
      if (c != '+' && c != '-') return true;
      ++pos_;
      Visit(c == '+' ? kAdd : kSub);
      uint64_t rhs = 0;
      if (!Term(rhs)) return false;
      value = c == '+' ? value + rhs : value - rhs;
    }
  }

  bool Term(uint64_t& value) {
    Visit(kTerm);
    if (!Factor(value)) return false;
    for (;;) {
      const int c = Peek();
      if (c != '*' && c != '/') return true;
      ++pos_;
      Visit(c == '*' ? kMul : kDiv);
      uint64_t rhs = 0;
      if (!Factor(rhs)) return false;
      if (c == '*') {
        value *= rhs;
        continue;
      }
      if (rhs == 0) {
        Visit(kDivZero);
        throw ExprFault{ExprTarget::kDivByZeroBug};
      }
      const auto a = static_cast<int64_t>(value);
      const auto b = static_cast<int64_t>(rhs);
      value = (a == INT64_MIN && b == -1) ? value
                                          : static_cast<uint64_t>(a / b);
    }
  }

  bool Factor(uint64_t& value) {
    Visit(kFactor);
    const int c = Peek();
    if (c == '(') {
      ++pos_;
      if (++depth_ > ExprTarget::kMaxDepth) {
        Visit(kTooDeep);
        throw ExprFault{ExprTarget::kNestingBug};
      }
      Visit(kOpen);
      if (!Expr(value)) return false;
      if (Peek() != ')') {
        Visit(kSyntaxError);
        return false;
      }
      ++pos_;
      --depth_;
      Visit(kClose);
      return true;
    }
    if (c >= '0' && c <= '9') {
      Visit(kNumber);
      value = 0;
      while (Peek() >= '0' && Peek() <= '9') {
        value = value * 10 + static_cast<uint64_t>(Peek() - '0');
        ++pos_;
      }
      return true;
    }
    Visit(kSyntaxError);
    return false;
  }

  std::span<const uint8_t> in_;
  ExecOutcome& out_;
  size_t pos_ = 0;
  int depth_ = 0;
  SiteId prev_ = 0;
};

}  // namespace

size_t ExprTarget::site_count() const { return kExprSiteCount; }

ExecOutcome ExprTarget::Execute(std::span<const uint8_t> input) const {
  ExecOutcome out;
  out.cost_units = 1 + static_cast<uint32_t>(input.size() / 64);
  ExprEvaluator eval(input, out);
  try {
    eval.Run();
  } catch (const ExprFault& fault) {
    out.status = ExecOutcome::Status::kCrash;
    out.bug_id = fault.bug_id;
  }
  return out;
}

BugMatrixTarget::BugMatrixTarget(int n_bugs, uint64_t seed) {
  n_bugs = std::max(n_bugs, 1);
  Prng rng(seed);
  // Boundary bytes are what the InterestingValue and ByteFlip mutations
  // produce most often, so tokens built from them are cheap to reach.
  static constexpr uint8_t kBoundary[] = {0x00, 0x01, 0x7f, 0x80, 0xff};
  auto boundary_byte = [&rng] {
    return kBoundary[rng.Below(std::size(kBoundary))];
  };
  auto near_boundary_byte = [&] {
    for (;;) {
      const auto b = static_cast<uint8_t>(boundary_byte() ^ (1u << rng.Below(8)));
      if (std::find(std::begin(kBoundary), std::end(kBoundary), b) ==
          std::end(kBoundary)) {
        return b;
      }
    }
  };
  const int max_depth = (n_bugs - 1) / kBugsPerDepth;
  guard_.resize(static_cast<size_t>(max_depth));
  for (uint8_t& b : guard_) b = boundary_byte();

  site_ns_ = Prng::Mix(seed ^ 0xb06b06ULL);
  entry_site_ = SiteFor(site_ns_, 0);
  for (int k = 1; k <= max_depth; ++k) {
    guard_sites_.push_back(SiteFor(site_ns_, static_cast<uint64_t>(k)));
  }
  nodes_.emplace_back();  // root
  nodes_[0].site = entry_site_;
  next_.assign(256, -1);

  std::set<Bytes> seen;
  for (int i = 0; i < n_bugs; ++i) {
    BugTrigger trig;
    trig.depth = i / kBugsPerDepth;
    trig.tier = 4 * i / n_bugs;
    const size_t len = 3 + static_cast<size_t>(4 * i / n_bugs);
    const size_t near = static_cast<size_t>(trig.tier);
    // Redraw until the token is new and its canonical trigger input fires
    // this bug and no lower-index one.
    for (;;) {
      trig.token.assign(len, 0);
      for (size_t k = 0; k < len; ++k) {
        if (trig.magic()) {
          trig.token[k] = rng.Byte();
        } else {
          trig.token[k] = k + near >= len ? near_boundary_byte() : boundary_byte();
        }
      }
      if (seen.contains(trig.token)) continue;
      // A token inside the guard would fire for every deep input.
      if (std::search(guard_.begin(), guard_.end(), trig.token.begin(),
                      trig.token.end()) != guard_.end()) {
        continue;
      }
      triggers_.push_back(trig);
      Insert(i);
      if (Scan(TriggerInput(i), guard_.size(), nullptr) == i) break;
      Erase(i);
      triggers_.pop_back();
    }
    seen.insert(trig.token);
  }
}

void BugMatrixTarget::Insert(int bug) {
  const BugTrigger& t = triggers_[static_cast<size_t>(bug)];
  if (t.magic()) {
    magic_by_first_byte_[t.token[0]].push_back(bug);
    return;
  }
  int node = 0;
  for (uint8_t byte : t.token) {
    int child = Child(node, byte);
    if (child < 0) {
      child = static_cast<int>(nodes_.size());
      Node n;
      n.site = SiteFor(site_ns_, 0x1000 + nodes_.size());
      n.parent = node;
      n.min_depth = t.depth;
      nodes_.push_back(n);
      next_.resize(nodes_.size() * 256, -1);
      next_[static_cast<size_t>(node) * 256 + byte] = static_cast<int16_t>(child);
    }
    Node& c = nodes_[static_cast<size_t>(child)];
    c.min_depth = std::min(c.min_depth, t.depth);
    node = child;
  }
  nodes_[static_cast<size_t>(node)].bug = bug;
}

void BugMatrixTarget::Erase(int bug) {
  // Only ever called on the most recently inserted token, so any nodes it
  // created sit at the end of nodes_. min_depth only matters as a lower
  // bound and the rejected token shares depth with its successor, so it is
  // left as is.
  const BugTrigger& t = triggers_[static_cast<size_t>(bug)];
  if (t.magic()) {
    magic_by_first_byte_[t.token[0]].pop_back();
    return;
  }
  int node = 0;
  std::vector<int> path;
  for (uint8_t byte : t.token) {
    node = Child(node, byte);
    path.push_back(node);
  }
  nodes_[static_cast<size_t>(node)].bug = -1;
  for (auto it = path.rbegin(); it != path.rend(); ++it) {
    const int n = *it;
    if (n != static_cast<int>(nodes_.size()) - 1 || nodes_.back().bug >= 0) {
      break;
    }
    const size_t row = static_cast<size_t>(n) * 256;
    if (std::any_of(next_.begin() + static_cast<std::ptrdiff_t>(row),
                    next_.end(), [](int16_t c) { return c >= 0; })) {
      break;
    }
    for (int16_t& c : next_) {
      if (c == n) c = -1;
    }
    nodes_.pop_back();
    next_.resize(nodes_.size() * 256);
  }
}

size_t BugMatrixTarget::site_count() const {
  return nodes_.size() + guard_sites_.size() + triggers_.size();
}

Bytes BugMatrixTarget::TriggerInput(int i) const {
  const BugTrigger& t = triggers_[static_cast<size_t>(i)];
  Bytes in(guard_.begin(), guard_.begin() + t.depth);
  in.insert(in.end(), t.token.begin(), t.token.end());
  return in;
}

namespace {

size_t GuardMatch(std::span<const uint8_t> input, const Bytes& guard) {
  size_t m = 0;
  while (m < guard.size() && m < input.size() && input[m] == guard[m]) ++m;
  return m;
}

}  // namespace

int BugMatrixTarget::Scan(std::span<const uint8_t> input, size_t unlocked,
                          std::vector<int>* visited) const {
  const int depth_cap = static_cast<int>(unlocked);
  int fired = -1;
  auto fire = [&fired](int bug) {
    if (fired < 0 || bug < fired) fired = bug;
  };
  for (size_t p = 0; p < input.size(); ++p) {
    int node = 0;
    for (size_t q = p; q < input.size(); ++q) {
      node = Child(node, input[q]);
      if (node < 0) break;
      const Node& n = nodes_[static_cast<size_t>(node)];
      if (n.min_depth > depth_cap) break;
      if (visited) visited->push_back(node);
      if (n.bug >= 0 && triggers_[static_cast<size_t>(n.bug)].depth <= depth_cap) {
        fire(n.bug);
      }
    }
    for (int i : magic_by_first_byte_[input[p]]) {
      const BugTrigger& t = triggers_[static_cast<size_t>(i)];
      if (t.depth > depth_cap || input.size() - p < t.token.size()) continue;
      if (std::memcmp(input.data() + p, t.token.data(), t.token.size()) == 0) {
        fire(i);
      }
    }
  }
  return fired;
}

ExecOutcome BugMatrixTarget::Execute(std::span<const uint8_t> input) const {
  ExecOutcome out;
  out.cost_units = kBaseCost + static_cast<uint32_t>(input.size());
  const size_t unlocked = GuardMatch(input, guard_);
  out.edges.reserve(1 + unlocked + 32);
  out.edges.push_back({0, entry_site_});

  SiteId prev = entry_site_;
  for (size_t k = 0; k < unlocked; ++k) {
    out.edges.push_back({prev, guard_sites_[k]});
    prev = guard_sites_[k];
  }

  // Scratch is per thread so Execute stays reentrant. Nodes are stamped
  // with a per-call generation to emit each edge once.
  thread_local std::vector<int> visited;
  thread_local std::vector<uint32_t> stamp;
  thread_local uint32_t generation = 0;
  visited.clear();
  const int fired = Scan(input, unlocked, &visited);
  if (stamp.size() < nodes_.size()) stamp.resize(nodes_.size(), 0);
  if (++generation == 0) {
    std::fill(stamp.begin(), stamp.end(), 0);
    generation = 1;
  }
  for (int node : visited) {
    uint32_t& seen = stamp[static_cast<size_t>(node)];
    if (seen == generation) continue;
    seen = generation;
    const Node& n = nodes_[static_cast<size_t>(node)];
    out.edges.push_back({nodes_[static_cast<size_t>(n.parent)].site, n.site});
  }
  if (fired >= 0) {
    if (triggers_[static_cast<size_t>(fired)].magic()) {
      out.edges.push_back(
          {prev, SiteFor(site_ns_, 0x8000 + static_cast<uint64_t>(fired))});
    }
    out.status = ExecOutcome::Status::kCrash;
    out.bug_id = fired;
  }
  return out;
}

absl::StatusOr<std::unique_ptr<FuzzTarget>> MakeTarget(std::string_view name,
                                                       int n_bugs,
                                                       uint64_t seed) {
  if (name == "toy") return std::make_unique<ToyTarget>();
  if (name == "expr") return std::make_unique<ExprTarget>();
  if (name == "bugmatrix") {
    if (n_bugs < 1) return absl::InvalidArgumentError("n_bugs must be >= 1");
    return std::make_unique<BugMatrixTarget>(n_bugs, seed);
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown target '", std::string(name), "' (want toy|expr|bugmatrix)"));
}

}  // namespace obliviofuzz

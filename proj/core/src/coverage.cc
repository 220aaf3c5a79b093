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

#include "obliviofuzz/coverage.h"

#include <algorithm>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace obliviofuzz {

ClassMap ClassMap::Classify(const CoverageMap& map) {
  ClassMap out;
  for (uint16_t i : map.touched()) out.classes_[i] = Bucketize(map.count(i));
  return out;
}

ClassMap ClassMap::FromSignature(std::span<const ClassSlot> signature) {
  ClassMap out;
  out.MergeFrom(signature);
  return out;
}

absl::StatusOr<ClassMap> ClassMap::Deserialize(std::span<const uint8_t> bytes) {
  if (bytes.size() != kMapSize) {
    return absl::InvalidArgumentError(
        absl::StrCat("class map must be ", kMapSize, " bytes, got ",
                     bytes.size()));
  }
  ClassMap out;
  for (size_t i = 0; i < kMapSize; ++i) {
    if (bytes[i] > kMaxClass) {
      return absl::InvalidArgumentError(
          absl::StrCat("class code ", bytes[i], " at slot ", i,
                       " is out of range"));
    }
    out.classes_[i] = bytes[i];
  }
  return out;
}

size_t ClassMap::MergeFrom(const ClassMap& other) {
  size_t raised = 0;
  for (size_t i = 0; i < kMapSize; ++i) {
    if (other.classes_[i] > classes_[i]) {
      classes_[i] = other.classes_[i];
      ++raised;
    }
  }
  return raised;
}

size_t ClassMap::MergeFrom(std::span<const ClassSlot> signature) {
  size_t raised = 0;
  for (const ClassSlot& s : signature) {
    if (s.klass > classes_[s.index]) {
      classes_[s.index] = s.klass;
      ++raised;
    }
  }
  return raised;
}

std::vector<ClassSlot> ClassMap::Signature() const {
  std::vector<ClassSlot> out;
  for (size_t i = 0; i < kMapSize; ++i) {
    if (classes_[i] != 0) {
      out.push_back({static_cast<uint16_t>(i), classes_[i]});
    }
  }
  return out;
}

size_t ClassMap::NonZeroCount() const {
  return static_cast<size_t>(
      std::count_if(classes_.begin(), classes_.end(),
                    [](uint8_t c) { return c != 0; }));
}

bool ClassMap::Dominates(const ClassMap& other) const {
  for (size_t i = 0; i < kMapSize; ++i) {
    if (other.classes_[i] > classes_[i]) return false;
  }
  return true;
}

Novelty ComputeNovelty(const ClassMap& global, const CoverageMap& run) {
  Novelty out;
  // Untouched slots have class 0 and can never beat the global map.
  for (uint16_t i : run.touched()) {
    if (Bucketize(run.count(i)) > global.klass(i)) ++out.new_slot_count;
  }
  out.is_new = out.new_slot_count > 0;
  return out;
}

ClassMap MergeClass(const ClassMap& a, const ClassMap& b) {
  ClassMap out = a;
  out.MergeFrom(b);
  return out;
}

}  // namespace obliviofuzz

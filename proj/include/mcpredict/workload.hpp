// Copyright 2026 The mcpredict Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MCPREDICT_WORKLOAD_HPP_
#define MCPREDICT_WORKLOAD_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "mcpredict/trace.hpp"

namespace mcpredict {

// Synthetic trace description. The JSON layout accepted by
// ParseWorkloadSpec is documented in docs/formats.md.

enum class AddressPattern { kSequential, kStrided, kRandom };

struct BlockPlanEntry {
  BasicBlockId block;
  std::uint64_t repetitions = 1;
  std::uint64_t accesses_per_instance = 0;
};

// Private (non-shared) address stream. Sequential and strided both advance a
// cursor by `stride` bytes; they differ only in the default stride. When
// `footprint` is non-zero the cursor wraps within [base, base + footprint).
// Random draws `align`-aligned addresses uniformly from the footprint.
struct AddressSpec {
  AddressPattern pattern = AddressPattern::kSequential;
  std::uint64_t base = 0;
  std::uint64_t stride = 8;
  std::uint64_t footprint = 0;
  std::uint64_t align = 8;
};

// A shared-variable block emitted after every instance of `after`. Its
// addresses come from a pool of `pool_size` slots `stride` bytes apart,
// walked cyclically or, if `random`, sampled uniformly.
struct SharedPlanEntry {
  BasicBlockId block;
  BasicBlockId after;
  std::uint64_t accesses_per_instance = 1;
  std::uint64_t base = 0;
  std::uint64_t pool_size = 1;
  std::uint64_t stride = 8;
  bool random = false;
};

struct WorkloadSpec {
  std::vector<BlockPlanEntry> blocks;
  AddressSpec addresses;
  std::vector<SharedPlanEntry> shared;
};

// Pure function of (spec, seed). Throws InvalidArgument for an empty plan,
// zero repetitions, or an unusable address spec.
MemoryTrace GenerateSyntheticTrace(const WorkloadSpec& spec,
                                   std::uint64_t seed);

WorkloadSpec ParseWorkloadSpec(std::string_view json_text);
WorkloadSpec LoadWorkloadSpec(const std::filesystem::path& path);

// Random block plan used by property tests and benchmarks: `num_blocks`
// loop-like blocks with random repetition counts in [1, max_repetitions],
// random addresses over `num_addresses` 8-byte slots, and optionally one
// shared block attached to the first plan entry.
WorkloadSpec RandomWorkloadSpec(std::uint64_t seed, std::size_t num_blocks,
                                std::uint64_t max_repetitions,
                                std::uint64_t max_accesses,
                                std::uint64_t num_addresses,
                                bool with_shared);

}  // namespace mcpredict

#endif  // MCPREDICT_WORKLOAD_HPP_

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

#ifndef MCPREDICT_CACHE_HPP_
#define MCPREDICT_CACHE_HPP_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mcpredict/reuse.hpp"
#include "mcpredict/trace.hpp"

namespace mcpredict {

struct MachineConfig;

enum class Sharing { kPrivate, kShared };

// Geometry of one cache level. An associativity of kFullyAssociative means
// a single set holding every block.
struct CacheLevelConfig {
  static constexpr std::uint64_t kFullyAssociative = 0;

  std::string name;
  std::uint64_t capacity = 0;   // bytes
  std::uint64_t line_size = 0;  // bytes
  std::uint64_t associativity = kFullyAssociative;
  Sharing sharing = Sharing::kPrivate;

  bool fully_associative() const {
    return associativity == kFullyAssociative || associativity == blocks();
  }
  std::uint64_t blocks() const { return capacity / line_size; }  // B
  std::uint64_t ways() const {                                  // A
    return associativity == kFullyAssociative ? blocks() : associativity;
  }
  std::uint64_t sets() const { return blocks() / ways(); }

  // Throws InvalidArgument when the geometry is inconsistent.
  void Validate() const;
};

// Hit probability of a reference with reuse distance D in an A-way cache of
// B blocks, assuming random placement of blocks into sets:
//   P(h|D) = sum_{a=0}^{A-1} C(D,a) (A/B)^a ((B-A)/B)^(D-a).
// Infinite distances never hit.
double CondHitAssoc(ReuseDistance d, std::uint64_t ways, std::uint64_t blocks);

// Direct-mapped special case: ((B-1)/B)^D.
double CondHitDirect(ReuseDistance d, std::uint64_t blocks);

// Expected hit rate sum_D P(D) P(h|D). The profile must have been measured
// at cfg.line_size.
double HitRate(const ReuseProfile& profile, const CacheLevelConfig& cfg);

struct SimulationResult {
  std::uint64_t hits = 0;
  std::uint64_t accesses = 0;

  double hit_rate() const {
    return accesses == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(accesses);
  }
};

// Exact set-associative LRU simulation from a cold cache; set index is
// line mod sets. Byte addresses are mapped to lines internally.
SimulationResult SimulateLruCounts(const MemoryTrace& trace, const CacheLevelConfig& cfg);
double SimulateLru(const MemoryTrace& trace, const CacheLevelConfig& cfg);

// Per-level hit rates of a three-level hierarchy. `per_level` holds the mean
// over cores for private levels and the interleaved-trace value for the
// shared level; `per_core_private` keeps every core's private-level value.
struct HitRateReport {
  std::vector<std::string> level_names;
  std::map<std::string, double> per_level;
  std::map<std::pair<std::uint32_t, std::string>, double> per_core_private;
  std::uint32_t num_cores = 0;

  // Throws InvalidArgument if the level is missing.
  double level(std::string_view name) const;
};

// Reuse profiles feeding a HitRateReport: private[core][level] for the two
// private levels and one profile of the interleaved trace for the shared
// level.
struct HierarchyProfiles {
  std::vector<std::vector<ReuseProfile>> private_levels;
  ReuseProfile shared_level;
};

HierarchyProfiles ComputeHierarchyProfiles(std::span<const MemoryTrace> privates,
                                           const MemoryTrace& shared,
                                           const MachineConfig& machine);

HitRateReport HitRatesFromProfiles(const HierarchyProfiles& profiles,
                                   const MachineConfig& machine);

// Private levels from each core's trace, shared level from the interleaved
// trace. No filtering between levels: each level sees the full stream.
HitRateReport PredictHierarchy(std::span<const MemoryTrace> privates,
                               const MemoryTrace& shared,
                               const MachineConfig& machine);

// CSV with header "level,core,hit_rate"; core is an index, "mean" or
// "shared".
void WriteHitRateCsv(std::ostream& out, const HitRateReport& report);

}  // namespace mcpredict

#endif  // MCPREDICT_CACHE_HPP_

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

#ifndef MCPREDICT_MIMIC_HPP_
#define MCPREDICT_MIMIC_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mcpredict/trace.hpp"

namespace mcpredict {

// Number of simulated cores; always >= 1.
class CoreCount {
 public:
  explicit CoreCount(std::uint32_t n);
  std::uint32_t value() const { return n_; }

 private:
  std::uint32_t n_;
};

// Byte distance between the address spaces of consecutive cores. Core k's
// private addresses are shifted by k * offset.
struct OffsetScheme {
  std::uint64_t offset = 0;
};

// Smallest power of two >= (max_addr - min_addr + max_line_size). Throws
// InvalidArgument if the trace has no accesses or the line size is not a
// power of two.
OffsetScheme ComputeOffset(const MemoryTrace& trace, std::uint64_t max_line_size);

struct PrivateTraceOptions {
  // Instances per chunk for blocks that are split across cores. Unset means
  // one contiguous chunk of ceil(count / cores) instances per core; a value
  // deals chunks to cores round-robin like schedule(static, chunk).
  std::optional<std::uint64_t> chunk;
};

// Splits a sequential trace into one trace per core. Blocks that ran fewer
// times than there are cores are replicated onto every core; other blocks
// have their instances distributed. Non-shared addresses on core k are
// shifted by k * scheme.offset.
std::vector<MemoryTrace> GenPrivateTraces(const MemoryTrace& trace,
                                          CoreCount num_cores,
                                          const SharedRefSet& shared,
                                          const BlockStats& stats,
                                          const OffsetScheme& scheme,
                                          const PrivateTraceOptions& options = {});

// Core that instance `instance` (0-based) of a block executed `count` times
// is assigned to. Only meaningful when count >= num_cores.
std::uint32_t OwnerCore(std::uint64_t instance, std::uint64_t count,
                        std::uint32_t num_cores,
                        std::optional<std::uint64_t> chunk = std::nullopt);

enum class InterleaveKind { kRoundRobin, kUniformRandom };

struct InterleaveStrategy {
  InterleaveKind kind = InterleaveKind::kRoundRobin;
  std::uint64_t seed = 42;

  static InterleaveStrategy RoundRobin() { return {InterleaveKind::kRoundRobin, 0}; }
  static InterleaveStrategy Uniform(std::uint64_t seed) {
    return {InterleaveKind::kUniformRandom, seed};
  }

  // "round-robin" or "uniform".
  std::string Name() const;
};

InterleaveStrategy ParseInterleaveStrategy(std::string_view name,
                                           std::uint64_t seed);

// Merges per-core traces into the stream seen by a shared cache, one event
// per draw. Round-robin cycles through the cores skipping exhausted ones;
// uniform draws a core uniformly at random and skips the draw if that core
// is exhausted. The result keeps every core's relative order, and its block
// markers generally overlap (validate it with Nesting::kInterleaved).
MemoryTrace InterleaveTraces(std::span<const MemoryTrace> privates,
                             const InterleaveStrategy& strategy);

// Like InterleaveTraces, but also returns the source core of every event.
MemoryTrace InterleaveTraces(std::span<const MemoryTrace> privates,
                             const InterleaveStrategy& strategy,
                             std::vector<std::uint32_t>* source_core);

}  // namespace mcpredict

#endif  // MCPREDICT_MIMIC_HPP_

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

#include "mcpredict/mimic.hpp"

#include <algorithm>
#include <bit>
#include <limits>

#include "mcpredict/error.hpp"
#include "mcpredict/random.hpp"

namespace mcpredict {

CoreCount::CoreCount(std::uint32_t n) : n_(n) {
  if (n < 1) throw InvalidArgument("core count must be at least 1");
}

OffsetScheme ComputeOffset(const MemoryTrace& trace, std::uint64_t max_line_size) {
  if (max_line_size == 0 || !std::has_single_bit(max_line_size)) {
    throw InvalidArgument("line size must be a power of two");
  }
  std::uint64_t lo = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t hi = 0;
  bool any = false;
  for (const auto& e : trace.events()) {
    if (!e.is_access()) continue;
    lo = std::min(lo, e.value);
    hi = std::max(hi, e.value);
    any = true;
  }
  if (!any) throw InvalidArgument("cannot compute an offset for a trace without accesses");
  const std::uint64_t need = hi - lo + max_line_size;
  if (need < max_line_size || need > (std::uint64_t{1} << 63)) {
    throw InvalidArgument("address span too large for a per-core offset");
  }
  return OffsetScheme{std::bit_ceil(need)};
}

std::uint32_t OwnerCore(std::uint64_t instance, std::uint64_t count,
                        std::uint32_t num_cores,
                        std::optional<std::uint64_t> chunk) {
  if (chunk) {
    if (*chunk == 0) throw InvalidArgument("chunk size must be positive");
    return static_cast<std::uint32_t>((instance / *chunk) % num_cores);
  }
  const std::uint64_t per_core = (count + num_cores - 1) / num_cores;
  return static_cast<std::uint32_t>(
      std::min<std::uint64_t>(instance / per_core, num_cores - 1));
}

std::vector<MemoryTrace> GenPrivateTraces(const MemoryTrace& trace,
                                          CoreCount num_cores,
                                          const SharedRefSet& shared,
                                          const BlockStats& stats,
                                          const OffsetScheme& scheme,
                                          const PrivateTraceOptions& options) {
  Validate(trace);
  const std::uint32_t n = num_cores.value();
  const auto& table = trace.blocks();

  std::vector<std::uint64_t> counts(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    counts[i] = stats.count(table[i]);
  }

  // Same block table in every output so indices can be copied verbatim.
  std::vector<MemoryTrace> privates(n);
  for (auto& p : privates) {
    for (const auto& bb : table) p.Intern(bb);
    p.Reserve(trace.size() / n + 16);
  }

  const auto shifted = [&](std::uint64_t address, std::uint32_t core) {
    if (core == 0 || shared.contains(address)) return address;
    const std::uint64_t delta = scheme.offset * core;
    if ((scheme.offset != 0 && delta / scheme.offset != core) ||
        address > std::numeric_limits<std::uint64_t>::max() - delta) {
      throw InvalidArgument("offset address overflows 64 bits");
    }
    return address + delta;
  };

  std::vector<std::uint64_t> seen(table.size(), 0);
  bool replicate = false;
  std::uint32_t owner = 0;
  for (const auto& e : trace.events()) {
    if (e.kind == EventKind::kBlockStart) {
      const auto idx = e.value;
      if (counts[idx] == 0 || seen[idx] >= counts[idx]) {
        throw InvalidArgument("block stats do not match the trace for " +
                              table[idx].ToString());
      }
      replicate = counts[idx] < n;
      if (!replicate) owner = OwnerCore(seen[idx], counts[idx], n, options.chunk);
      ++seen[idx];
    }
    if (replicate) {
      for (std::uint32_t core = 0; core < n; ++core) {
        privates[core].Append(
            e.is_access() ? TraceEvent{e.kind, shifted(e.value, core)} : e);
      }
    } else {
      privates[owner].Append(
          e.is_access() ? TraceEvent{e.kind, shifted(e.value, owner)} : e);
    }
  }
  return privates;
}

std::string InterleaveStrategy::Name() const {
  return kind == InterleaveKind::kRoundRobin ? "round-robin" : "uniform";
}

InterleaveStrategy ParseInterleaveStrategy(std::string_view name,
                                           std::uint64_t seed) {
  if (name == "round-robin" || name == "rr") return InterleaveStrategy::RoundRobin();
  if (name == "uniform" || name == "uniform-random" || name == "random") {
    return InterleaveStrategy::Uniform(seed);
  }
  throw InvalidArgument("unknown interleaving strategy '" + std::string(name) +
                        "' (expected round-robin or uniform)");
}

MemoryTrace InterleaveTraces(std::span<const MemoryTrace> privates,
                             const InterleaveStrategy& strategy) {
  return InterleaveTraces(privates, strategy, nullptr);
}

MemoryTrace InterleaveTraces(std::span<const MemoryTrace> privates,
                             const InterleaveStrategy& strategy,
                             std::vector<std::uint32_t>* source_core) {
  if (privates.empty()) throw InvalidArgument("no private traces to interleave");
  const auto n = static_cast<std::uint32_t>(privates.size());

  MemoryTrace merged;
  std::vector<std::vector<MemoryTrace::BlockIndex>> translate(n);
  std::size_t total = 0;
  for (std::uint32_t core = 0; core < n; ++core) {
    for (const auto& bb : privates[core].blocks()) {
      translate[core].push_back(merged.Intern(bb));
    }
    total += privates[core].size();
  }
  merged.Reserve(total);
  if (source_core) {
    source_core->clear();
    source_core->reserve(total);
  }

  std::vector<std::size_t> pos(n, 0);
  std::uint32_t remaining = 0;
  for (std::uint32_t core = 0; core < n; ++core) {
    if (!privates[core].empty()) ++remaining;
  }

  const auto take = [&](std::uint32_t core) {
    const auto& e = privates[core].events()[pos[core]++];
    merged.Append(e.is_access() ? e
                                : TraceEvent{e.kind, translate[core][e.value]});
    if (source_core) source_core->push_back(core);
    if (pos[core] == privates[core].size()) --remaining;
  };

  if (strategy.kind == InterleaveKind::kRoundRobin) {
    std::uint32_t core = 0;
    while (remaining > 0) {
      if (pos[core] < privates[core].size()) take(core);
      core = core + 1 == n ? 0 : core + 1;
    }
  } else {
    PortableRng rng(strategy.seed);
    while (remaining > 0) {
      const auto core = static_cast<std::uint32_t>(rng.Below(n));
      if (pos[core] < privates[core].size()) take(core);
    }
  }
  return merged;
}

}  // namespace mcpredict

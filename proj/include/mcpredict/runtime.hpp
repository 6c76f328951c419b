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

#ifndef MCPREDICT_RUNTIME_HPP_
#define MCPREDICT_RUNTIME_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mcpredict/cache.hpp"
#include "mcpredict/mimic.hpp"

namespace mcpredict {

// Per-level cost of one access, in cycles: either latency (delta) or
// reciprocal throughput (beta).
struct MemoryTiming {
  double l1 = 0, l2 = 0, l3 = 0, ram = 0;
};

struct InstructionTiming {
  double alu_latency = 0;     // delta_in
  double div_latency = 0;     // delta_div
  double alu_throughput = 0;  // beta_in
  double div_throughput = 0;  // beta_div
};

// A modeled multicore CPU with a three-level hierarchy: two private levels
// followed by one shared level. All timings are in cycles.
struct MachineConfig {
  std::string name;
  std::uint32_t core_count = 1;
  double frequency_hz = 0;
  std::vector<CacheLevelConfig> levels;
  MemoryTiming latency;
  MemoryTiming throughput;
  InstructionTiming instructions;
  std::uint64_t data_bus_width = 8;  // bytes; carried for completeness
  std::uint64_t transfer_unit = 64;  // C, bytes moved per memory transfer
  std::uint64_t word_size = 8;       // b, bytes

  // Throws InvalidArgument on a bad config, including latencies that are not
  // ordered L1 <= L2 <= L3 <= RAM.
  void Validate() const;
  std::uint64_t max_line_size() const;
};

MachineConfig ParseMachineConfig(std::string_view json_text);
MachineConfig LoadMachineConfig(const std::filesystem::path& path);

enum class CpuMode { kThroughput, kLatency };

// Operation counts and memory volume of a parallel section, as measured on
// the sequential run.
struct KernelStats {
  std::uint64_t n_int_alu = 0;
  std::uint64_t n_float_alu = 0;
  std::uint64_t n_div = 0;
  std::uint64_t total_mem = 0;  // bytes
  CpuMode mode = CpuMode::kThroughput;
};

// Gap between consecutive program data blocks. With no explicit block sizes
// a single word-sized block is assumed.
struct GapModel {
  std::uint64_t gap = 0;
  std::vector<std::uint64_t> block_sizes;
};

struct KernelConfig {
  KernelStats stats;
  GapModel gaps;
};

KernelConfig ParseKernelConfig(std::string_view json_text);
KernelConfig LoadKernelConfig(const std::filesystem::path& path);

// Three hit probabilities feeding the average-cost formulas.
struct LevelHitRates {
  double l1 = 0, l2 = 0, l3 = 0;
};

LevelHitRates MeanLevelRates(const HitRateReport& rates, const MachineConfig& m);

// P1 c1 + (1-P1) [P2 c2 + (1-P2) (P3 c3 + (1-P3) c_ram)]. Throws
// InvalidArgument for a probability outside [0, 1].
double AverageAccessCost(const LevelHitRates& rates, const MemoryTiming& cost);

double AvgLatency(const HitRateReport& rates, const MachineConfig& m);
double AvgThroughput(const HitRateReport& rates, const MachineConfig& m);

// Transfer size for a data block of `block_bytes` (block plus gap): rounded
// up to whole transfer units, at least one unit and at most `max_bytes`.
std::uint64_t EffectiveBlockSize(std::uint64_t block_bytes, std::uint64_t transfer_unit,
                                 std::uint64_t max_bytes);

// Per-core memory time in cycles:
//   (delta + (b - 1) beta) / b * total_mem / cores.
double MemTime(double avg_latency, double avg_throughput, double block_bytes,
               double total_mem, CoreCount cores);

// Per-core CPU time in cycles; operation counts are split evenly over cores.
double CpuTime(const KernelStats& stats, const MachineConfig& m, CoreCount cores);

struct RuntimeBreakdown {
  double avg_latency = 0;     // cycles
  double avg_throughput = 0;  // cycles
  double block_bytes = 0;     // effective b
  double mem_cycles = 0;
  double cpu_cycles = 0;
  double total_cycles = 0;
  double seconds = 0;
};

// T = T_mem + T_cpu, converted to seconds at the machine frequency.
RuntimeBreakdown PredictRuntime(const HitRateReport& rates, const KernelStats& stats,
                                const MachineConfig& m, CoreCount cores,
                                const GapModel& gaps = {});

RuntimeBreakdown PredictRuntime(const LevelHitRates& rates, const KernelStats& stats,
                                const MachineConfig& m, CoreCount cores,
                                const GapModel& gaps = {});

}  // namespace mcpredict

#endif  // MCPREDICT_RUNTIME_HPP_

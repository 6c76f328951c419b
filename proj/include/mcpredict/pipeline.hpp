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

#ifndef MCPREDICT_PIPELINE_HPP_
#define MCPREDICT_PIPELINE_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mcpredict/cache.hpp"
#include "mcpredict/error.hpp"
#include "mcpredict/mimic.hpp"
#include "mcpredict/runtime.hpp"
#include "mcpredict/trace.hpp"

namespace mcpredict {

// An error raised inside one pipeline stage, tagged with that stage's name.
class PipelineError : public Error {
 public:
  PipelineError(std::string stage, const std::string& what)
      : Error("[" + stage + "] " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct PipelineConfig {
  // Exactly one of trace_path / workload_path is set.
  std::filesystem::path trace_path;
  std::filesystem::path workload_path;
  std::filesystem::path machine_path;
  std::filesystem::path kernel_path;
  std::vector<std::uint32_t> core_counts{1};
  InterleaveKind strategy = InterleaveKind::kRoundRobin;
  std::string shared_label_prefix{kDefaultSharedPrefix};
  std::filesystem::path output_dir;
  std::uint64_t seed = 42;
  bool persist = true;
  // Forces every cache level to this line size.
  std::optional<std::uint64_t> line_size_override;
  std::optional<std::uint64_t> chunk;
  // compare_oracle refuses source traces with more events than this.
  std::uint64_t oracle_event_cap = 2'000'000;

  InterleaveStrategy interleave() const { return {strategy, seed}; }
  // Throws InvalidArgument for an unusable config.
  void Validate() const;
};

// JSON document with the PipelineConfig fields; relative paths resolve
// against the document's directory.
PipelineConfig LoadPipelineConfig(const std::filesystem::path& path);

// Parses "1,2,4,8".
std::vector<std::uint32_t> ParseCoreList(std::string_view text);

struct Provenance {
  std::string tool_version;
  std::uint64_t seed = 0;
  std::string strategy;
  std::string source;  // "trace" or "workload"
  std::string source_hash;
  std::string machine_name;
  std::string machine_hash;
  std::string kernel_hash;
};

// Everything the pipeline reads, already parsed.
struct PipelineInputs {
  MemoryTrace trace;
  MachineConfig machine;
  KernelConfig kernel;
  Provenance provenance;
};

PipelineInputs LoadPipelineInputs(const PipelineConfig& cfg);

struct CoreCountResult {
  std::uint32_t cores = 0;
  HitRateReport rates;
  RuntimeBreakdown runtime;
  std::uint64_t private_events = 0;  // summed over cores
  std::uint64_t shared_events = 0;
};

struct PredictionReport {
  std::vector<CoreCountResult> results;
  Provenance provenance;
};

// Cache and runtime prediction for one core count from already mimicked
// traces.
CoreCountResult PredictFromTraces(std::span<const MemoryTrace> privates,
                                  const MemoryTrace& shared,
                                  const MachineConfig& machine,
                                  const KernelConfig& kernel);

// Full flow for every requested core count from one source trace. When
// cfg.persist is set and an output directory is given, intermediate traces,
// profiles and the reports are written there; on failure the files written
// by this run are removed.
PredictionReport RunPipeline(const PipelineConfig& cfg);
PredictionReport RunPipeline(const PipelineConfig& cfg, const PipelineInputs& inputs);

// Rows "cores,level,core,hit_rate".
void WriteHitRateReportCsv(std::ostream& out, const PredictionReport& report);
// Rows "cores,avg_latency_cycles,...,seconds".
void WriteRuntimeCsv(std::ostream& out, const PredictionReport& report);
void WriteSummary(std::ostream& out, const PredictionReport& report);

struct OracleRow {
  std::uint32_t cores = 0;
  std::string level;
  std::string core;  // index, "mean" or "shared"
  double model = 0;
  double simulated = 0;
  double abs_diff = 0;
};

// Analytical vs simulated hit rates for every level and core count, using
// the same mimicked traces.
std::vector<OracleRow> CompareOracle(const PipelineConfig& cfg);
std::vector<OracleRow> CompareOracle(const PipelineConfig& cfg,
                                     const PipelineInputs& inputs);
void WriteOracleCsv(std::ostream& out, const std::vector<OracleRow>& rows);

// 64-bit FNV-1a, hex encoded.
std::string Fnv1aHex(std::string_view bytes);

}  // namespace mcpredict

#endif  // MCPREDICT_PIPELINE_HPP_

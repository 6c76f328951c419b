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

// mcpredict: multicore cache hit-rate and runtime prediction from a single
// basic-block-labeled sequential memory trace.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "mcpredict/cache.hpp"
#include "mcpredict/mimic.hpp"
#include "mcpredict/pipeline.hpp"
#include "mcpredict/reuse.hpp"
#include "mcpredict/runtime.hpp"
#include "mcpredict/trace.hpp"
#include "mcpredict/workload.hpp"

namespace fs = std::filesystem;
using namespace mcpredict;

namespace {

struct CommonOptions {
  std::string config;
  std::string trace;
  std::string workload;
  std::string machine;
  std::string kernel;
  std::string cores = "1";
  std::string strategy = "round-robin";
  std::uint64_t seed = 42;
  std::string out;
  std::uint64_t line_size = 0;
  bool no_persist = false;
  std::string prefix{kDefaultSharedPrefix};
  std::uint64_t chunk = 0;
  std::uint64_t event_cap = 2'000'000;
};

void AddInputOptions(CLI::App* cmd, CommonOptions* o) {
  cmd->add_option("--config", o->config, "Pipeline config (JSON); flags override it");
  cmd->add_option("--trace", o->trace, "Basic-block-labeled trace file");
  cmd->add_option("--workload", o->workload, "Synthetic workload spec (JSON) instead of a trace");
  cmd->add_option("--cores", o->cores, "Comma-separated core counts, e.g. 1,2,4,8");
  cmd->add_option("--strategy", o->strategy, "Interleaving: round-robin | uniform");
  cmd->add_option("--seed", o->seed, "Seed for uniform interleaving and synthetic traces");
  cmd->add_option("--prefix", o->prefix, "Label prefix of shared-variable blocks");
  cmd->add_option("--chunk", o->chunk, "Static-schedule chunk size (0 = one chunk per core)");
}

// Merges an optional --config file with explicit flags.
PipelineConfig BuildConfig(const CLI::App& cmd, const CommonOptions& o) {
  PipelineConfig cfg;
  if (!o.config.empty()) cfg = LoadPipelineConfig(o.config);
  const auto given = [&](const char* flag) {
    const CLI::Option* opt = cmd.get_option_no_throw(flag);
    return opt != nullptr && opt->count() > 0;
  };
  if (given("--trace")) {
    cfg.trace_path = o.trace;
    cfg.workload_path.clear();
  }
  if (given("--workload")) {
    cfg.workload_path = o.workload;
    cfg.trace_path.clear();
  }
  if (given("--machine")) cfg.machine_path = o.machine;
  if (given("--kernel")) cfg.kernel_path = o.kernel;
  if (given("--cores") || o.config.empty()) cfg.core_counts = ParseCoreList(o.cores);
  if (given("--strategy") || o.config.empty()) {
    cfg.strategy = ParseInterleaveStrategy(o.strategy, 0).kind;
  }
  if (given("--seed") || o.config.empty()) cfg.seed = o.seed;
  if (given("--out")) cfg.output_dir = o.out;
  if (given("--line-size")) cfg.line_size_override = o.line_size;
  if (given("--no-persist")) cfg.persist = false;
  if (given("--prefix")) cfg.shared_label_prefix = o.prefix;
  if (given("--chunk") && o.chunk > 0) cfg.chunk = o.chunk;
  if (given("--event-cap")) cfg.oracle_event_cap = o.event_cap;
  return cfg;
}

MemoryTrace LoadSource(const CommonOptions& o) {
  if (o.trace.empty() == o.workload.empty()) {
    throw PipelineError("config", "give exactly one of --trace or --workload");
  }
  if (!o.trace.empty()) return ReadTraceFile(o.trace);
  return GenerateSyntheticTrace(LoadWorkloadSpec(o.workload), o.seed);
}

// Writes to `path`, or stdout when empty.
template <typename Fn>
void Emit(const std::string& path, Fn&& write) {
  if (path.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  write(out);
}

int RunGen(const std::string& spec_path, std::uint64_t seed, const std::string& out) {
  const auto trace = GenerateSyntheticTrace(LoadWorkloadSpec(spec_path), seed);
  Emit(out, [&](std::ostream& os) { WriteTrace(os, trace); });
  return 0;
}

int RunMimic(const CommonOptions& o) {
  if (o.out.empty()) throw PipelineError("config", "mimic needs --out DIR");
  const MemoryTrace trace = LoadSource(o);
  std::uint64_t line = o.line_size;
  if (line == 0) line = o.machine.empty() ? 64 : LoadMachineConfig(o.machine).max_line_size();
  const auto stats = ComputeBlockStats(trace);
  const auto shared = CollectSharedRefs(trace, o.prefix);
  const auto offset = ComputeOffset(trace, line);
  const auto strategy = ParseInterleaveStrategy(o.strategy, o.seed);
  const std::string stem =
      fs::path(o.trace.empty() ? o.workload : o.trace).stem().string();
  PrivateTraceOptions options;
  if (o.chunk > 0) options.chunk = o.chunk;

  for (const auto cores : ParseCoreList(o.cores)) {
    const auto privates =
        GenPrivateTraces(trace, CoreCount(cores), shared, stats, offset, options);
    const auto merged = InterleaveTraces(privates, strategy);
    const fs::path dir = fs::path(o.out) / ("cores" + std::to_string(cores));
    fs::create_directories(dir);
    for (std::uint32_t k = 0; k < cores; ++k) {
      WriteTraceFile(dir / (stem + ".core" + std::to_string(k) + ".trace"), privates[k]);
    }
    WriteTraceFile(dir / (stem + ".shared." + strategy.Name() + ".trace"), merged);
    std::cout << dir.string() << ": " << cores << " private traces, offset 0x" << std::hex
              << offset.offset << std::dec << ", " << merged.size() << " shared events\n";
  }
  return 0;
}

int RunProfile(const std::string& trace_path, bool interleaved, std::uint64_t line_size,
               bool log2_bins, const std::string& out) {
  const auto trace =
      ReadTraceFile(trace_path, interleaved ? Nesting::kInterleaved : Nesting::kStrict);
  auto profile = ProfileTrace(trace, line_size == 0 ? 1 : line_size);
  if (log2_bins) profile = BinPowerOfTwo(profile);
  Emit(out, [&](std::ostream& os) { WriteProfile(os, profile); });
  return 0;
}

int RunHitRate(const std::string& profile_path, const std::string& machine_path,
               std::uint64_t line_size) {
  std::ifstream in(profile_path);
  if (!in) throw Error("cannot open " + profile_path);
  const ReuseProfile profile = ReadProfile(in);
  MachineConfig machine = LoadMachineConfig(machine_path);
  if (line_size != 0) {
    for (auto& l : machine.levels) l.line_size = line_size;
  }
  std::cout << "level,hit_rate\n";
  int matched = 0;
  for (const auto& level : machine.levels) {
    if (level.line_size != profile.line_size) continue;
    ++matched;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.10f", HitRate(profile, level));
    std::cout << level.name << ',' << buf << '\n';
  }
  if (matched == 0) {
    throw PipelineError("hitrate", "no cache level uses the profile's " +
                                       std::to_string(profile.line_size) +
                                       "-byte line size");
  }
  return 0;
}

int RunPredict(const CLI::App& cmd, const CommonOptions& o) {
  const PipelineConfig cfg = BuildConfig(cmd, o);
  const PredictionReport report = RunPipeline(cfg);
  WriteSummary(std::cout, report);
  if (!cfg.output_dir.empty()) {
    std::cout << "reports written to " << cfg.output_dir.string() << "\n";
  }
  return 0;
}

int RunOracle(const CLI::App& cmd, const CommonOptions& o) {
  const PipelineConfig cfg = BuildConfig(cmd, o);
  const auto rows = CompareOracle(cfg);
  WriteOracleCsv(std::cout, rows);
  if (!cfg.output_dir.empty()) {
    fs::create_directories(cfg.output_dir);
    std::ofstream out(cfg.output_dir / "oracle.csv");
    WriteOracleCsv(out, rows);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multicore cache and runtime prediction from a sequential memory trace"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(MCPREDICT_VERSION));

  std::string gen_spec, gen_out;
  std::uint64_t gen_seed = 42;
  auto* gen = app.add_subcommand("gen", "Generate a synthetic trace from a workload spec");
  gen->add_option("--spec,--workload", gen_spec, "Workload spec (JSON)")->required();
  gen->add_option("--seed", gen_seed, "Random seed");
  gen->add_option("--out", gen_out, "Output trace file (default: stdout)");

  CommonOptions mimic_opts;
  auto* mimic = app.add_subcommand("mimic", "Build per-core private traces and the shared trace");
  AddInputOptions(mimic, &mimic_opts);
  mimic->add_option("--machine", mimic_opts.machine, "Machine config; its largest line sizes the offset");
  mimic->add_option("--line-size", mimic_opts.line_size, "Line size for the offset rule");
  mimic->add_option("--out", mimic_opts.out, "Output directory")->required();

  std::string prof_trace, prof_out;
  std::uint64_t prof_line = 1;
  bool prof_bins = false, prof_interleaved = false;
  auto* profile = app.add_subcommand("profile", "Reuse profile of a trace");
  profile->add_option("--trace", prof_trace, "Trace file")->required();
  profile->add_option("--line-size", prof_line, "Line size in bytes (1 = byte granularity)");
  profile->add_flag("--log2-bins", prof_bins, "Coarsen distances to power-of-two buckets");
  profile->add_flag("--interleaved", prof_interleaved, "Accept an interleaved multi-core trace");
  profile->add_option("--out", prof_out, "Output profile file (default: stdout)");

  std::string hr_profile, hr_machine;
  std::uint64_t hr_line = 0;
  auto* hitrate = app.add_subcommand("hitrate", "Hit rates of a reuse profile on a machine's caches");
  hitrate->add_option("--profile", hr_profile, "Profile file")->required();
  hitrate->add_option("--machine", hr_machine, "Machine config")->required();
  hitrate->add_option("--line-size", hr_line, "Override every level's line size");

  CommonOptions predict_opts;
  auto* predict = app.add_subcommand("predict", "Full pipeline: hit rates and runtime per core count");
  AddInputOptions(predict, &predict_opts);
  predict->add_option("--machine", predict_opts.machine, "Machine config (JSON)");
  predict->add_option("--kernel", predict_opts.kernel, "Kernel stats (JSON)");
  predict->add_option("--out", predict_opts.out, "Output directory");
  predict->add_option("--line-size", predict_opts.line_size, "Override every level's line size");
  predict->add_flag("--no-persist", predict_opts.no_persist, "Keep intermediate traces in memory only");

  CommonOptions oracle_opts;
  auto* oracle = app.add_subcommand("oracle", "Compare model hit rates with LRU simulation");
  AddInputOptions(oracle, &oracle_opts);
  oracle->add_option("--machine", oracle_opts.machine, "Machine config (JSON)");
  oracle->add_option("--kernel", oracle_opts.kernel, "Kernel stats (JSON)");
  oracle->add_option("--out", oracle_opts.out, "Output directory for oracle.csv");
  oracle->add_option("--line-size", oracle_opts.line_size, "Override every level's line size");
  oracle->add_option("--event-cap", oracle_opts.event_cap, "Largest trace the simulator accepts");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return RunGen(gen_spec, gen_seed, gen_out);
    if (*mimic) return RunMimic(mimic_opts);
    if (*profile) return RunProfile(prof_trace, prof_interleaved, prof_line, prof_bins, prof_out);
    if (*hitrate) return RunHitRate(hr_profile, hr_machine, hr_line);
    if (*predict) return RunPredict(*predict, predict_opts);
    if (*oracle) return RunOracle(*oracle, oracle_opts);
  } catch (const PipelineError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: [" << app.get_subcommands().front()->get_name() << "] " << e.what()
              << "\n";
    return 1;
  }
  return 0;
}

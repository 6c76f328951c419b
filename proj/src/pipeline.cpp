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

#include "mcpredict/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "mcpredict/reuse.hpp"
#include "mcpredict/workload.hpp"

#ifndef MCPREDICT_VERSION
#define MCPREDICT_VERSION "dev"
#endif

namespace mcpredict {
namespace fs = std::filesystem;
namespace {

std::string Fixed(double v, int digits = 10) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string Sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9e", v);
  return buf;
}

std::string ReadBytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

// Runs `fn`, re-throwing any library error tagged with `stage`.
template <typename Fn>
auto Stage(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const PipelineError&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineError(stage, e.what());
  }
}

// Files written by one pipeline run; deleted unless Commit() is called.
class OutputSet {
 public:
  explicit OutputSet(fs::path root) : root_(std::move(root)) {}
  OutputSet(const OutputSet&) = delete;
  OutputSet& operator=(const OutputSet&) = delete;

  ~OutputSet() {
    if (committed_) return;
    std::error_code ec;
    for (auto it = written_.rbegin(); it != written_.rend(); ++it) fs::remove(*it, ec);
    for (auto it = dirs_.rbegin(); it != dirs_.rend(); ++it) fs::remove(*it, ec);
  }

  fs::path Dir(const fs::path& rel) {
    const fs::path dir = rel.empty() ? root_ : root_ / rel;
    if (!fs::exists(dir)) {
      fs::create_directories(dir);
      dirs_.push_back(dir);
    }
    return dir;
  }

  void Write(const fs::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    written_.push_back(path);
    out << contents;
    if (!out) throw Error("write failed for " + path.string());
  }

  void Commit() { committed_ = true; }

 private:
  fs::path root_;
  std::vector<fs::path> written_;
  std::vector<fs::path> dirs_;
  bool committed_ = false;
};

MachineConfig ApplyLineSizeOverride(MachineConfig m, std::optional<std::uint64_t> line) {
  if (!line) return m;
  for (auto& level : m.levels) level.line_size = *line;
  m.Validate();
  return m;
}

struct Mimicked {
  std::vector<MemoryTrace> privates;
  MemoryTrace shared;
};

Mimicked Mimic(const PipelineConfig& cfg, const PipelineInputs& in,
               const BlockStats& stats, const SharedRefSet& shared_refs,
               const OffsetScheme& offset, std::uint32_t cores) {
  Mimicked m;
  m.privates = Stage("mimic", [&] {
    PrivateTraceOptions options;
    options.chunk = cfg.chunk;
    return GenPrivateTraces(in.trace, CoreCount(cores), shared_refs, stats, offset,
                            options);
  });
  m.shared = Stage("interleave", [&] { return InterleaveTraces(m.privates, cfg.interleave()); });
  return m;
}

std::string TraceStem(const PipelineConfig& cfg) {
  const fs::path& src = cfg.trace_path.empty() ? cfg.workload_path : cfg.trace_path;
  return src.stem().string();
}

std::string ProfileText(const ReuseProfile& p) {
  std::ostringstream out;
  WriteProfile(out, p);
  return out.str();
}

}  // namespace

std::string Fnv1aHex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<std::uint32_t> ParseCoreList(std::string_view text) {
  std::vector<std::uint32_t> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto item = text.substr(start, comma == std::string_view::npos
                                             ? std::string_view::npos
                                             : comma - start);
    if (item.empty()) throw InvalidArgument("empty entry in core list");
    std::uint64_t v = 0;
    for (const char c : item) {
      if (c < '0' || c > '9') {
        throw InvalidArgument("core list entry '" + std::string(item) + "' is not a number");
      }
      v = v * 10 + static_cast<std::uint64_t>(c - '0');
      if (v > 1u << 20) throw InvalidArgument("core count too large");
    }
    out.push_back(CoreCount(static_cast<std::uint32_t>(v)).value());
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

void PipelineConfig::Validate() const {
  if (trace_path.empty() == workload_path.empty()) {
    throw InvalidArgument("exactly one of a trace file or a workload spec is required");
  }
  if (machine_path.empty()) throw InvalidArgument("a machine config is required");
  if (core_counts.empty()) throw InvalidArgument("at least one core count is required");
  for (const auto n : core_counts) (void)CoreCount(n);
}

PipelineConfig LoadPipelineConfig(const fs::path& path) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(ReadBytes(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": not valid JSON: " + e.what());
  }
  const fs::path base = path.parent_path();
  const auto resolve = [&](const char* key) -> fs::path {
    if (!doc.contains(key)) return {};
    const fs::path p = doc.at(key).get<std::string>();
    return p.is_absolute() ? p : base / p;
  };
  PipelineConfig cfg;
  try {
    cfg.trace_path = resolve("trace");
    cfg.workload_path = resolve("workload");
    cfg.machine_path = resolve("machine");
    cfg.kernel_path = resolve("kernel");
    cfg.output_dir = resolve("output_dir");
    if (doc.contains("cores")) {
      cfg.core_counts.clear();
      for (const auto& n : doc.at("cores")) {
        cfg.core_counts.push_back(CoreCount(n.get<std::uint32_t>()).value());
      }
    }
    if (doc.contains("strategy")) {
      cfg.strategy = ParseInterleaveStrategy(doc.at("strategy").get<std::string>(), 0).kind;
    }
    cfg.shared_label_prefix = doc.value("shared_label_prefix", cfg.shared_label_prefix);
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.persist = doc.value("persist", cfg.persist);
    if (doc.contains("line_size")) cfg.line_size_override = doc.at("line_size").get<std::uint64_t>();
    if (doc.contains("chunk")) cfg.chunk = doc.at("chunk").get<std::uint64_t>();
    cfg.oracle_event_cap = doc.value("oracle_event_cap", cfg.oracle_event_cap);
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return cfg;
}

PipelineInputs LoadPipelineInputs(const PipelineConfig& cfg) {
  Stage("config", [&] { cfg.Validate(); });
  PipelineInputs in;
  in.provenance.tool_version = MCPREDICT_VERSION;
  in.provenance.seed = cfg.seed;
  in.provenance.strategy = cfg.interleave().Name();

  Stage("trace", [&] {
    if (!cfg.trace_path.empty()) {
      const std::string bytes = ReadBytes(cfg.trace_path);
      in.trace = ParseTrace(std::string_view(bytes));
      in.provenance.source = "trace";
      in.provenance.source_hash = Fnv1aHex(bytes);
    } else {
      const std::string bytes = ReadBytes(cfg.workload_path);
      in.trace = GenerateSyntheticTrace(ParseWorkloadSpec(bytes), cfg.seed);
      in.provenance.source = "workload";
      in.provenance.source_hash = Fnv1aHex(bytes);
    }
  });
  Stage("machine", [&] {
    const std::string bytes = ReadBytes(cfg.machine_path);
    in.machine = ApplyLineSizeOverride(ParseMachineConfig(bytes), cfg.line_size_override);
    in.provenance.machine_name = in.machine.name;
    in.provenance.machine_hash = Fnv1aHex(bytes);
  });
  Stage("kernel", [&] {
    if (cfg.kernel_path.empty()) {
      in.provenance.kernel_hash = "none";
      return;
    }
    const std::string bytes = ReadBytes(cfg.kernel_path);
    in.kernel = ParseKernelConfig(bytes);
    in.provenance.kernel_hash = Fnv1aHex(bytes);
  });
  for (const auto n : cfg.core_counts) {
    if (n > in.machine.core_count) {
      throw PipelineError("config", "requested " + std::to_string(n) +
                                        " cores but machine '" + in.machine.name +
                                        "' has " + std::to_string(in.machine.core_count));
    }
  }
  return in;
}

CoreCountResult PredictFromTraces(std::span<const MemoryTrace> privates,
                                  const MemoryTrace& shared, const MachineConfig& machine,
                                  const KernelConfig& kernel) {
  CoreCountResult r;
  r.cores = static_cast<std::uint32_t>(privates.size());
  r.rates = Stage("hitrate", [&] { return PredictHierarchy(privates, shared, machine); });
  r.runtime = Stage("runtime", [&] {
    return PredictRuntime(r.rates, kernel.stats, machine, CoreCount(r.cores), kernel.gaps);
  });
  for (const auto& p : privates) r.private_events += p.size();
  r.shared_events = shared.size();
  return r;
}

PredictionReport RunPipeline(const PipelineConfig& cfg) {
  return RunPipeline(cfg, LoadPipelineInputs(cfg));
}

PredictionReport RunPipeline(const PipelineConfig& cfg, const PipelineInputs& in) {
  const bool persist = cfg.persist && !cfg.output_dir.empty();
  OutputSet outputs(cfg.output_dir);
  const std::string stem = TraceStem(cfg);

  const auto stats = Stage("stats", [&] { return ComputeBlockStats(in.trace); });
  const auto shared_refs =
      Stage("stats", [&] { return CollectSharedRefs(in.trace, cfg.shared_label_prefix); });
  const auto offset =
      Stage("mimic", [&] { return ComputeOffset(in.trace, in.machine.max_line_size()); });

  PredictionReport report;
  report.provenance = in.provenance;
  for (const auto cores : cfg.core_counts) {
    const Mimicked m = Mimic(cfg, in, stats, shared_refs, offset, cores);
    const auto profiles = Stage("profile", [&] {
      return ComputeHierarchyProfiles(m.privates, m.shared, in.machine);
    });

    CoreCountResult r;
    r.cores = cores;
    r.rates = Stage("hitrate", [&] { return HitRatesFromProfiles(profiles, in.machine); });
    r.runtime = Stage("runtime", [&] {
      return PredictRuntime(r.rates, in.kernel.stats, in.machine, CoreCount(cores),
                            in.kernel.gaps);
    });
    for (const auto& p : m.privates) r.private_events += p.size();
    r.shared_events = m.shared.size();

    if (persist) {
      Stage("persist", [&] {
        const fs::path dir = outputs.Dir("cores" + std::to_string(cores));
        const auto& levels = in.machine.levels;
        for (std::uint32_t k = 0; k < cores; ++k) {
          const std::string core_stem = stem + ".core" + std::to_string(k);
          outputs.Write(dir / (core_stem + ".trace"), SerializeTrace(m.privates[k]));
          for (std::size_t lvl = 0; lvl < 2; ++lvl) {
            outputs.Write(dir / (core_stem + "." + levels[lvl].name + ".profile"),
                          ProfileText(profiles.private_levels[k][lvl]));
          }
        }
        const std::string shared_stem = stem + ".shared." + cfg.interleave().Name();
        outputs.Write(dir / (shared_stem + ".trace"), SerializeTrace(m.shared));
        outputs.Write(dir / (shared_stem + "." + levels[2].name + ".profile"),
                      ProfileText(profiles.shared_level));
      });
    }
    report.results.push_back(std::move(r));
  }

  if (!cfg.output_dir.empty()) {
    Stage("report", [&] {
      const fs::path dir = outputs.Dir({});
      std::ostringstream rates, runtime, summary;
      WriteHitRateReportCsv(rates, report);
      WriteRuntimeCsv(runtime, report);
      WriteSummary(summary, report);
      outputs.Write(dir / "report.csv", rates.str());
      outputs.Write(dir / "runtime.csv", runtime.str());
      outputs.Write(dir / "summary.txt", summary.str());
    });
  }
  outputs.Commit();
  return report;
}

void WriteHitRateReportCsv(std::ostream& out, const PredictionReport& report) {
  out << "cores,level,core,hit_rate\n";
  for (const auto& r : report.results) {
    std::ostringstream rows;
    WriteHitRateCsv(rows, r.rates);
    std::istringstream lines(rows.str());
    std::string line;
    std::getline(lines, line);  // header
    while (std::getline(lines, line)) out << r.cores << ',' << line << '\n';
  }
}

void WriteRuntimeCsv(std::ostream& out, const PredictionReport& report) {
  out << "cores,avg_latency_cycles,avg_throughput_cycles,block_bytes,mem_cycles,"
         "cpu_cycles,total_cycles,seconds\n";
  for (const auto& r : report.results) {
    const auto& t = r.runtime;
    out << r.cores << ',' << Fixed(t.avg_latency, 6) << ',' << Fixed(t.avg_throughput, 6)
        << ',' << Fixed(t.block_bytes, 3) << ',' << Fixed(t.mem_cycles, 3) << ','
        << Fixed(t.cpu_cycles, 3) << ',' << Fixed(t.total_cycles, 3) << ','
        << Sci(t.seconds) << '\n';
  }
}

void WriteSummary(std::ostream& out, const PredictionReport& report) {
  const auto& p = report.provenance;
  out << "mcpredict " << p.tool_version << "\n"
      << "machine   " << p.machine_name << " (sha " << p.machine_hash << ")\n"
      << "input     " << p.source << " (sha " << p.source_hash << ")\n"
      << "kernel    sha " << p.kernel_hash << "\n"
      << "strategy  " << p.strategy << ", seed " << p.seed << "\n\n";
  for (const auto& r : report.results) {
    out << "== " << r.cores << (r.cores == 1 ? " core" : " cores") << " ==\n";
    out << "  events: " << r.private_events << " private, " << r.shared_events
        << " shared\n";
    for (const auto& name : r.rates.level_names) {
      out << "  " << name << " hit rate: " << Fixed(r.rates.level(name), 6) << '\n';
    }
    out << "  T_mem " << Fixed(r.runtime.mem_cycles, 1) << " cycles, T_cpu "
        << Fixed(r.runtime.cpu_cycles, 1) << " cycles\n";
    out << "  predicted runtime: " << Sci(r.runtime.seconds) << " s\n\n";
  }
}

std::vector<OracleRow> CompareOracle(const PipelineConfig& cfg) {
  return CompareOracle(cfg, LoadPipelineInputs(cfg));
}

std::vector<OracleRow> CompareOracle(const PipelineConfig& cfg, const PipelineInputs& in) {
  if (in.trace.size() > cfg.oracle_event_cap) {
    throw PipelineError("oracle", "trace has " + std::to_string(in.trace.size()) +
                                      " events, above the oracle cap of " +
                                      std::to_string(cfg.oracle_event_cap));
  }
  const auto stats = Stage("stats", [&] { return ComputeBlockStats(in.trace); });
  const auto shared_refs =
      Stage("stats", [&] { return CollectSharedRefs(in.trace, cfg.shared_label_prefix); });
  const auto offset =
      Stage("mimic", [&] { return ComputeOffset(in.trace, in.machine.max_line_size()); });

  std::vector<OracleRow> rows;
  const auto add = [&](std::uint32_t cores, const std::string& level, std::string core,
                       double model, double sim) {
    rows.push_back({cores, level, std::move(core), model, sim, std::abs(model - sim)});
  };
  for (const auto cores : cfg.core_counts) {
    const Mimicked m = Mimic(cfg, in, stats, shared_refs, offset, cores);
    const auto rates = Stage("hitrate", [&] { return PredictHierarchy(m.privates, m.shared, in.machine); });
    Stage("oracle", [&] {
      for (std::size_t lvl = 0; lvl < 2; ++lvl) {
        const auto& cfg_level = in.machine.levels[lvl];
        double sim_sum = 0.0;
        for (std::uint32_t k = 0; k < cores; ++k) {
          const double sim = SimulateLru(m.privates[k], cfg_level);
          sim_sum += sim;
          add(cores, cfg_level.name, std::to_string(k),
              rates.per_core_private.at({k, cfg_level.name}), sim);
        }
        add(cores, cfg_level.name, "mean", rates.level(cfg_level.name), sim_sum / cores);
      }
      const auto& l3 = in.machine.levels[2];
      add(cores, l3.name, "shared", rates.level(l3.name), SimulateLru(m.shared, l3));
    });
  }
  return rows;
}

void WriteOracleCsv(std::ostream& out, const std::vector<OracleRow>& rows) {
  out << "cores,level,core,model,simulated,abs_diff\n";
  for (const auto& r : rows) {
    out << r.cores << ',' << r.level << ',' << r.core << ',' << Fixed(r.model) << ','
        << Fixed(r.simulated) << ',' << Fixed(r.abs_diff) << '\n';
  }
}

}  // namespace mcpredict

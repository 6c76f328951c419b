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

#include "mcpredict/runtime.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "mcpredict/error.hpp"

namespace mcpredict {
namespace {

using nlohmann::json;

const json& Require(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ParseError(std::string("missing field '") + key + "'");
  }
  return obj.at(key);
}

double ReadNumber(const json& obj, const char* key) {
  const json& v = Require(obj, key);
  if (!v.is_number()) throw ParseError(std::string("'") + key + "' must be a number");
  return v.get<double>();
}

std::uint64_t ReadCount(const json& obj, const char* key) {
  const json& v = Require(obj, key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  if (v.is_number_float() && v.get<double>() >= 0 &&
      std::floor(v.get<double>()) == v.get<double>()) {
    return static_cast<std::uint64_t>(v.get<double>());
  }
  throw ParseError(std::string("'") + key + "' must be a non-negative integer");
}

std::uint64_t ReadCountOr(const json& obj, const char* key, std::uint64_t fallback) {
  return obj.contains(key) ? ReadCount(obj, key) : fallback;
}

MemoryTiming ReadTiming(const json& obj) {
  return MemoryTiming{ReadNumber(obj, "L1"), ReadNumber(obj, "L2"),
                      ReadNumber(obj, "L3"), ReadNumber(obj, "RAM")};
}

json ParseJson(std::string_view text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string(what) + " is not valid JSON: " + e.what());
  }
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

void CheckProbability(double p, const char* level) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw InvalidArgument(std::string(level) + " hit probability " + std::to_string(p) +
                          " is outside [0, 1]");
  }
}

}  // namespace

void MachineConfig::Validate() const {
  if (core_count < 1) throw InvalidArgument("machine needs at least one core");
  if (!(frequency_hz > 0)) throw InvalidArgument("frequency must be positive");
  if (levels.size() != 3) {
    throw InvalidArgument("machine must declare exactly three cache levels, got " +
                          std::to_string(levels.size()));
  }
  for (std::size_t i = 0; i < levels.size(); ++i) {
    levels[i].Validate();
    const Sharing expected = i < 2 ? Sharing::kPrivate : Sharing::kShared;
    if (levels[i].sharing != expected) {
      throw InvalidArgument("cache level '" + levels[i].name + "' must be " +
                            (i < 2 ? "private" : "shared"));
    }
  }
  for (const auto* t : {&latency, &throughput}) {
    if (!(t->l1 > 0 && t->l2 > 0 && t->l3 > 0 && t->ram > 0)) {
      throw InvalidArgument("memory latencies and throughputs must be positive");
    }
  }
  if (!(latency.l1 <= latency.l2 && latency.l2 <= latency.l3 &&
        latency.l3 <= latency.ram)) {
    throw InvalidArgument("latencies must satisfy L1 <= L2 <= L3 <= RAM");
  }
  const auto& ins = instructions;
  if (!(ins.alu_latency > 0 && ins.div_latency > 0 && ins.alu_throughput > 0 &&
        ins.div_throughput > 0)) {
    throw InvalidArgument("instruction latencies and throughputs must be positive");
  }
  if (transfer_unit == 0 || word_size == 0) {
    throw InvalidArgument("transfer unit and word size must be positive");
  }
  if (levels[2].capacity < transfer_unit) {
    throw InvalidArgument("shared cache is smaller than one transfer unit");
  }
}

std::uint64_t MachineConfig::max_line_size() const {
  std::uint64_t m = 1;
  for (const auto& l : levels) m = std::max(m, l.line_size);
  return m;
}

MachineConfig ParseMachineConfig(std::string_view json_text) {
  const json doc = ParseJson(json_text, "machine config");
  MachineConfig m;
  try {
    m.name = doc.value("name", std::string("unnamed"));
    m.core_count = static_cast<std::uint32_t>(ReadCount(doc, "core_count"));
    m.frequency_hz = ReadNumber(doc, "frequency_hz");
    const json& levels = Require(doc, "levels");
    if (!levels.is_array()) throw ParseError("'levels' must be an array");
    for (const auto& l : levels) {
      CacheLevelConfig c;
      c.name = Require(l, "name").get<std::string>();
      c.capacity = ReadCount(l, "capacity");
      c.line_size = ReadCount(l, "line_size");
      const json& assoc = Require(l, "associativity");
      if (assoc.is_string()) {
        if (assoc.get<std::string>() != "full") {
          throw ParseError("associativity must be an integer or \"full\"");
        }
        c.associativity = CacheLevelConfig::kFullyAssociative;
      } else {
        c.associativity = ReadCount(l, "associativity");
        if (c.associativity == 0) throw ParseError("associativity must be positive");
      }
      const std::string sharing = l.value("sharing", std::string("private"));
      if (sharing == "private") {
        c.sharing = Sharing::kPrivate;
      } else if (sharing == "shared") {
        c.sharing = Sharing::kShared;
      } else {
        throw ParseError("sharing must be \"private\" or \"shared\"");
      }
      m.levels.push_back(std::move(c));
    }
    m.latency = ReadTiming(Require(doc, "latency_cycles"));
    m.throughput = ReadTiming(Require(doc, "throughput_cycles"));
    const json& ins = Require(doc, "instruction_cycles");
    m.instructions.alu_latency = ReadNumber(ins, "alu_latency");
    m.instructions.div_latency = ReadNumber(ins, "div_latency");
    m.instructions.alu_throughput = ReadNumber(ins, "alu_throughput");
    m.instructions.div_throughput = ReadNumber(ins, "div_throughput");
    m.data_bus_width = ReadCountOr(doc, "data_bus_width", 8);
    m.transfer_unit = ReadCountOr(doc, "transfer_unit", 64);
    m.word_size = ReadCountOr(doc, "word_size", 8);
  } catch (const json::exception& e) {
    throw ParseError(std::string("machine config: ") + e.what());
  }
  m.Validate();
  return m;
}

MachineConfig LoadMachineConfig(const std::filesystem::path& path) {
  try {
    return ParseMachineConfig(ReadFile(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
}

KernelConfig ParseKernelConfig(std::string_view json_text) {
  const json doc = ParseJson(json_text, "kernel config");
  KernelConfig k;
  try {
    k.stats.n_int_alu = ReadCountOr(doc, "n_int_alu", 0);
    k.stats.n_float_alu = ReadCountOr(doc, "n_float_alu", 0);
    k.stats.n_div = ReadCountOr(doc, "n_div", 0);
    k.stats.total_mem = ReadCountOr(doc, "total_mem_bytes", 0);
    const std::string mode = doc.value("mode", std::string("throughput"));
    if (mode == "throughput") {
      k.stats.mode = CpuMode::kThroughput;
    } else if (mode == "latency") {
      k.stats.mode = CpuMode::kLatency;
    } else {
      throw ParseError("mode must be \"throughput\" or \"latency\"");
    }
    k.gaps.gap = ReadCountOr(doc, "gap_bytes", 0);
    if (doc.contains("block_sizes")) {
      for (const auto& b : doc.at("block_sizes")) {
        if (!b.is_number_unsigned() || b.get<std::uint64_t>() == 0) {
          throw ParseError("block_sizes must be positive integers");
        }
        k.gaps.block_sizes.push_back(b.get<std::uint64_t>());
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("kernel config: ") + e.what());
  }
  return k;
}

KernelConfig LoadKernelConfig(const std::filesystem::path& path) {
  try {
    return ParseKernelConfig(ReadFile(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

LevelHitRates MeanLevelRates(const HitRateReport& rates, const MachineConfig& m) {
  if (m.levels.size() != 3) throw InvalidArgument("machine must have three cache levels");
  return LevelHitRates{rates.level(m.levels[0].name), rates.level(m.levels[1].name),
                       rates.level(m.levels[2].name)};
}

double AverageAccessCost(const LevelHitRates& r, const MemoryTiming& c) {
  CheckProbability(r.l1, "L1");
  CheckProbability(r.l2, "L2");
  CheckProbability(r.l3, "L3");
  return r.l1 * c.l1 +
         (1.0 - r.l1) * (r.l2 * c.l2 + (1.0 - r.l2) * (r.l3 * c.l3 + (1.0 - r.l3) * c.ram));
}

double AvgLatency(const HitRateReport& rates, const MachineConfig& m) {
  return AverageAccessCost(MeanLevelRates(rates, m), m.latency);
}

double AvgThroughput(const HitRateReport& rates, const MachineConfig& m) {
  return AverageAccessCost(MeanLevelRates(rates, m), m.throughput);
}

std::uint64_t EffectiveBlockSize(std::uint64_t block_bytes, std::uint64_t transfer_unit,
                                 std::uint64_t max_bytes) {
  if (transfer_unit == 0) throw InvalidArgument("transfer unit must be positive");
  if (max_bytes < transfer_unit) {
    throw InvalidArgument("maximum block size is smaller than the transfer unit");
  }
  if (block_bytes <= transfer_unit) return transfer_unit;
  if (block_bytes >= max_bytes) return max_bytes;
  const std::uint64_t units = (block_bytes + transfer_unit - 1) / transfer_unit;
  // A maximum that is not a whole number of units caps the rounded size.
  return std::min(units * transfer_unit, max_bytes);
}

double MemTime(double avg_latency, double avg_throughput, double block_bytes,
               double total_mem, CoreCount cores) {
  if (!(block_bytes >= 1.0)) throw InvalidArgument("block size must be at least one byte");
  if (total_mem < 0) throw InvalidArgument("total memory must be non-negative");
  const double per_byte = (avg_latency + (block_bytes - 1.0) * avg_throughput) / block_bytes;
  return per_byte * (total_mem / static_cast<double>(cores.value()));
}

double CpuTime(const KernelStats& stats, const MachineConfig& m, CoreCount cores) {
  const double c = static_cast<double>(cores.value());
  const double n_in =
      static_cast<double>(stats.n_int_alu + stats.n_float_alu + stats.n_div) / c;
  const double n_div = static_cast<double>(stats.n_div) / c;
  const double n_other = n_in - n_div;
  const auto& ins = m.instructions;
  const auto tail = [](double n) { return std::max(0.0, n - 1.0); };

  if (stats.mode == CpuMode::kLatency) {
    return tail(n_other) * ins.alu_latency + tail(n_div) * ins.div_latency;
  }
  // An instruction class that never executes contributes no issue latency.
  double cycles = 0.0;
  if (n_other > 0) cycles += ins.alu_latency + tail(n_other) * ins.alu_throughput;
  if (n_div > 0) cycles += ins.div_latency + tail(n_div) * ins.div_throughput;
  return cycles;
}

RuntimeBreakdown PredictRuntime(const HitRateReport& rates, const KernelStats& stats,
                                const MachineConfig& m, CoreCount cores,
                                const GapModel& gaps) {
  return PredictRuntime(MeanLevelRates(rates, m), stats, m, cores, gaps);
}

RuntimeBreakdown PredictRuntime(const LevelHitRates& rates, const KernelStats& stats,
                                const MachineConfig& m, CoreCount cores,
                                const GapModel& gaps) {
  m.Validate();
  RuntimeBreakdown r;
  r.avg_latency = AverageAccessCost(rates, m.latency);
  r.avg_throughput = AverageAccessCost(rates, m.throughput);

  const std::uint64_t max_bytes = m.levels[2].capacity;
  const std::vector<std::uint64_t> sizes =
      gaps.block_sizes.empty() ? std::vector<std::uint64_t>{m.word_size} : gaps.block_sizes;
  double sum = 0.0;
  for (const auto b : sizes) {
    sum += static_cast<double>(EffectiveBlockSize(b + gaps.gap, m.transfer_unit, max_bytes));
  }
  r.block_bytes = sum / static_cast<double>(sizes.size());

  r.mem_cycles = MemTime(r.avg_latency, r.avg_throughput, r.block_bytes,
                         static_cast<double>(stats.total_mem), cores);
  r.cpu_cycles = CpuTime(stats, m, cores);
  r.total_cycles = r.mem_cycles + r.cpu_cycles;
  r.seconds = r.total_cycles / m.frequency_hz;
  return r;
}

}  // namespace mcpredict

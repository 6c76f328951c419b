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

#include "mcpredict/cache.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <list>
#include <ostream>
#include <unordered_map>

#include "mcpredict/error.hpp"
#include "mcpredict/runtime.hpp"

namespace mcpredict {
namespace {

// Below this, P(h|D) is treated as an exact miss.
constexpr double kNegligibleHit = 1e-12;

double Clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

// Smallest D with ((B-1)/B)^D < kNegligibleHit. Distances at or beyond it are
// counted as misses without evaluating the sum.
double MissCutoff(std::uint64_t blocks) {
  if (blocks <= 1) return 1.0;
  return std::log(kNegligibleHit) / std::log1p(-1.0 / static_cast<double>(blocks));
}

std::string Format(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10f", v);
  return buf;
}

}  // namespace

void CacheLevelConfig::Validate() const {
  const std::string who = "cache level '" + name + "': ";
  if (line_size == 0 || !std::has_single_bit(line_size)) {
    throw InvalidArgument(who + "line size must be a power of two");
  }
  if (capacity == 0 || capacity % line_size != 0) {
    throw InvalidArgument(who + "capacity must be a positive multiple of the line size");
  }
  if (associativity != kFullyAssociative) {
    if (associativity > blocks()) {
      throw InvalidArgument(who + "associativity exceeds the number of blocks");
    }
    if (blocks() % associativity != 0) {
      throw InvalidArgument(who + "blocks must divide evenly into sets");
    }
  }
}

double CondHitAssoc(ReuseDistance d, std::uint64_t ways, std::uint64_t blocks) {
  if (ways < 1) throw InvalidArgument("associativity must be at least 1");
  if (ways > blocks) throw InvalidArgument("associativity exceeds the number of blocks");
  if (d.is_infinite()) return 0.0;
  const std::uint64_t dist = d.value();
  // All D competitors fit in the set, whatever their placement.
  if (dist < ways) return 1.0;
  if (ways == blocks) return 0.0;
  if (static_cast<double>(dist) >= MissCutoff(blocks)) return 0.0;

  // Terms of the Binomial(D, A/B) lower tail, accumulated in log space so
  // that ((B-A)/B)^D cannot underflow before the larger terms are reached.
  const double A = static_cast<double>(ways);
  const double B = static_cast<double>(blocks);
  const double D = static_cast<double>(dist);
  const double log_q = std::log1p(-A / B);
  const double log_ratio = std::log(A) - std::log(B - A);

  std::vector<double> log_terms;
  log_terms.reserve(ways);
  double log_term = D * log_q;
  for (std::uint64_t a = 0; a < ways; ++a) {
    log_terms.push_back(log_term);
    const double af = static_cast<double>(a);
    log_term += std::log(D - af) - std::log(af + 1.0) + log_ratio;
  }
  const double peak = *std::max_element(log_terms.begin(), log_terms.end());
  double scaled = 0.0;
  for (const double t : log_terms) scaled += std::exp(t - peak);
  return Clamp01(std::exp(peak) * scaled);
}

double CondHitDirect(ReuseDistance d, std::uint64_t blocks) {
  if (blocks < 1) throw InvalidArgument("a cache needs at least one block");
  if (d.is_infinite()) return 0.0;
  if (d.value() == 0) return 1.0;
  if (static_cast<double>(d.value()) >= MissCutoff(blocks)) return 0.0;
  const double b = static_cast<double>(blocks);
  return Clamp01(std::pow((b - 1.0) / b, static_cast<double>(d.value())));
}

double HitRate(const ReuseProfile& profile, const CacheLevelConfig& cfg) {
  cfg.Validate();
  if (profile.line_size != cfg.line_size) {
    throw InvalidArgument("granularity mismatch: profile measured at " +
                          std::to_string(profile.line_size) + "-byte lines, cache '" +
                          cfg.name + "' uses " + std::to_string(cfg.line_size));
  }
  if (profile.total == 0) throw InvalidArgument("empty reuse profile");
  const std::uint64_t B = cfg.blocks();
  const std::uint64_t A = cfg.ways();
  double weighted = 0.0;
  for (const auto& [dist, n] : profile.finite) {
    const auto d = ReuseDistance::Finite(dist);
    double p;
    if (cfg.fully_associative()) {
      p = dist < B ? 1.0 : 0.0;
    } else if (A == 1) {
      p = CondHitDirect(d, B);
    } else {
      p = CondHitAssoc(d, A, B);
    }
    weighted += static_cast<double>(n) * p;
  }
  return Clamp01(weighted / static_cast<double>(profile.total));
}

SimulationResult SimulateLruCounts(const MemoryTrace& trace, const CacheLevelConfig& cfg) {
  cfg.Validate();
  const int shift = std::countr_zero(cfg.line_size);
  const std::uint64_t num_sets = cfg.sets();
  const std::uint64_t ways = cfg.ways();

  // Each set is an MRU-first list; `where` finds a resident line's node.
  std::vector<std::list<std::uint64_t>> sets(num_sets);
  std::unordered_map<std::uint64_t, std::list<std::uint64_t>::iterator> where;
  SimulationResult result;
  for (const auto& e : trace.events()) {
    if (!e.is_access()) continue;
    ++result.accesses;
    const std::uint64_t line = e.value >> shift;
    auto& set = sets[line % num_sets];
    const auto it = where.find(line);
    if (it != where.end()) {
      ++result.hits;
      set.splice(set.begin(), set, it->second);
      continue;
    }
    if (set.size() == ways) {
      where.erase(set.back());
      set.pop_back();
    }
    set.push_front(line);
    where.emplace(line, set.begin());
  }
  return result;
}

double SimulateLru(const MemoryTrace& trace, const CacheLevelConfig& cfg) {
  return SimulateLruCounts(trace, cfg).hit_rate();
}

double HitRateReport::level(std::string_view name) const {
  const auto it = per_level.find(std::string(name));
  if (it == per_level.end()) {
    throw InvalidArgument("hit-rate report has no level '" + std::string(name) + "'");
  }
  return it->second;
}

HierarchyProfiles ComputeHierarchyProfiles(std::span<const MemoryTrace> privates,
                                           const MemoryTrace& shared,
                                           const MachineConfig& machine) {
  machine.Validate();
  if (privates.empty()) throw InvalidArgument("no private traces");
  HierarchyProfiles out;
  for (const auto& trace : privates) {
    std::vector<ReuseProfile> levels;
    for (std::size_t lvl = 0; lvl < 2; ++lvl) {
      const auto line = machine.levels[lvl].line_size;
      // L1 and L2 usually share a line size; reuse the first profile then.
      if (lvl == 1 && levels[0].line_size == line) {
        levels.push_back(levels[0]);
      } else {
        levels.push_back(ProfileTrace(trace, line));
      }
    }
    out.private_levels.push_back(std::move(levels));
  }
  out.shared_level = ProfileTrace(shared, machine.levels[2].line_size);
  return out;
}

HitRateReport HitRatesFromProfiles(const HierarchyProfiles& profiles,
                                   const MachineConfig& machine) {
  machine.Validate();
  HitRateReport report;
  report.num_cores = static_cast<std::uint32_t>(profiles.private_levels.size());
  for (const auto& lvl : machine.levels) report.level_names.push_back(lvl.name);

  for (std::size_t lvl = 0; lvl < 2; ++lvl) {
    const auto& cfg = machine.levels[lvl];
    double sum = 0.0;
    for (std::uint32_t core = 0; core < report.num_cores; ++core) {
      const double rate = HitRate(profiles.private_levels[core][lvl], cfg);
      report.per_core_private[{core, cfg.name}] = rate;
      sum += rate;
    }
    report.per_level[cfg.name] = sum / report.num_cores;
  }
  report.per_level[machine.levels[2].name] =
      HitRate(profiles.shared_level, machine.levels[2]);
  return report;
}

HitRateReport PredictHierarchy(std::span<const MemoryTrace> privates,
                               const MemoryTrace& shared,
                               const MachineConfig& machine) {
  return HitRatesFromProfiles(ComputeHierarchyProfiles(privates, shared, machine),
                              machine);
}

void WriteHitRateCsv(std::ostream& out, const HitRateReport& report) {
  out << "level,core,hit_rate\n";
  for (std::size_t i = 0; i < report.level_names.size(); ++i) {
    const auto& name = report.level_names[i];
    if (i + 1 < report.level_names.size()) {
      for (std::uint32_t core = 0; core < report.num_cores; ++core) {
        out << name << ',' << core << ','
            << Format(report.per_core_private.at({core, name})) << '\n';
      }
      out << name << ",mean," << Format(report.level(name)) << '\n';
    } else {
      out << name << ",shared," << Format(report.level(name)) << '\n';
    }
  }
}

}  // namespace mcpredict

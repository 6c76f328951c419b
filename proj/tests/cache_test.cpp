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

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "mcpredict/cache.hpp"
#include "mcpredict/error.hpp"
#include "mcpredict/mimic.hpp"
#include "mcpredict/runtime.hpp"
#include "mcpredict/workload.hpp"
#include "test_util.hpp"

namespace mcpredict {
namespace {

using testing::Level;
using testing::SingleBlockTrace;
using testing::Symbols;
using testing::TinyMachine;
using testing::VectorLruOracle;

ReuseDistance D(std::uint64_t d) { return ReuseDistance::Finite(d); }

// Enumerates every way D other lines can land in S = B/A sets and counts the
// placements that leave fewer than A of them in the reused line's set.
double EnumeratedHitProbability(std::uint64_t d, std::uint64_t ways, std::uint64_t blocks) {
  const std::uint64_t sets = blocks / ways;
  std::uint64_t combos = 1;
  for (std::uint64_t i = 0; i < d; ++i) combos *= sets;
  std::uint64_t good = 0;
  for (std::uint64_t code = 0; code < combos; ++code) {
    std::uint64_t in_target = 0;
    for (std::uint64_t i = 0, c = code; i < d; ++i, c /= sets) in_target += (c % sets == 0);
    good += in_target < ways;
  }
  return static_cast<double>(good) / static_cast<double>(combos);
}

TEST(CondHitAssoc, FullyAssociativeIsAStep) {
  for (std::uint64_t b : {1, 4, 16}) {
    for (std::uint64_t d = 0; d < 40; ++d) {
      EXPECT_EQ(CondHitAssoc(D(d), b, b), d < b ? 1.0 : 0.0);
    }
  }
}

TEST(CondHitAssoc, HandEvaluatedTwoWay) {
  EXPECT_NEAR(CondHitAssoc(D(2), 2, 4), 0.75, 1e-15);
}

TEST(CondHitAssoc, InfiniteIsCompulsoryMiss) {
  EXPECT_EQ(CondHitAssoc(ReuseDistance::Infinite(), 2, 8), 0.0);
  EXPECT_EQ(CondHitDirect(ReuseDistance::Infinite(), 8), 0.0);
}

TEST(CondHitAssoc, MatchesPlacementEnumeration) {
  for (std::uint64_t ways : {1, 2, 4}) {
    for (std::uint64_t sets : {2, 3, 4}) {
      for (std::uint64_t d = 0; d <= 8; ++d) {
        const std::uint64_t b = ways * sets;
        EXPECT_NEAR(CondHitAssoc(D(d), ways, b), EnumeratedHitProbability(d, ways, b), 1e-12)
            << "D=" << d << " A=" << ways << " B=" << b;
      }
    }
  }
}

TEST(CondHitAssoc, RejectsBadGeometry) {
  EXPECT_THROW(CondHitAssoc(D(1), 0, 4), InvalidArgument);
  EXPECT_THROW(CondHitAssoc(D(1), 8, 4), InvalidArgument);
  EXPECT_THROW(CondHitDirect(D(1), 0), InvalidArgument);
}

TEST(CondHitAssoc, LargeDistancesStayFiniteAndSmall) {
  const double p = CondHitAssoc(D(1'000'000), 8, 512);
  EXPECT_TRUE(std::isfinite(p));
  EXPECT_GE(p, 0.0);
  EXPECT_LT(p, 1e-12);
  EXPECT_TRUE(std::isfinite(CondHitAssoc(D(5000), 16, 4096)));
}

TEST(CondHitDirect, Examples) {
  EXPECT_EQ(CondHitDirect(D(0), 1), 1.0);
  EXPECT_EQ(CondHitDirect(D(0), 4096), 1.0);
  EXPECT_NEAR(CondHitDirect(D(3), 4), 27.0 / 64, 1e-15);
  EXPECT_EQ(CondHitDirect(D(1), 1), 0.0);
}

TEST(CondHitDirect, MatchesOneWayAssoc) {
  for (std::uint64_t b = 1; b <= 4096; b *= 2) {
    for (std::uint64_t d = 0; d <= 64; ++d) {
      EXPECT_NEAR(CondHitAssoc(D(d), 1, b), CondHitDirect(D(d), b), 1e-12);
    }
  }
}

TEST(CondHitAssoc, NonIncreasingInDistance) {
  for (std::uint64_t ways : {1, 2, 8}) {
    for (std::uint64_t b = ways; b <= 4096; b *= 2) {
      double prev = 1.0;
      for (std::uint64_t d = 0; d <= 200; ++d) {
        const double p = CondHitAssoc(D(d), ways, b);
        EXPECT_LE(p, prev + 1e-15);
        prev = p;
      }
    }
  }
}

TEST(CondHitAssoc, NonDecreasingInCapacity) {
  for (std::uint64_t d = 0; d <= 100; d += 3) {
    double prev = 0.0;
    for (std::uint64_t sets = 1; sets <= 512; sets *= 2) {
      const double p = CondHitAssoc(D(d), 4, 4 * sets);
      EXPECT_GE(p + 1e-15, prev);
      prev = p;
    }
  }
}

ReuseProfile ReferenceProfile() {
  return BuildProfile(ReuseDistancesTree(Symbols("wxwyxzzw")), 1);
}

TEST(HitRate, ReferenceFullyAssociativeFour) {
  EXPECT_DOUBLE_EQ(HitRate(ReferenceProfile(), Level("F", 4, 1, 0)), 0.5);
}

TEST(HitRate, ReferenceDirectMappedFour) {
  const double want = (1.0 + 0.75 + 9.0 / 16 + 27.0 / 64) / 8;
  EXPECT_NEAR(HitRate(ReferenceProfile(), Level("D", 4, 1, 1)), want, 1e-12);
  EXPECT_NEAR(want, 0.3418, 1e-4);
}

TEST(HitRate, AllInfiniteIsZero) {
  EXPECT_EQ(HitRate(BuildProfile(ReuseDistancesTree(Symbols("abcdef"))), Level("X", 8, 1, 2)),
            0.0);
}

TEST(HitRate, RejectsLineSizeMismatch) {
  EXPECT_THROW(HitRate(ReferenceProfile(), Level("L", 4096, 64, 8)), InvalidArgument);
}

TEST(CacheLevelConfig, Validation) {
  EXPECT_NO_THROW(Level("ok", 32768, 64, 8).Validate());
  EXPECT_THROW(Level("line", 32768, 48, 8).Validate(), InvalidArgument);
  EXPECT_THROW(Level("tiny", 32, 64, 1).Validate(), InvalidArgument);
  EXPECT_THROW(Level("ways", 64 * 12, 64, 5).Validate(), InvalidArgument);
  EXPECT_THROW(Level("big", 64 * 4, 64, 8).Validate(), InvalidArgument);
  const auto c = Level("c", 32768, 64, 8);
  EXPECT_EQ(c.blocks(), 512u);
  EXPECT_EQ(c.sets(), 64u);
}

TEST(SimulateLru, ReferenceFullyAssociativeFour) {
  EXPECT_DOUBLE_EQ(SimulateLru(SingleBlockTrace(Symbols("wxwyxzzw")), Level("F", 4 * 8, 8, 0)),
                   0.5);
}

TEST(SimulateLru, DirectMappedThrash) {
  const auto r = SimulateLruCounts(SingleBlockTrace(Symbols("abab")), Level("D", 8, 8, 1));
  EXPECT_EQ(r.hits, 0u);
  EXPECT_EQ(r.accesses, 4u);
}

TEST(SimulateLru, MatchesVectorOracle) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::uint64_t> a(3000);
    for (auto& x : a) x = (rng() % 4096) * 8;
    for (std::uint64_t ways : {1, 2, 4, 8}) {
      const auto cfg = Level("X", 64 * 32, 64, ways);
      EXPECT_DOUBLE_EQ(SimulateLru(SingleBlockTrace(a), cfg),
                       VectorLruOracle(a, 64, cfg.sets(), ways));
    }
  }
}

TEST(SimulateLru, FullyAssociativeEqualsModelExactly) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::uint64_t> a(2000);
    for (auto& x : a) x = (rng() % 700) * 16;
    const auto t = SingleBlockTrace(a);
    for (std::uint64_t lines : {1, 8, 64, 256}) {
      const auto cfg = Level("F", lines * 64, 64, 0);
      EXPECT_EQ(HitRate(ProfileTrace(t, 64), cfg), SimulateLru(t, cfg));
    }
  }
}

TEST(SimulateLru, EightWayModelTracksSimulation) {
  double sum = 0;
  const int traces = 20;
  for (int seed = 0; seed < traces; ++seed) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(seed) + 100);
    std::vector<std::uint64_t> a(20000);
    for (auto& x : a) x = (rng() % 1500) * 64;
    const auto t = SingleBlockTrace(a);
    const auto cfg = Level("S", 64 * 1024, 64, 8);
    sum += std::abs(HitRate(ProfileTrace(t, 64), cfg) - SimulateLru(t, cfg));
  }
  EXPECT_LE(sum / traces, 0.02);
}

TEST(Hierarchy, OneCoreMatchesDirectSingleTraceRates) {
  const auto m = TinyMachine();
  const auto t = GenerateSyntheticTrace(RandomWorkloadSpec(4, 4, 10, 30, 2000, true), 4);
  const std::vector<MemoryTrace> privates{t};
  const auto report = PredictHierarchy(privates, t, m);
  for (const auto& level : m.levels) {
    EXPECT_DOUBLE_EQ(report.level(level.name), HitRate(ProfileTrace(t, level.line_size), level));
  }
  EXPECT_EQ(report.num_cores, 1u);
}

TEST(Hierarchy, SymmetricCoresReportEqualRates) {
  // No shared blocks and one block type whose instances divide evenly.
  WorkloadSpec spec;
  spec.blocks = {{{"k", "for.body"}, 8, 32}};
  spec.addresses = {AddressPattern::kSequential, 0x4000, 8, 0, 8};
  const auto t = GenerateSyntheticTrace(spec, 0);
  const auto m = TinyMachine();
  const auto privates = GenPrivateTraces(t, CoreCount(4), {}, ComputeBlockStats(t),
                                         ComputeOffset(t, 64));
  const auto shared = InterleaveTraces(privates, InterleaveStrategy::RoundRobin());
  const auto report = PredictHierarchy(privates, shared, m);
  const double l1 = report.per_core_private.at({0, "L1"});
  for (std::uint32_t k = 1; k < 4; ++k) {
    EXPECT_DOUBLE_EQ(report.per_core_private.at({k, "L1"}), l1);
  }
}

TEST(Hierarchy, SharedOnlyInterleavingShrinksDistances) {
  // Two cores each touching the same three shared lines, overlapping reuse.
  MemoryTrace core_trace;
  const BasicBlockId bb{"f", "shared_var_trace0"};
  core_trace.BeginBlock(bb);
  for (auto a : {0x0, 0x40, 0x80}) core_trace.Access(a);
  core_trace.EndBlock(bb);
  const std::vector<MemoryTrace> privates{core_trace, core_trace};
  const auto merged = InterleaveTraces(privates, InterleaveStrategy::RoundRobin());
  // Merged accesses: u u v v w w, so each second touch has distance 0.
  const auto crd = ReuseDistancesTree(ToLineGranularity(merged, 64));
  ASSERT_EQ(crd.size(), 6u);
  MemoryTrace concatenated = core_trace;
  for (const auto& e : core_trace.events()) concatenated.AppendFrom(core_trace, e);
  const auto naive = ReuseDistancesTree(ToLineGranularity(concatenated, 64));
  std::uint64_t crd_sum = 0, naive_sum = 0;
  for (auto d : crd) crd_sum += d.is_finite() ? d.value() : 0;
  for (auto d : naive) naive_sum += d.is_finite() ? d.value() : 0;
  EXPECT_EQ(crd_sum, 0u);
  EXPECT_EQ(naive_sum, 6u);
  for (int i = 1; i < 6; i += 2) EXPECT_EQ(crd[i], ReuseDistance::Finite(0));
}

TEST(Hierarchy, CsvListsEveryLevel) {
  const auto m = TinyMachine();
  const auto t = SingleBlockTrace(Symbols("abcabcabc"));
  const std::vector<MemoryTrace> privates{t};
  std::ostringstream out;
  WriteHitRateCsv(out, PredictHierarchy(privates, t, m));
  const std::string csv = out.str();
  EXPECT_EQ(csv.rfind("level,core,hit_rate\n", 0), 0u);
  EXPECT_NE(csv.find("L1,mean,"), std::string::npos);
  EXPECT_NE(csv.find("L3,shared,"), std::string::npos);
}

}  // namespace
}  // namespace mcpredict

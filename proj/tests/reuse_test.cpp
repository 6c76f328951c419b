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

#include <numeric>
#include <random>
#include <sstream>

#include "mcpredict/error.hpp"
#include "mcpredict/order_statistic_tree.hpp"
#include "mcpredict/reuse.hpp"
#include "mcpredict/workload.hpp"
#include "test_util.hpp"

namespace mcpredict {
namespace {

using testing::AsSigned;
using testing::DistinctBetweenOracle;
using testing::SingleBlockTrace;
using testing::Symbols;

constexpr long long kInf = -1;

std::vector<long long> Signed(const std::vector<ReuseDistance>& d) {
  std::vector<long long> out;
  for (auto x : d) out.push_back(AsSigned(x));
  return out;
}

TEST(LineGranularity, DividesByLine) {
  const auto t = ToLineGranularity(SingleBlockTrace({0x00, 0x08, 0x40}), 64);
  EXPECT_EQ(t.Addresses(), (std::vector<std::uint64_t>{0, 0, 1}));
}

TEST(LineGranularity, LineOneIsIdentity) {
  const auto src = SingleBlockTrace({5, 17, 0xffff});
  EXPECT_EQ(ToLineGranularity(src, 1), src);
}

TEST(LineGranularity, WholeLineMapsToOneIndex) {
  std::vector<std::uint64_t> a;
  for (std::uint64_t x = 0x100; x <= 0x13F; ++x) a.push_back(x);
  for (auto l : ToLineGranularity(SingleBlockTrace(a), 64).Addresses()) EXPECT_EQ(l, 4u);
  EXPECT_THROW(ToLineGranularity(SingleBlockTrace(a), 48), InvalidArgument);
  EXPECT_THROW(ToLineGranularity(SingleBlockTrace(a), 0), InvalidArgument);
}

TEST(ReuseDistance, ReferenceSequenceNaiveAndTree) {
  const auto a = Symbols("wxwyxzzw");
  const std::vector<long long> want{kInf, kInf, 1, kInf, 2, kInf, 0, 3};
  EXPECT_EQ(Signed(ReuseDistancesNaive(a)), want);
  EXPECT_EQ(Signed(ReuseDistancesTree(a)), want);
  EXPECT_EQ(DistinctBetweenOracle(a), want);
}

TEST(ReuseDistance, ImmediateReuse) {
  const auto a = Symbols("aaa");
  EXPECT_EQ(Signed(ReuseDistancesNaive(a)), (std::vector<long long>{kInf, 0, 0}));
  EXPECT_EQ(Signed(ReuseDistancesTree(a)), (std::vector<long long>{kInf, 0, 0}));
}

TEST(ReuseDistance, AllDistinctAreInfinite) {
  const auto a = Symbols("abcdefg");
  for (auto d : ReuseDistancesNaive(a)) EXPECT_TRUE(d.is_infinite());
  for (auto d : ReuseDistancesTree(a)) EXPECT_TRUE(d.is_infinite());
}

TEST(ReuseDistance, EmptyInput) {
  EXPECT_TRUE(ReuseDistancesNaive(std::vector<std::uint64_t>{}).empty());
  EXPECT_TRUE(ReuseDistancesTree(std::vector<std::uint64_t>{}).empty());
  MemoryTrace only_markers;
  only_markers.BeginBlock({"f", "a"});
  only_markers.EndBlock({"f", "a"});
  EXPECT_TRUE(ReuseDistancesTree(only_markers).empty());
}

TEST(ReuseDistance, InterleavedSequenceDilation) {
  // u w v u y x v x u v: positions are 1-based.
  const auto d = Signed(ReuseDistancesTree(Symbols("uwvuyxvxuv")));
  EXPECT_EQ(d[3], 2);
  EXPECT_EQ(d[8], 3);
  EXPECT_EQ(d[9], 2);
  EXPECT_EQ(d, Signed(ReuseDistancesNaive(Symbols("uwvuyxvxuv"))));
}

TEST(ReuseDistance, FormattingAndOrder) {
  EXPECT_EQ(ReuseDistance::Infinite().ToString(), "inf");
  EXPECT_EQ(ReuseDistance::Finite(12).ToString(), "12");
  EXPECT_LT(ReuseDistance::Finite(1000000), ReuseDistance::Infinite());
  std::ostringstream s;
  s << ReuseDistance::Finite(3);
  EXPECT_EQ(s.str(), "3");
}

TEST(ReuseDistance, ExhaustiveSmallTracesAgree) {
  for (int len = 0; len <= 6; ++len) {
    int total = 1;
    for (int i = 0; i < len; ++i) total *= 3;
    for (int code = 0; code < total; ++code) {
      std::vector<std::uint64_t> a;
      for (int i = 0, c = code; i < len; ++i, c /= 3) a.push_back(static_cast<std::uint64_t>(c % 3));
      const auto oracle = DistinctBetweenOracle(a);
      ASSERT_EQ(Signed(ReuseDistancesNaive(a)), oracle);
      ASSERT_EQ(Signed(ReuseDistancesTree(a)), oracle);
    }
  }
}

TEST(ReuseDistance, RandomTracesAgree) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<std::uint64_t> a(10000);
    for (auto& x : a) x = rng() % 500;
    EXPECT_EQ(ReuseDistancesNaive(a), ReuseDistancesTree(a));
  }
  std::vector<std::uint64_t> small(400);
  for (auto& x : small) x = rng() % 40;
  EXPECT_EQ(Signed(ReuseDistancesTree(small)), DistinctBetweenOracle(small));
}

TEST(ReuseDistance, BoundedByDistinctCount) {
  std::mt19937_64 rng(5);
  std::vector<std::uint64_t> a(3000);
  for (auto& x : a) x = rng() % 97;
  for (auto d : ReuseDistancesTree(a)) {
    if (d.is_finite()) EXPECT_LT(d.value(), 97u);
  }
}

TEST(OrderStatisticTree, MatchesSortedVector) {
  OrderStatisticTree tree;
  std::vector<std::uint64_t> ref;
  std::mt19937_64 rng(17);
  for (int i = 0; i < 5000; ++i) {
    const std::uint64_t k = rng() % 2000;
    const bool has = std::find(ref.begin(), ref.end(), k) != ref.end();
    ASSERT_EQ(tree.Contains(k), has);
    if (has && rng() % 2) {
      tree.Erase(k);
      ref.erase(std::find(ref.begin(), ref.end(), k));
    } else if (!has) {
      tree.Insert(k);
      ref.push_back(k);
    }
    const std::uint64_t q = rng() % 2000;
    const auto greater = std::count_if(ref.begin(), ref.end(), [&](auto x) { return x > q; });
    ASSERT_EQ(tree.CountGreater(q), static_cast<std::size_t>(greater));
    ASSERT_EQ(tree.size(), ref.size());
  }
}

TEST(Profile, ReferenceSequence) {
  const auto p = BuildProfile(ReuseDistancesTree(Symbols("wxwyxzzw")));
  for (std::uint64_t d = 0; d < 4; ++d) {
    EXPECT_EQ(p.count(ReuseDistance::Finite(d)), 1u);
    EXPECT_DOUBLE_EQ(p.probability(ReuseDistance::Finite(d)), 1.0 / 8);
  }
  EXPECT_EQ(p.count(ReuseDistance::Infinite()), 4u);
  EXPECT_DOUBLE_EQ(p.infinite_probability(), 0.5);
  EXPECT_EQ(p.total, 8u);
}

TEST(Profile, Degenerate) {
  const auto inf = BuildProfile(std::vector<ReuseDistance>{ReuseDistance::Infinite()});
  EXPECT_EQ(inf.infinite_probability(), 1.0);
  const std::vector<ReuseDistance> zeros(4, ReuseDistance::Finite(0));
  EXPECT_EQ(BuildProfile(zeros).probability(ReuseDistance::Finite(0)), 1.0);
  EXPECT_THROW(BuildProfile(std::vector<ReuseDistance>{}), InvalidArgument);
}

TEST(Profile, ProbabilitiesSumToOne) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto t = GenerateSyntheticTrace(RandomWorkloadSpec(seed, 5, 8, 20, 300, false), seed);
    const auto p = ProfileTrace(t, 64);
    double sum = p.infinite_probability();
    std::uint64_t n = p.infinite;
    for (const auto& [d, c] : p.finite) {
      sum += p.probability(ReuseDistance::Finite(d));
      n += c;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_EQ(n, t.AccessCount());
    EXPECT_EQ(p.line_size, 64u);
  }
}

TEST(Profile, TextRoundTrip) {
  auto p = ProfileTrace(SingleBlockTrace(Symbols("wxwyxzzwabcabc")), 1);
  std::stringstream s;
  WriteProfile(s, p);
  EXPECT_EQ(ReadProfile(s), p);

  const auto b = BinPowerOfTwo(p);
  std::stringstream s2;
  WriteProfile(s2, b);
  EXPECT_EQ(ReadProfile(s2), b);
  EXPECT_TRUE(b.binned);
  EXPECT_EQ(b.total, p.total);
}

TEST(Profile, BinningKeepsMassAndUsesPowersOfTwo) {
  std::mt19937_64 rng(8);
  std::vector<std::uint64_t> a(5000);
  for (auto& x : a) x = rng() % 300;
  const auto p = BuildProfile(ReuseDistancesTree(a));
  const auto b = BinPowerOfTwo(p);
  std::uint64_t mass = b.infinite;
  for (const auto& [d, c] : b.finite) {
    EXPECT_TRUE(d == 0 || (d & (d - 1)) == 0) << d;
    mass += c;
  }
  EXPECT_EQ(mass, p.total);
  EXPECT_EQ(b.infinite, p.infinite);
}

TEST(Profile, RejectsMalformedText) {
  std::istringstream bad1("# line_size=64\n3,x\n");
  EXPECT_THROW(ReadProfile(bad1), ParseError);
  std::istringstream bad2("# line_size=64\n");
  EXPECT_THROW(ReadProfile(bad2), Error);
}

}  // namespace
}  // namespace mcpredict

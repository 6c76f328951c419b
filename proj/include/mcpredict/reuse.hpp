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

#ifndef MCPREDICT_REUSE_HPP_
#define MCPREDICT_REUSE_HPP_

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mcpredict/order_statistic_tree.hpp"
#include "mcpredict/trace.hpp"

namespace mcpredict {

// Number of distinct addresses touched since the previous access to the same
// address; infinite for a first touch.
class ReuseDistance {
 public:
  static constexpr ReuseDistance Infinite() { return ReuseDistance(kInfinite); }
  static constexpr ReuseDistance Finite(std::uint64_t d) { return ReuseDistance(d); }

  constexpr bool is_infinite() const { return value_ == kInfinite; }
  constexpr bool is_finite() const { return value_ != kInfinite; }
  // Finite distance; undefined for Infinite().
  constexpr std::uint64_t value() const { return value_; }

  // Infinite orders after every finite distance.
  friend constexpr auto operator<=>(ReuseDistance, ReuseDistance) = default;

  std::string ToString() const;

 private:
  static constexpr std::uint64_t kInfinite = std::numeric_limits<std::uint64_t>::max();
  constexpr explicit ReuseDistance(std::uint64_t v) : value_(v) {}
  std::uint64_t value_;
};

std::ostream& operator<<(std::ostream& os, ReuseDistance d);

// Replaces every address by its line number, address / line_size. Throws
// InvalidArgument unless line_size is a power of two.
MemoryTrace ToLineGranularity(const MemoryTrace& trace, std::uint64_t line_size);

// LRU-stack reference implementation, O(N * M).
std::vector<ReuseDistance> ReuseDistancesNaive(std::span<const std::uint64_t> addresses);
std::vector<ReuseDistance> ReuseDistancesNaive(const MemoryTrace& trace);

// Online stack-distance computation in expected O(log M) per access: the
// last-access time of every address lives in an order-statistic tree, and
// the distance of a reuse is the number of times newer than the previous
// access to the same address.
class StackDistanceCounter {
 public:
  ReuseDistance Access(std::uint64_t address);

  std::size_t distinct() const { return last_access_.size(); }

 private:
  std::uint64_t clock_ = 0;
  std::unordered_map<std::uint64_t, std::uint64_t> last_access_;
  OrderStatisticTree recency_;
};

std::vector<ReuseDistance> ReuseDistancesTree(std::span<const std::uint64_t> addresses);
std::vector<ReuseDistance> ReuseDistancesTree(const MemoryTrace& trace);

// Histogram of reuse distances, P(D). `line_size` records the granularity the
// distances were measured at (1 = bytes).
struct ReuseProfile {
  std::map<std::uint64_t, std::uint64_t> finite;
  std::uint64_t infinite = 0;
  std::uint64_t total = 0;
  std::uint64_t line_size = 1;
  bool binned = false;

  std::uint64_t count(ReuseDistance d) const;
  double probability(ReuseDistance d) const;
  double infinite_probability() const;

  friend bool operator==(const ReuseProfile&, const ReuseProfile&) = default;
};

// Throws InvalidArgument for an empty sequence.
ReuseProfile BuildProfile(std::span<const ReuseDistance> distances,
                          std::uint64_t line_size = 1);

// Maps `trace` to `line_size` and builds its profile in one pass.
ReuseProfile ProfileTrace(const MemoryTrace& trace, std::uint64_t line_size);

// Coarsens finite distances to power-of-two buckets (0, 1, 2, 4, 8, ...),
// each bucket keyed by its lower bound.
ReuseProfile BinPowerOfTwo(const ReuseProfile& profile);

// "distance,count" rows in ascending distance order, "inf" last, preceded by
// a "# line_size=N" comment line.
void WriteProfile(std::ostream& out, const ReuseProfile& profile);
ReuseProfile ReadProfile(std::istream& in);

}  // namespace mcpredict

#endif  // MCPREDICT_REUSE_HPP_

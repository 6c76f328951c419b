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

#include "mcpredict/reuse.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <istream>
#include <ostream>
#include <string>

#include "mcpredict/error.hpp"

namespace mcpredict {

// ---------------------------------------------------------------------------
// OrderStatisticTree

std::uint32_t OrderStatisticTree::NextPriority() {
  // xorshift64*
  prng_state_ ^= prng_state_ >> 12;
  prng_state_ ^= prng_state_ << 25;
  prng_state_ ^= prng_state_ >> 27;
  return static_cast<std::uint32_t>((prng_state_ * 0x2545F4914F6CDD1DULL) >> 32);
}

OrderStatisticTree::Index OrderStatisticTree::NewNode(std::uint64_t key) {
  const Node node{key, NextPriority(), 1, kNil, kNil};
  if (!free_.empty()) {
    const Index t = free_.back();
    free_.pop_back();
    nodes_[t] = node;
    return t;
  }
  nodes_.push_back(node);
  return static_cast<Index>(nodes_.size() - 1);
}

void OrderStatisticTree::Split(Index t, std::uint64_t key, Index* lo, Index* hi) {
  if (t == kNil) {
    *lo = *hi = kNil;
    return;
  }
  if (nodes_[t].key < key) {
    Split(nodes_[t].right, key, &nodes_[t].right, hi);
    *lo = t;
  } else {
    Split(nodes_[t].left, key, lo, &nodes_[t].left);
    *hi = t;
  }
  Update(t);
}

OrderStatisticTree::Index OrderStatisticTree::Merge(Index lo, Index hi) {
  if (lo == kNil) return hi;
  if (hi == kNil) return lo;
  if (nodes_[lo].priority > nodes_[hi].priority) {
    nodes_[lo].right = Merge(nodes_[lo].right, hi);
    Update(lo);
    return lo;
  }
  nodes_[hi].left = Merge(lo, nodes_[hi].left);
  Update(hi);
  return hi;
}

void OrderStatisticTree::Insert(std::uint64_t key) {
  if (Contains(key)) return;
  Index lo, hi;
  Split(root_, key, &lo, &hi);
  root_ = Merge(Merge(lo, NewNode(key)), hi);
}

bool OrderStatisticTree::Erase(std::uint64_t key) {
  Index lo, rest;
  Split(root_, key, &lo, &rest);
  Index mid = kNil, hi = rest;
  if (key != std::numeric_limits<std::uint64_t>::max()) {
    Split(rest, key + 1, &mid, &hi);
  } else {
    mid = rest;
    hi = kNil;
  }
  const bool found = mid != kNil;
  if (found) free_.push_back(mid);  // mid holds exactly the one node
  root_ = Merge(lo, hi);
  return found;
}

bool OrderStatisticTree::Contains(std::uint64_t key) const {
  Index t = root_;
  while (t != kNil) {
    if (key == nodes_[t].key) return true;
    t = key < nodes_[t].key ? nodes_[t].left : nodes_[t].right;
  }
  return false;
}

std::size_t OrderStatisticTree::CountGreater(std::uint64_t key) const {
  std::size_t n = 0;
  Index t = root_;
  while (t != kNil) {
    if (nodes_[t].key > key) {
      n += 1 + Size(nodes_[t].right);
      t = nodes_[t].left;
    } else {
      t = nodes_[t].right;
    }
  }
  return n;
}

// ---------------------------------------------------------------------------
// Distances

std::string ReuseDistance::ToString() const {
  return is_infinite() ? "inf" : std::to_string(value_);
}

std::ostream& operator<<(std::ostream& os, ReuseDistance d) {
  return os << d.ToString();
}

MemoryTrace ToLineGranularity(const MemoryTrace& trace, std::uint64_t line_size) {
  if (line_size == 0 || !std::has_single_bit(line_size)) {
    throw InvalidArgument("line size " + std::to_string(line_size) +
                          " is not a power of two");
  }
  const int shift = std::countr_zero(line_size);
  MemoryTrace out;
  for (const auto& bb : trace.blocks()) out.Intern(bb);
  out.Reserve(trace.size());
  for (const auto& e : trace.events()) {
    out.Append(e.is_access() ? TraceEvent{e.kind, e.value >> shift} : e);
  }
  return out;
}

std::vector<ReuseDistance> ReuseDistancesNaive(std::span<const std::uint64_t> addresses) {
  // Most recently used address at the back.
  std::vector<std::uint64_t> stack;
  std::vector<ReuseDistance> out;
  out.reserve(addresses.size());
  for (const auto a : addresses) {
    const auto it = std::find(stack.rbegin(), stack.rend(), a);
    if (it == stack.rend()) {
      out.push_back(ReuseDistance::Infinite());
    } else {
      out.push_back(ReuseDistance::Finite(
          static_cast<std::uint64_t>(std::distance(stack.rbegin(), it))));
      stack.erase(std::next(it).base());
    }
    stack.push_back(a);
  }
  return out;
}

std::vector<ReuseDistance> ReuseDistancesNaive(const MemoryTrace& trace) {
  const auto addresses = trace.Addresses();
  return ReuseDistancesNaive(std::span<const std::uint64_t>(addresses));
}

ReuseDistance StackDistanceCounter::Access(std::uint64_t address) {
  const std::uint64_t now = clock_++;
  const auto [it, inserted] = last_access_.try_emplace(address, now);
  if (inserted) {
    recency_.Insert(now);
    return ReuseDistance::Infinite();
  }
  const std::uint64_t previous = it->second;
  const auto d = recency_.CountGreater(previous);
  recency_.Erase(previous);
  recency_.Insert(now);
  it->second = now;
  return ReuseDistance::Finite(d);
}

std::vector<ReuseDistance> ReuseDistancesTree(std::span<const std::uint64_t> addresses) {
  StackDistanceCounter counter;
  std::vector<ReuseDistance> out;
  out.reserve(addresses.size());
  for (const auto a : addresses) out.push_back(counter.Access(a));
  return out;
}

std::vector<ReuseDistance> ReuseDistancesTree(const MemoryTrace& trace) {
  StackDistanceCounter counter;
  std::vector<ReuseDistance> out;
  for (const auto& e : trace.events()) {
    if (e.is_access()) out.push_back(counter.Access(e.value));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Profiles

std::uint64_t ReuseProfile::count(ReuseDistance d) const {
  if (d.is_infinite()) return infinite;
  const auto it = finite.find(d.value());
  return it == finite.end() ? 0 : it->second;
}

double ReuseProfile::probability(ReuseDistance d) const {
  return total == 0 ? 0.0
                    : static_cast<double>(count(d)) / static_cast<double>(total);
}

double ReuseProfile::infinite_probability() const {
  return probability(ReuseDistance::Infinite());
}

ReuseProfile BuildProfile(std::span<const ReuseDistance> distances,
                          std::uint64_t line_size) {
  if (distances.empty()) throw InvalidArgument("cannot build a profile from no distances");
  ReuseProfile p;
  p.line_size = line_size;
  for (const auto d : distances) {
    if (d.is_infinite()) {
      ++p.infinite;
    } else {
      ++p.finite[d.value()];
    }
  }
  p.total = distances.size();
  return p;
}

ReuseProfile ProfileTrace(const MemoryTrace& trace, std::uint64_t line_size) {
  if (line_size == 0 || !std::has_single_bit(line_size)) {
    throw InvalidArgument("line size " + std::to_string(line_size) +
                          " is not a power of two");
  }
  const int shift = std::countr_zero(line_size);
  StackDistanceCounter counter;
  ReuseProfile p;
  p.line_size = line_size;
  for (const auto& e : trace.events()) {
    if (!e.is_access()) continue;
    const auto d = counter.Access(e.value >> shift);
    if (d.is_infinite()) {
      ++p.infinite;
    } else {
      ++p.finite[d.value()];
    }
    ++p.total;
  }
  if (p.total == 0) throw InvalidArgument("cannot profile a trace without accesses");
  return p;
}

ReuseProfile BinPowerOfTwo(const ReuseProfile& profile) {
  ReuseProfile out = profile;
  out.finite.clear();
  out.binned = true;
  for (const auto& [d, n] : profile.finite) {
    const std::uint64_t bucket = d == 0 ? 0 : std::bit_floor(d);
    out.finite[bucket] += n;
  }
  return out;
}

void WriteProfile(std::ostream& out, const ReuseProfile& profile) {
  out << "# line_size=" << profile.line_size;
  if (profile.binned) out << " binned=log2";
  out << '\n';
  for (const auto& [d, n] : profile.finite) out << d << ',' << n << '\n';
  if (profile.infinite > 0) out << "inf," << profile.infinite << '\n';
}

ReuseProfile ReadProfile(std::istream& in) {
  ReuseProfile p;
  std::string line;
  std::size_t lineno = 0;
  const auto parse_u64 = [&](std::string_view s) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw ParseError("expected an unsigned integer", lineno, line);
    }
    return v;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto pos = line.find("line_size=");
      if (pos != std::string::npos) {
        const auto start = pos + 10;
        const auto end = line.find(' ', start);
        p.line_size = parse_u64(std::string_view(line).substr(
            start, end == std::string::npos ? std::string::npos : end - start));
      }
      if (line.find("binned=log2") != std::string::npos) p.binned = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError("expected distance,count", lineno, line);
    const std::string_view key = std::string_view(line).substr(0, comma);
    const std::uint64_t n = parse_u64(std::string_view(line).substr(comma + 1));
    if (key == "inf") {
      p.infinite += n;
    } else {
      p.finite[parse_u64(key)] += n;
    }
    p.total += n;
  }
  if (p.total == 0) throw ParseError("profile has no samples");
  return p;
}

}  // namespace mcpredict

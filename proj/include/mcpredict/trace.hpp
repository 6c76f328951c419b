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

#ifndef MCPREDICT_TRACE_HPP_
#define MCPREDICT_TRACE_HPP_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace mcpredict {

inline constexpr char kFieldSeparator = ':';
inline constexpr std::string_view kBlockStartTag = "BB_START";
inline constexpr std::string_view kBlockEndTag = "BB_END";
inline constexpr std::string_view kDefaultSharedPrefix = "shared_var_trace";

// A basic block is identified by the function it lives in and its label,
// e.g. {"omp_outlined", "for.body"}.
struct BasicBlockId {
  std::string function;
  std::string label;

  BasicBlockId() = default;
  // Throws InvalidArgument if either field is empty or contains the
  // separator or a line break.
  BasicBlockId(std::string function, std::string label);

  std::string ToString() const;  // "function:label"

  friend bool operator==(const BasicBlockId&, const BasicBlockId&) = default;
  friend auto operator<=>(const BasicBlockId&, const BasicBlockId&) = default;
};

// Parses "function:label".
BasicBlockId ParseBlockId(std::string_view text);

enum class EventKind : std::uint8_t { kBlockStart, kAccess, kBlockEnd };

// One trace line. For markers `value` is an index into the owning trace's
// block table; for accesses it is the byte address.
struct TraceEvent {
  EventKind kind;
  std::uint64_t value;

  bool is_access() const { return kind == EventKind::kAccess; }
  bool is_marker() const { return kind != EventKind::kAccess; }

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

// Ordered sequence of block markers and memory accesses from one execution.
// Block ids are interned into a per-trace table so events stay 16 bytes.
class MemoryTrace {
 public:
  using BlockIndex = std::uint32_t;

  BlockIndex Intern(const BasicBlockId& bb);

  void BeginBlock(const BasicBlockId& bb);
  void BeginBlock(BlockIndex idx);
  void Access(std::uint64_t address);
  void EndBlock(const BasicBlockId& bb);
  void EndBlock(BlockIndex idx);

  // Appends a raw event; marker values must index this trace's block table.
  void Append(const TraceEvent& event) { events_.push_back(event); }

  // Appends `event` taken from `source`, translating its block index into
  // this trace's table.
  void AppendFrom(const MemoryTrace& source, const TraceEvent& event);

  void Reserve(std::size_t n) { events_.reserve(n); }

  const std::vector<TraceEvent>& events() const { return events_; }
  const std::vector<BasicBlockId>& blocks() const { return blocks_; }
  const BasicBlockId& block(BlockIndex idx) const { return blocks_.at(idx); }
  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }

  std::size_t AccessCount() const;
  std::vector<std::uint64_t> Addresses() const;

  // Event-wise equality with block ids compared by value, so two traces with
  // differently ordered block tables can still be equal.
  friend bool operator==(const MemoryTrace& a, const MemoryTrace& b);

 private:
  BlockIndex TableIndex(const BasicBlockId& bb);

  std::vector<BasicBlockId> blocks_;
  std::map<BasicBlockId, BlockIndex> index_;
  std::vector<TraceEvent> events_;
};

// kStrict: blocks nest at depth exactly one and every BB_END closes the open
// block. kInterleaved: accepted for merged multi-core traces, where markers
// of different cores overlap; per-block open/close counts must balance and
// every access must fall inside at least one open block.
enum class Nesting { kStrict, kInterleaved };

// Throws ParseError on the first violation.
void Validate(const MemoryTrace& trace, Nesting nesting = Nesting::kStrict);

MemoryTrace ParseTrace(std::istream& in, Nesting nesting = Nesting::kStrict);
MemoryTrace ParseTrace(std::string_view text,
                       Nesting nesting = Nesting::kStrict);
MemoryTrace ReadTraceFile(const std::filesystem::path& path,
                          Nesting nesting = Nesting::kStrict);

void WriteTrace(std::ostream& out, const MemoryTrace& trace);
std::string SerializeTrace(const MemoryTrace& trace);
void WriteTraceFile(const std::filesystem::path& path,
                    const MemoryTrace& trace);

// Execution count of each basic block, i.e. its number of BB_START events.
struct BlockStats {
  std::map<BasicBlockId, std::uint64_t> counts;

  // 0 for a block that never ran.
  std::uint64_t count(const BasicBlockId& bb) const;
  std::uint64_t total() const;
};

BlockStats ComputeBlockStats(const MemoryTrace& trace);

// Addresses touched by shared-variable blocks.
struct SharedRefSet {
  std::unordered_set<std::uint64_t> addresses;

  bool contains(std::uint64_t address) const {
    return addresses.count(address) != 0;
  }
  std::size_t size() const { return addresses.size(); }
  bool empty() const { return addresses.empty(); }
};

// Every distinct address accessed inside a block whose label begins with
// `label_prefix`.
SharedRefSet CollectSharedRefs(const MemoryTrace& trace,
                               std::string_view label_prefix =
                                   kDefaultSharedPrefix);

}  // namespace mcpredict

#endif  // MCPREDICT_TRACE_HPP_

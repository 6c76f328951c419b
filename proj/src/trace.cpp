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

#include "mcpredict/trace.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "mcpredict/error.hpp"

namespace mcpredict {
namespace {

bool ValidField(std::string_view s) {
  return !s.empty() && s.find(kFieldSeparator) == std::string_view::npos &&
         s.find('\n') == std::string_view::npos &&
         s.find('\r') == std::string_view::npos;
}

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool ParseHexAddress(std::string_view s, std::uint64_t* out) {
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
    s.remove_prefix(2);
  }
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), *out, 16);
  return ec == std::errc() && ptr == s.data() + s.size();
}

// Incremental checker shared by Validate and ParseTrace.
class NestingChecker {
 public:
  explicit NestingChecker(Nesting nesting) : nesting_(nesting) {}

  // Each returns an error message, empty on success.
  std::string Start(MemoryTrace::BlockIndex idx) {
    if (nesting_ == Nesting::kStrict) {
      if (open_ >= 0) return "nested BB_START inside an open block";
      open_ = static_cast<std::int64_t>(idx);
    } else {
      Grow(idx);
      ++open_counts_[idx];
      ++total_open_;
    }
    ++starts_;
    return {};
  }

  std::string End(MemoryTrace::BlockIndex idx) {
    if (nesting_ == Nesting::kStrict) {
      if (open_ < 0) return "unbalanced BB_END without an open block";
      if (open_ != static_cast<std::int64_t>(idx)) {
        return "unbalanced BB_END does not match the open block";
      }
      open_ = -1;
    } else {
      Grow(idx);
      if (open_counts_[idx] == 0) {
        return "unbalanced BB_END without a matching BB_START";
      }
      --open_counts_[idx];
      --total_open_;
    }
    return {};
  }

  std::string Access() const {
    const bool inside =
        nesting_ == Nesting::kStrict ? open_ >= 0 : total_open_ > 0;
    return inside ? std::string() : "memory access outside of any block";
  }

  std::string Finish() const {
    if (starts_ == 0) return "trace must contain at least one block";
    const bool closed =
        nesting_ == Nesting::kStrict ? open_ < 0 : total_open_ == 0;
    return closed ? std::string() : "unbalanced trace: block left open at end";
  }

 private:
  void Grow(MemoryTrace::BlockIndex idx) {
    if (open_counts_.size() <= idx) open_counts_.resize(idx + 1, 0);
  }

  Nesting nesting_;
  std::int64_t open_ = -1;
  std::vector<std::uint64_t> open_counts_;
  std::uint64_t total_open_ = 0;
  std::uint64_t starts_ = 0;
};

}  // namespace

BasicBlockId::BasicBlockId(std::string fn, std::string lbl)
    : function(std::move(fn)), label(std::move(lbl)) {
  if (!ValidField(function) || !ValidField(label)) {
    throw InvalidArgument("invalid basic block id '" + function + ":" + label +
                          "'");
  }
}

std::string BasicBlockId::ToString() const {
  return function + kFieldSeparator + label;
}

BasicBlockId ParseBlockId(std::string_view text) {
  const auto sep = text.find(kFieldSeparator);
  if (sep == std::string_view::npos) {
    throw InvalidArgument("block id '" + std::string(text) +
                          "' must have the form function:label");
  }
  return BasicBlockId(std::string(text.substr(0, sep)),
                      std::string(text.substr(sep + 1)));
}

MemoryTrace::BlockIndex MemoryTrace::TableIndex(const BasicBlockId& bb) {
  const auto it = index_.find(bb);
  if (it != index_.end()) return it->second;
  const auto idx = static_cast<BlockIndex>(blocks_.size());
  blocks_.push_back(bb);
  index_.emplace(bb, idx);
  return idx;
}

MemoryTrace::BlockIndex MemoryTrace::Intern(const BasicBlockId& bb) {
  return TableIndex(bb);
}

void MemoryTrace::BeginBlock(const BasicBlockId& bb) {
  events_.push_back({EventKind::kBlockStart, TableIndex(bb)});
}

void MemoryTrace::BeginBlock(BlockIndex idx) {
  events_.push_back({EventKind::kBlockStart, idx});
}

void MemoryTrace::Access(std::uint64_t address) {
  events_.push_back({EventKind::kAccess, address});
}

void MemoryTrace::EndBlock(const BasicBlockId& bb) {
  events_.push_back({EventKind::kBlockEnd, TableIndex(bb)});
}

void MemoryTrace::EndBlock(BlockIndex idx) {
  events_.push_back({EventKind::kBlockEnd, idx});
}

void MemoryTrace::AppendFrom(const MemoryTrace& source,
                             const TraceEvent& event) {
  if (event.is_access() || &source == this) {
    events_.push_back(event);
    return;
  }
  const auto idx = TableIndex(source.block(static_cast<BlockIndex>(event.value)));
  events_.push_back({event.kind, idx});
}

std::size_t MemoryTrace::AccessCount() const {
  std::size_t n = 0;
  for (const auto& e : events_) n += e.is_access() ? 1 : 0;
  return n;
}

std::vector<std::uint64_t> MemoryTrace::Addresses() const {
  std::vector<std::uint64_t> out;
  out.reserve(events_.size());
  for (const auto& e : events_) {
    if (e.is_access()) out.push_back(e.value);
  }
  return out;
}

bool operator==(const MemoryTrace& a, const MemoryTrace& b) {
  if (a.events_.size() != b.events_.size()) return false;
  for (std::size_t i = 0; i < a.events_.size(); ++i) {
    const auto& x = a.events_[i];
    const auto& y = b.events_[i];
    if (x.kind != y.kind) return false;
    if (x.is_access()) {
      if (x.value != y.value) return false;
    } else if (a.blocks_[x.value] != b.blocks_[y.value]) {
      return false;
    }
  }
  return true;
}

void Validate(const MemoryTrace& trace, Nesting nesting) {
  NestingChecker checker(nesting);
  std::size_t position = 0;
  for (const auto& e : trace.events()) {
    ++position;
    std::string err;
    switch (e.kind) {
      case EventKind::kBlockStart:
        err = checker.Start(static_cast<MemoryTrace::BlockIndex>(e.value));
        break;
      case EventKind::kBlockEnd:
        err = checker.End(static_cast<MemoryTrace::BlockIndex>(e.value));
        break;
      case EventKind::kAccess:
        err = checker.Access();
        break;
    }
    if (!err.empty()) throw ParseError(err, position);
  }
  if (auto err = checker.Finish(); !err.empty()) throw ParseError(err);
}

MemoryTrace ParseTrace(std::istream& in, Nesting nesting) {
  MemoryTrace trace;
  NestingChecker checker(nesting);
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string_view line = Trim(raw);
    if (line.empty() || line.front() == '#') continue;

    const auto parse_marker = [&](std::string_view tag) {
      // "<tag>:<function>:<label>"
      const std::string_view rest = line.substr(tag.size() + 1);
      const auto sep = rest.find(kFieldSeparator);
      if (sep == std::string_view::npos || sep == 0 || sep + 1 >= rest.size() ||
          rest.find(kFieldSeparator, sep + 1) != std::string_view::npos) {
        throw ParseError("malformed block marker", lineno, std::string(line));
      }
      return trace.Intern(BasicBlockId(std::string(rest.substr(0, sep)),
                                       std::string(rest.substr(sep + 1))));
    };
    const auto has_tag = [&](std::string_view tag) {
      return line.size() > tag.size() && line.substr(0, tag.size()) == tag &&
             line[tag.size()] == kFieldSeparator;
    };

    std::string err;
    if (has_tag(kBlockStartTag)) {
      const auto idx = parse_marker(kBlockStartTag);
      err = checker.Start(idx);
      trace.BeginBlock(idx);
    } else if (has_tag(kBlockEndTag)) {
      const auto idx = parse_marker(kBlockEndTag);
      err = checker.End(idx);
      trace.EndBlock(idx);
    } else {
      std::uint64_t address = 0;
      if (!ParseHexAddress(line, &address)) {
        throw ParseError("address is not a hexadecimal number", lineno,
                         std::string(line));
      }
      err = checker.Access();
      trace.Access(address);
    }
    if (!err.empty()) throw ParseError(err, lineno, std::string(line));
  }
  if (in.bad()) throw Error("I/O error while reading trace");
  if (auto err = checker.Finish(); !err.empty()) throw ParseError(err);
  return trace;
}

MemoryTrace ParseTrace(std::string_view text, Nesting nesting) {
  std::istringstream in{std::string(text)};
  return ParseTrace(in, nesting);
}

MemoryTrace ReadTraceFile(const std::filesystem::path& path, Nesting nesting) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open trace file " + path.string());
  try {
    return ParseTrace(in, nesting);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void WriteTrace(std::ostream& out, const MemoryTrace& trace) {
  char buf[24];
  for (const auto& e : trace.events()) {
    switch (e.kind) {
      case EventKind::kBlockStart:
      case EventKind::kBlockEnd: {
        const auto& bb = trace.block(static_cast<MemoryTrace::BlockIndex>(e.value));
        out << (e.kind == EventKind::kBlockStart ? kBlockStartTag : kBlockEndTag)
            << kFieldSeparator << bb.function << kFieldSeparator << bb.label
            << '\n';
        break;
      }
      case EventKind::kAccess: {
        const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), e.value, 16);
        out << "0x" << std::string_view(buf, ptr - buf) << '\n';
        break;
      }
    }
  }
}

std::string SerializeTrace(const MemoryTrace& trace) {
  std::ostringstream out;
  WriteTrace(out, trace);
  return out.str();
}

void WriteTraceFile(const std::filesystem::path& path,
                    const MemoryTrace& trace) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write trace file " + path.string());
  WriteTrace(out, trace);
  if (!out) throw Error("write failed for " + path.string());
}

std::uint64_t BlockStats::count(const BasicBlockId& bb) const {
  const auto it = counts.find(bb);
  return it == counts.end() ? 0 : it->second;
}

std::uint64_t BlockStats::total() const {
  std::uint64_t sum = 0;
  for (const auto& [bb, n] : counts) sum += n;
  return sum;
}

BlockStats ComputeBlockStats(const MemoryTrace& trace) {
  std::vector<std::uint64_t> per_index(trace.blocks().size(), 0);
  for (const auto& e : trace.events()) {
    if (e.kind == EventKind::kBlockStart) ++per_index[e.value];
  }
  BlockStats stats;
  for (std::size_t i = 0; i < per_index.size(); ++i) {
    if (per_index[i] > 0) stats.counts[trace.blocks()[i]] = per_index[i];
  }
  return stats;
}

SharedRefSet CollectSharedRefs(const MemoryTrace& trace,
                               std::string_view label_prefix) {
  std::vector<bool> is_shared(trace.blocks().size(), false);
  for (std::size_t i = 0; i < trace.blocks().size(); ++i) {
    is_shared[i] = trace.blocks()[i].label.starts_with(label_prefix);
  }
  // Open-shared-block depth; tolerant of interleaved markers.
  std::vector<std::uint64_t> open(trace.blocks().size(), 0);
  std::uint64_t shared_open = 0;
  SharedRefSet refs;
  for (const auto& e : trace.events()) {
    switch (e.kind) {
      case EventKind::kBlockStart:
        ++open[e.value];
        if (is_shared[e.value]) ++shared_open;
        break;
      case EventKind::kBlockEnd:
        if (open[e.value] > 0) {
          --open[e.value];
          if (is_shared[e.value]) --shared_open;
        }
        break;
      case EventKind::kAccess:
        if (shared_open > 0) refs.addresses.insert(e.value);
        break;
    }
  }
  return refs;
}

}  // namespace mcpredict

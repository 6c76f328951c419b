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

#include "mcpredict/workload.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "json.hpp"
#include "mcpredict/error.hpp"
#include "mcpredict/random.hpp"

namespace mcpredict {
namespace {

using nlohmann::json;

std::uint64_t ReadUInt(const json& obj, const char* key, std::uint64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) {
    const auto s = v.get<std::int64_t>();
    if (s < 0) throw ParseError(std::string("'") + key + "' must be non-negative");
    return static_cast<std::uint64_t>(s);
  }
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    try {
      std::size_t used = 0;
      const auto n = std::stoull(s, &used, 0);
      if (used == s.size()) return n;
    } catch (const std::exception&) {
    }
  }
  throw ParseError(std::string("'") + key + "' must be an unsigned integer");
}

std::string ReadString(const json& obj, const char* key) {
  if (!obj.contains(key) || !obj.at(key).is_string()) {
    throw ParseError(std::string("missing string field '") + key + "'");
  }
  return obj.at(key).get<std::string>();
}

class AddressStream {
 public:
  AddressStream(const AddressSpec& spec, PortableRng* rng)
      : spec_(spec), rng_(rng) {}

  std::uint64_t Next() {
    if (spec_.pattern == AddressPattern::kRandom) {
      return spec_.base + spec_.align * rng_->Below(spec_.footprint / spec_.align);
    }
    std::uint64_t offset = cursor_;
    cursor_ += spec_.stride;
    if (spec_.footprint != 0) {
      offset %= spec_.footprint;
      cursor_ %= spec_.footprint;
    }
    return spec_.base + offset;
  }

 private:
  AddressSpec spec_;
  PortableRng* rng_;
  std::uint64_t cursor_ = 0;
};

void CheckSpec(const WorkloadSpec& spec) {
  if (spec.blocks.empty()) throw InvalidArgument("workload block plan is empty");
  for (const auto& b : spec.blocks) {
    if (b.repetitions < 1) {
      throw InvalidArgument("block " + b.block.ToString() +
                            " must repeat at least once");
    }
  }
  const auto& a = spec.addresses;
  if (a.pattern == AddressPattern::kRandom) {
    if (a.align == 0 || a.footprint < a.align) {
      throw InvalidArgument("random addresses need align > 0 and footprint >= align");
    }
  } else if (a.stride == 0) {
    throw InvalidArgument("address stride must be positive");
  }
  for (const auto& s : spec.shared) {
    if (s.pool_size == 0) throw InvalidArgument("shared pool_size must be positive");
    if (s.block.label == s.after.label && s.block.function == s.after.function) {
      throw InvalidArgument("shared block cannot be attached to itself");
    }
  }
}

}  // namespace

MemoryTrace GenerateSyntheticTrace(const WorkloadSpec& spec, std::uint64_t seed) {
  CheckSpec(spec);
  PortableRng rng(seed);
  AddressStream addresses(spec.addresses, &rng);

  std::multimap<BasicBlockId, std::size_t> attached;
  for (std::size_t i = 0; i < spec.shared.size(); ++i) {
    attached.emplace(spec.shared[i].after, i);
  }
  std::vector<std::uint64_t> shared_cursor(spec.shared.size(), 0);

  MemoryTrace trace;
  for (const auto& entry : spec.blocks) {
    const auto idx = trace.Intern(entry.block);
    const auto [first, last] = attached.equal_range(entry.block);
    for (std::uint64_t rep = 0; rep < entry.repetitions; ++rep) {
      trace.BeginBlock(idx);
      for (std::uint64_t k = 0; k < entry.accesses_per_instance; ++k) {
        trace.Access(addresses.Next());
      }
      trace.EndBlock(idx);
      for (auto it = first; it != last; ++it) {
        const auto& sh = spec.shared[it->second];
        trace.BeginBlock(sh.block);
        for (std::uint64_t k = 0; k < sh.accesses_per_instance; ++k) {
          const std::uint64_t slot =
              sh.random ? rng.Below(sh.pool_size)
                        : shared_cursor[it->second]++ % sh.pool_size;
          trace.Access(sh.base + slot * sh.stride);
        }
        trace.EndBlock(sh.block);
      }
    }
  }
  return trace;
}

WorkloadSpec ParseWorkloadSpec(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("workload spec is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("workload spec must be a JSON object");

  WorkloadSpec spec;
  if (!doc.contains("blocks") || !doc.at("blocks").is_array()) {
    throw ParseError("workload spec needs a 'blocks' array");
  }
  for (const auto& b : doc.at("blocks")) {
    BlockPlanEntry entry;
    entry.block = BasicBlockId(ReadString(b, "function"), ReadString(b, "label"));
    entry.repetitions = ReadUInt(b, "repeat", 1);
    entry.accesses_per_instance = ReadUInt(b, "accesses", 0);
    spec.blocks.push_back(std::move(entry));
  }

  if (doc.contains("addresses")) {
    const json& a = doc.at("addresses");
    const std::string pattern = a.value("pattern", std::string("sequential"));
    if (pattern == "sequential") {
      spec.addresses.pattern = AddressPattern::kSequential;
    } else if (pattern == "strided") {
      spec.addresses.pattern = AddressPattern::kStrided;
    } else if (pattern == "random") {
      spec.addresses.pattern = AddressPattern::kRandom;
    } else {
      throw ParseError("unknown address pattern '" + pattern + "'");
    }
    const std::uint64_t default_stride =
        spec.addresses.pattern == AddressPattern::kStrided ? 64 : 8;
    spec.addresses.base = ReadUInt(a, "base", 0);
    spec.addresses.stride = ReadUInt(a, "stride", default_stride);
    spec.addresses.footprint = ReadUInt(a, "footprint", 0);
    spec.addresses.align = ReadUInt(a, "align", 8);
  }

  if (doc.contains("shared")) {
    for (const auto& s : doc.at("shared")) {
      SharedPlanEntry entry;
      entry.after = ParseBlockId(ReadString(s, "after"));
      const std::string function =
          s.contains("function") ? ReadString(s, "function") : entry.after.function;
      entry.block = BasicBlockId(
          function, s.value("label", std::string(kDefaultSharedPrefix) + "0"));
      entry.accesses_per_instance = ReadUInt(s, "accesses", 1);
      entry.base = ReadUInt(s, "base", 0);
      entry.pool_size = ReadUInt(s, "pool_size", 1);
      entry.stride = ReadUInt(s, "stride", 8);
      entry.random = s.value("pattern", std::string("sequential")) == "random";
      spec.shared.push_back(std::move(entry));
    }
  }
  CheckSpec(spec);
  return spec;
}

WorkloadSpec LoadWorkloadSpec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open workload spec " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return ParseWorkloadSpec(text.str());
}

WorkloadSpec RandomWorkloadSpec(std::uint64_t seed, std::size_t num_blocks,
                                std::uint64_t max_repetitions,
                                std::uint64_t max_accesses,
                                std::uint64_t num_addresses, bool with_shared) {
  PortableRng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  WorkloadSpec spec;
  for (std::size_t i = 0; i < num_blocks; ++i) {
    BlockPlanEntry entry;
    entry.block = BasicBlockId("OUT__1__", "bb" + std::to_string(i));
    entry.repetitions = 1 + rng.Below(max_repetitions);
    entry.accesses_per_instance = rng.Below(max_accesses + 1);
    spec.blocks.push_back(std::move(entry));
  }
  spec.addresses.pattern = AddressPattern::kRandom;
  spec.addresses.base = 0x10000;
  spec.addresses.align = 8;
  spec.addresses.footprint = 8 * num_addresses;
  if (with_shared) {
    SharedPlanEntry sh;
    sh.block = BasicBlockId("OUT__1__", std::string(kDefaultSharedPrefix) + "0");
    sh.after = spec.blocks.front().block;
    sh.accesses_per_instance = 2;
    // Inside the private footprint so the offset rule sees it in the span.
    sh.base = spec.addresses.base;
    sh.pool_size = std::min<std::uint64_t>(16, num_addresses);
    sh.stride = 8;
    sh.random = true;
    spec.shared.push_back(std::move(sh));
  }
  return spec;
}

}  // namespace mcpredict

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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "mcpredict/error.hpp"
#include "mcpredict/pipeline.hpp"
#include "mcpredict/reuse.hpp"
#include "mcpredict/workload.hpp"
#include "test_util.hpp"

namespace mcpredict {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void Spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

json MachineJson(std::uint64_t l1, std::uint64_t l2, std::uint64_t l3, json a1 = 2,
                 json a2 = 4, json a3 = 8) {
  return {{"name", "test"},
          {"core_count", 8},
          {"frequency_hz", 2e9},
          {"levels",
           {{{"name", "L1"}, {"capacity", l1}, {"line_size", 64}, {"associativity", a1}},
            {{"name", "L2"}, {"capacity", l2}, {"line_size", 64}, {"associativity", a2}},
            {{"name", "L3"},
             {"capacity", l3},
             {"line_size", 64},
             {"associativity", a3},
             {"sharing", "shared"}}}},
          {"latency_cycles", {{"L1", 4}, {"L2", 12}, {"L3", 40}, {"RAM", 200}}},
          {"throughput_cycles", {{"L1", 1}, {"L2", 3}, {"L3", 10}, {"RAM", 50}}},
          {"instruction_cycles",
           {{"alu_latency", 3}, {"div_latency", 20}, {"alu_throughput", 1}, {"div_throughput", 10}}}};
}

class PipelineTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("mcpredict_pipeline_" + std::string(::testing::UnitTest::GetInstance()
                                                    ->current_test_info()
                                                    ->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    trace_ = GenerateSyntheticTrace(RandomWorkloadSpec(7, 4, 16, 12, 3000, true), 7);
    WriteTraceFile(dir_ / "input.trace", trace_);
    Spit(dir_ / "machine.json", MachineJson(2048, 8192, 65536).dump());
    Spit(dir_ / "kernel.json",
         R"({"n_int_alu": 5000, "n_div": 20, "total_mem_bytes": 80000})");
  }
  void TearDown() override { fs::remove_all(dir_); }

  PipelineConfig Config(std::vector<std::uint32_t> cores = {1, 2, 4, 8}) const {
    PipelineConfig c;
    c.trace_path = dir_ / "input.trace";
    c.machine_path = dir_ / "machine.json";
    c.kernel_path = dir_ / "kernel.json";
    c.core_counts = std::move(cores);
    c.output_dir = dir_ / "out";
    return c;
  }

  fs::path dir_;
  MemoryTrace trace_;
};

TEST(CoreList, Parses) {
  EXPECT_EQ(ParseCoreList("1,2,4,8"), (std::vector<std::uint32_t>{1, 2, 4, 8}));
  EXPECT_EQ(ParseCoreList("3"), (std::vector<std::uint32_t>{3}));
  EXPECT_THROW(ParseCoreList(""), InvalidArgument);
  EXPECT_THROW(ParseCoreList("1,,2"), InvalidArgument);
  EXPECT_THROW(ParseCoreList("1,x"), InvalidArgument);
  EXPECT_THROW(ParseCoreList("0"), InvalidArgument);
}

TEST(Fnv, KnownVectors) {
  EXPECT_EQ(Fnv1aHex(""), "cbf29ce484222325");
  EXPECT_EQ(Fnv1aHex("a"), "af63dc4c8601ec8c");
}

TEST_F(PipelineTest, OneCoreEqualsSingleTraceRates) {
  auto cfg = Config({1});
  cfg.persist = false;
  const auto report = RunPipeline(cfg);
  ASSERT_EQ(report.results.size(), 1u);
  const auto m = LoadMachineConfig(cfg.machine_path);
  for (const auto& level : m.levels) {
    EXPECT_DOUBLE_EQ(report.results[0].rates.level(level.name),
                     HitRate(ProfileTrace(trace_, 64), level));
  }
}

TEST_F(PipelineTest, FourSectionsAndPersistedArtifacts) {
  const auto report = RunPipeline(Config());
  ASSERT_EQ(report.results.size(), 4u);
  for (std::uint32_t n : {1u, 2u, 4u, 8u}) {
    const fs::path d = dir_ / "out" / ("cores" + std::to_string(n));
    for (std::uint32_t k = 0; k < n; ++k) {
      const std::string s = "input.core" + std::to_string(k);
      EXPECT_TRUE(fs::exists(d / (s + ".trace")));
      EXPECT_TRUE(fs::exists(d / (s + ".L1.profile")));
      EXPECT_TRUE(fs::exists(d / (s + ".L2.profile")));
    }
    EXPECT_TRUE(fs::exists(d / "input.shared.round-robin.trace"));
    EXPECT_TRUE(fs::exists(d / "input.shared.round-robin.L3.profile"));
  }
  for (const char* f : {"report.csv", "runtime.csv", "summary.txt"}) {
    EXPECT_TRUE(fs::exists(dir_ / "out" / f)) << f;
  }
  EXPECT_EQ(report.provenance.source, "trace");
  EXPECT_EQ(report.provenance.source_hash, Fnv1aHex(Slurp(dir_ / "input.trace")));
}

TEST_F(PipelineTest, ReportsAreByteIdenticalAcrossRuns) {
  for (auto strategy : {InterleaveKind::kRoundRobin, InterleaveKind::kUniformRandom}) {
    auto cfg = Config();
    cfg.strategy = strategy;
    RunPipeline(cfg);
    const std::string a = Slurp(dir_ / "out" / "report.csv") +
                          Slurp(dir_ / "out" / "runtime.csv") +
                          Slurp(dir_ / "out" / "summary.txt");
    fs::remove_all(dir_ / "out");
    RunPipeline(cfg);
    const std::string b = Slurp(dir_ / "out" / "report.csv") +
                          Slurp(dir_ / "out" / "runtime.csv") +
                          Slurp(dir_ / "out" / "summary.txt");
    EXPECT_EQ(a, b);
    fs::remove_all(dir_ / "out");
  }
}

TEST_F(PipelineTest, PersistedTracesReproduceTheReport) {
  const auto report = RunPipeline(Config({2, 4}));
  const auto m = LoadMachineConfig(dir_ / "machine.json");
  const auto k = LoadKernelConfig(dir_ / "kernel.json");
  for (const auto& r : report.results) {
    const fs::path d = dir_ / "out" / ("cores" + std::to_string(r.cores));
    std::vector<MemoryTrace> privates;
    for (std::uint32_t c = 0; c < r.cores; ++c) {
      privates.push_back(ReadTraceFile(d / ("input.core" + std::to_string(c) + ".trace")));
    }
    const auto shared =
        ReadTraceFile(d / "input.shared.round-robin.trace", Nesting::kInterleaved);
    const auto again = PredictFromTraces(privates, shared, m, k);
    EXPECT_EQ(again.rates.per_level, r.rates.per_level);
    EXPECT_EQ(again.rates.per_core_private, r.rates.per_core_private);
    EXPECT_EQ(again.runtime.seconds, r.runtime.seconds);

    std::ifstream prof(d / "input.shared.round-robin.L3.profile");
    EXPECT_EQ(ReadProfile(prof), ProfileTrace(shared, 64));
  }
}

TEST_F(PipelineTest, LargerCachesNeverLowerRates) {
  auto cfg = Config();
  cfg.persist = false;
  cfg.output_dir.clear();
  const auto small = RunPipeline(cfg);
  Spit(dir_ / "machine.json", MachineJson(4096, 16384, 131072).dump());
  const auto big = RunPipeline(cfg);
  for (std::size_t i = 0; i < small.results.size(); ++i) {
    for (const auto& [name, rate] : small.results[i].rates.per_level) {
      EXPECT_GE(big.results[i].rates.per_level.at(name) + 1e-12, rate) << name;
    }
  }
}

TEST_F(PipelineTest, FailuresAreStageTaggedAndCleanUp) {
  Spit(dir_ / "bad.trace", "BB_START:f:a\n0x10\n");
  auto cfg = Config();
  cfg.trace_path = dir_ / "bad.trace";
  try {
    RunPipeline(cfg);
    FAIL();
  } catch (const PipelineError& e) {
    EXPECT_EQ(e.stage(), "trace");
  }
  EXPECT_FALSE(fs::exists(dir_ / "out"));

  cfg = Config({16});
  try {
    RunPipeline(cfg);
    FAIL();
  } catch (const PipelineError& e) {
    EXPECT_EQ(e.stage(), "config");
  }

  cfg = Config();
  cfg.machine_path = dir_ / "missing.json";
  try {
    RunPipeline(cfg);
    FAIL();
  } catch (const PipelineError& e) {
    EXPECT_EQ(e.stage(), "machine");
  }

  // Line size that the machine cannot hold fails after nothing is written.
  cfg = Config();
  cfg.line_size_override = 4096;
  EXPECT_THROW(RunPipeline(cfg), PipelineError);
  EXPECT_FALSE(fs::exists(dir_ / "out"));
}

TEST_F(PipelineTest, ConfigFileResolvesRelativePaths) {
  Spit(dir_ / "pipeline.json", R"({"trace": "input.trace", "machine": "machine.json",
      "kernel": "kernel.json", "cores": [1, 2], "strategy": "uniform", "seed": 9,
      "output_dir": "out", "persist": false})");
  const auto cfg = LoadPipelineConfig(dir_ / "pipeline.json");
  EXPECT_EQ(cfg.trace_path, dir_ / "input.trace");
  EXPECT_EQ(cfg.core_counts, (std::vector<std::uint32_t>{1, 2}));
  EXPECT_EQ(cfg.strategy, InterleaveKind::kUniformRandom);
  EXPECT_EQ(cfg.seed, 9u);
  EXPECT_FALSE(cfg.persist);
  const auto report = RunPipeline(cfg);
  EXPECT_EQ(report.results.size(), 2u);
  EXPECT_TRUE(fs::exists(dir_ / "out" / "report.csv"));
  EXPECT_FALSE(fs::exists(dir_ / "out" / "cores1"));
  Spit(dir_ / "broken.json", "{");
  EXPECT_THROW(LoadPipelineConfig(dir_ / "broken.json"), ParseError);
}

TEST_F(PipelineTest, OracleFullyAssociativeIsExact) {
  Spit(dir_ / "machine.json", MachineJson(2048, 8192, 65536, "full", "full", "full").dump());
  const auto rows = CompareOracle(Config());
  ASSERT_FALSE(rows.empty());
  for (const auto& r : rows) EXPECT_EQ(r.abs_diff, 0.0) << r.cores << ' ' << r.level << ' ' << r.core;
}

TEST_F(PipelineTest, OracleReferenceSequence) {
  std::string text = "BB_START:main:body\n";
  for (char c : std::string("wxwyxzzw")) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "0x%x\n", 64 * (c - 'a'));
    text += buf;
  }
  text += "BB_END:main:body\n";
  Spit(dir_ / "wxwyxzzw.trace", text);
  Spit(dir_ / "machine.json", MachineJson(256, 512, 1024, "full", "full", "full").dump());
  auto cfg = Config({1});
  cfg.trace_path = dir_ / "wxwyxzzw.trace";
  const auto rows = CompareOracle(cfg);
  bool found = false;
  for (const auto& r : rows) {
    if (r.level == "L1" && r.core == "0") {
      EXPECT_EQ(r.model, 0.5);
      EXPECT_EQ(r.simulated, 0.5);
      EXPECT_EQ(r.abs_diff, 0.0);
      found = true;
    }
  }
  EXPECT_TRUE(found);
}

TEST_F(PipelineTest, OracleEnforcesEventCap) {
  auto cfg = Config({1});
  cfg.oracle_event_cap = 10;
  try {
    CompareOracle(cfg);
    FAIL();
  } catch (const PipelineError& e) {
    EXPECT_EQ(e.stage(), "oracle");
  }
}

TEST_F(PipelineTest, WorkloadInputUsesSeed) {
  Spit(dir_ / "w.json", R"({"blocks": [{"function": "k", "label": "b", "repeat": 8, "accesses": 40}],
      "addresses": {"pattern": "random", "base": "0x10000", "footprint": 65536}})");
  auto cfg = Config({1, 2});
  cfg.trace_path.clear();
  cfg.workload_path = dir_ / "w.json";
  cfg.persist = false;
  cfg.output_dir.clear();
  const auto a = RunPipeline(cfg);
  cfg.seed = 43;
  const auto b = RunPipeline(cfg);
  EXPECT_EQ(a.provenance.source, "workload");
  EXPECT_NE(a.results[0].rates.per_level, b.results[0].rates.per_level);
}

}  // namespace
}  // namespace mcpredict

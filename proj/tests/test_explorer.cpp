#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "rtmw/document.hpp"
#include "rtmw/error.hpp"
#include "rtmw/explorer.hpp"

using namespace rtmw;
namespace fs = std::filesystem;

namespace {

std::string scenario(const std::string& name) { return std::string(RTMW_SCENARIO_DIR) + "/" + name; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("rtmw_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
             ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& name) const { return path_ / name; }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::vector<SweepScenario> parking() {
  std::vector<SweepScenario> out;
  for (int lots = 1; lots <= 5; ++lots) {
    std::string name = "parking_lots" + std::to_string(lots);
    out.push_back({name, load_document(scenario(name + ".json"))});
  }
  return out;
}

}  // namespace

TEST(Validate, DiamondSummary) {
  std::ostringstream out;
  EXPECT_EQ(cmd_validate(scenario("diamond.json"), out), 0);
  EXPECT_NE(out.str().find("OK, 4 tasks, 4 channels, 2 versions on task left"), std::string::npos) << out.str();
}

TEST(Validate, EveryScenarioIsValid) {
  for (const auto& entry : fs::directory_iterator(RTMW_SCENARIO_DIR)) {
    std::ostringstream out;
    EXPECT_EQ(cmd_validate(entry.path().string(), out), 0) << entry.path() << "\n" << out.str();
  }
}

TEST(Validate, IgnoredUserPriorityWarns) {
  TaskSetDocument d = load_document(scenario("diamond.json"));
  d.tasks[0].user_priority = 3;
  ValidateResult r = validate_document(d);
  EXPECT_TRUE(r.ok());
  bool warned = false;
  for (const auto& diag : r.diagnostics) {
    warned |= !diag.error() && diag.message.find("user_priority ignored") != std::string::npos;
  }
  EXPECT_TRUE(warned);
}

TEST(Validate, FailureIsNonZeroWithJson) {
  TempDir tmp;
  TaskSetDocument d = load_document(scenario("diamond.json"));
  d.connections[3].dst = "nobody";
  {
    std::ofstream f(tmp / "bad.json");
    f << serialize_document(d);
  }
  std::ostringstream out;
  EXPECT_EQ(cmd_validate((tmp / "bad.json").string(), out, true), 1);
  EXPECT_NE(out.str().find("\"ok\": false"), std::string::npos) << out.str();
  EXPECT_NE(out.str().find("channel 'lj', id 3"), std::string::npos);
}

TEST(Validate, ModelErrorsCounted) {
  TaskSetDocument d = load_document(scenario("diamond.json"));
  d.config.priority_assignment = PriorityAssignment::kUser;
  ValidateResult r = validate_document(d);
  EXPECT_FALSE(r.ok());
  EXPECT_EQ(r.summary.rfind("FAILED, ", 0), 0u);
}

TEST(Simulate, SeedFixedTwiceGivesIdenticalTraces) {
  TempDir tmp;
  SimulateOptions o;
  o.seed = 42;
  o.horizon = 2 * kSecond;
  std::ostringstream out;
  o.trace_path = (tmp / "a.csv").string();
  o.report_path = (tmp / "a.json").string();
  EXPECT_EQ(cmd_simulate(scenario("drone.json"), o, out), 0);
  o.trace_path = (tmp / "b.csv").string();
  o.report_path = (tmp / "b.json").string();
  EXPECT_EQ(cmd_simulate(scenario("drone.json"), o, out), 0);
  EXPECT_FALSE(slurp(tmp / "a.csv").empty());
  EXPECT_EQ(slurp(tmp / "a.csv"), slurp(tmp / "b.csv"));
  EXPECT_EQ(slurp(tmp / "a.json"), slurp(tmp / "b.json"));
}

TEST(Simulate, InfeasibleSetExitsZeroWithMisses) {
  TaskSetDocument d = parse_document(R"({
    "tasks": [ { "name": "a", "period": "10ms", "versions": [ { "wcet": "12ms", "energy_budget": 0 } ] } ]
  })");
  SimResult r = simulate_document(d, {});
  EXPECT_GT(r.report.misses, 0u);
  TempDir tmp;
  {
    std::ofstream f(tmp / "over.json");
    f << serialize_document(d);
  }
  std::ostringstream out;
  EXPECT_EQ(cmd_simulate((tmp / "over.json").string(), {}, out), 0);
}

TEST(Simulate, ParkingThreeLotsReportsThreePipelines) {
  SimulateOptions o;
  o.horizon = 10 * kSecond;
  SimResult r = simulate_document(load_document(scenario("parking_lots3.json")), o);
  std::set<std::string> prefixes;
  for (const auto& t : r.report.tasks) prefixes.insert(t.name.substr(0, t.name.find('.')));
  EXPECT_EQ(prefixes, (std::set<std::string>{"p0", "p1", "p2"}));
  // One iteration per 10s period: each pipeline's root fires once.
  for (const auto& t : r.report.tasks) {
    if (t.name.find("fetch#0") != std::string::npos) EXPECT_EQ(t.released, 1u) << t.name;
  }
}

TEST(Simulate, ReportJsonHasTotals) {
  SimResult r = simulate_document(load_document(scenario("diamond.json")), {});
  std::string j = report_to_json(r.report);
  EXPECT_NE(j.find("\"misses\""), std::string::npos);
  EXPECT_NE(j.find("\"overheads\""), std::string::npos);
  std::ostringstream out;
  print_summary(r.report, out);
  EXPECT_NE(out.str().find("join"), std::string::npos);
}

TEST(Policy, NamesRoundTrip) {
  for (const char* s : {"G-EDF", "G-RM", "G-DM", "P-EDF", "P-RM", "P-DM", "G-USER"}) {
    auto p = parse_policy(s);
    ASSERT_TRUE(p) << s;
    EXPECT_EQ(policy_name(*p), s);
  }
  EXPECT_EQ(policy_name(*parse_policy("p-edf")), "P-EDF");
  EXPECT_FALSE(parse_policy("X-EDF"));
  EXPECT_FALSE(parse_policy("G-FIFO"));
}

TEST(Sweep, DroneCrossProductHasTwelveGroups) {
  SweepSpec spec;
  for (const char* p : {"G-EDF", "G-DM", "P-EDF", "P-DM"}) spec.policies.push_back(*parse_policy(p));
  spec.version_modes = {VersionMode::kCpu, VersionMode::kGpu, VersionMode::kBoth};
  spec.horizon = 2 * kSecond;
  auto runs = run_sweep({{"drone", load_document(scenario("drone.json"))}}, spec);
  EXPECT_EQ(runs.size(), 12u);
  std::ostringstream csv;
  write_sweep_csv(runs, csv);
  std::set<std::string> groups;
  std::string line;
  std::istringstream in(csv.str());
  std::getline(in, line);
  EXPECT_EQ(line, "scenario,policy,preemptive,version_mode,repetition,metric,value");
  while (std::getline(in, line)) {
    std::size_t cut = line.find(',', line.find(',', line.find(',', line.find(',') + 1) + 1) + 1);
    groups.insert(line.substr(0, cut));
  }
  EXPECT_EQ(groups.size(), 12u);
}

TEST(Sweep, ParkingFortyRuns) {
  SweepSpec spec;
  for (const char* p : {"G-EDF", "G-RM", "G-DM", "P-EDF", "P-RM", "P-DM"}) spec.policies.push_back(*parse_policy(p));
  spec.policies.resize(4);
  spec.preemptive = {true, false};
  auto runs = run_sweep(parking(), spec);
  EXPECT_EQ(runs.size(), 40u);
  std::set<std::tuple<std::string, std::string, bool>> distinct;
  for (const auto& r : runs) distinct.insert({r.scenario, r.policy, r.preemptive});
  EXPECT_EQ(distinct.size(), 40u);
}

TEST(Sweep, RepetitionsMultiplyRowGroups) {
  SweepSpec spec;
  spec.repetitions = 3;
  spec.horizon = kSecond;
  auto runs = run_sweep({{"drone", load_document(scenario("drone.json"))}}, spec);
  ASSERT_EQ(runs.size(), 3u);
  EXPECT_EQ(runs[2].repetition, 2u);
  EXPECT_EQ(runs[2].report.seed, 2u);
}

TEST(Sweep, SinglePointEqualsSimulate) {
  TaskSetDocument d = load_document(scenario("diamond.json"));
  SweepSpec spec;
  spec.seed = 9;
  auto runs = run_sweep({{"diamond", d}}, spec);
  ASSERT_EQ(runs.size(), 1u);
  SimulateOptions o;
  o.seed = 9;
  SimResult r = simulate_document(d, o);
  EXPECT_EQ(report_to_json(runs[0].report), report_to_json(r.report));
}

TEST(Sweep, InvalidPointNamed) {
  SweepSpec spec;
  spec.policies = {*parse_policy("P-EDF")};
  try {
    run_sweep({{"diamond", load_document(scenario("diamond.json"))}}, spec);
    FAIL();
  } catch (const ConfigError& e) {
    std::string msg = e.what();
    EXPECT_NE(msg.find("diamond"), std::string::npos) << msg;
    EXPECT_NE(msg.find("P-EDF"), std::string::npos) << msg;
  }
}

TEST(Sweep, BestRunPrefersFewestMisses) {
  std::vector<SweepRun> runs(3);
  runs[0].report.misses = 4;
  runs[1].report.misses = 1;
  runs[2].report.misses = 1;
  TaskReport t;
  t.response.add(10);
  runs[1].report.tasks = {t};
  t.response.add(1);
  t.response.add(1);
  runs[2].report.tasks = {t};
  EXPECT_EQ(best_run(runs), &runs[2]);
  EXPECT_EQ(best_run({}), nullptr);
}

TEST(Sweep, CmdWritesCsvFile) {
  TempDir tmp;
  SweepSpec spec;
  spec.horizon = kSecond;
  std::ostringstream out;
  EXPECT_EQ(cmd_sweep({scenario("gpu_contention.json")}, spec, tmp.path().string(), out), 0);
  std::string csv = slurp(tmp / "sweep.csv");
  EXPECT_NE(csv.find("gpu_contention,G-EDF,true,both,0,misses,"), std::string::npos) << csv;
}

TEST(ExpandSdf, PrintsRepetitionVectorAndRevalidates) {
  TempDir tmp;
  std::ostringstream out;
  EXPECT_EQ(cmd_expand_sdf(scenario("sdf_ab.json"), (tmp / "dag.json").string(), out), 0);
  EXPECT_NE(out.str().find("A:3 B:2"), std::string::npos) << out.str();
  EXPECT_NE(out.str().find("5 nodes"), std::string::npos);
  std::ostringstream v;
  EXPECT_EQ(cmd_validate((tmp / "dag.json").string(), v), 0) << v.str();
}

TEST(ExpandSdf, InconsistentGraphErrorNamesEdge) {
  TempDir tmp;
  TaskSetDocument d = load_document(scenario("sdf_ab.json"));
  d.sdf->graph.edges.push_back({0, 1, 3, 2, 0});
  {
    std::ofstream f(tmp / "bad.json");
    f << serialize_document(d);
  }
  std::ostringstream out;
  try {
    cmd_expand_sdf((tmp / "bad.json").string(), "", out);
    FAIL();
  } catch (const InconsistencyError& e) {
    EXPECT_NE(std::string(e.what()).find("A -> B"), std::string::npos);
  }
}

TEST(ExpandSdf, ParkingMismatchGivesSuccessorCopies) {
  TaskSetDocument x = expand_document_sdf(load_document(scenario("parking_lots1.json")));
  std::size_t tiles = 0;
  for (const auto& t : x.tasks) tiles += t.name.find("tile#") != std::string::npos;
  EXPECT_EQ(tiles, 2u);
}

TEST(Latency, LoopsMustBePositive) {
  LatencyOptions o;
  o.loops = 0;
  try {
    run_latency(o);
    FAIL();
  } catch (const UsageError& e) {
    EXPECT_NE(std::string(e.what()).find("loops must be positive"), std::string::npos);
  }
}

TEST(Latency, SmallOversubscribedRunHasThreeNumberShape) {
  LatencyOptions o;
  o.threads = 2;
  o.interval_us = 2000;
  o.loops = 10;
  o.allow_oversubscription = true;
  o.realtime_priority = false;
  o.lock_memory = false;
  o.pin_threads = false;
  LatencyReport r = run_latency(o);
  ASSERT_EQ(r.per_thread.size(), 2u);
  for (const auto& s : r.per_thread) {
    EXPECT_EQ(s.count, 10u);
    EXPECT_LE(s.min, s.max);
    EXPECT_GE(s.min, 0);
  }
  std::ostringstream out;
  print_latency(r, out);
  EXPECT_NE(out.str().find("T0: <"), std::string::npos) << out.str();
  EXPECT_NE(out.str().find("all: <"), std::string::npos);
}

TEST(Latency, InsufficientProcessorsRejected) {
  LatencyOptions o;
  o.threads = 4096;
  o.loops = 1;
  o.realtime_priority = false;
  o.lock_memory = false;
  o.pin_threads = false;
  EXPECT_THROW(run_latency(o), ConfigError);
}

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "gpqm/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path work_dir() {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  const fs::path d = fs::temp_directory_path() / "gpqm_cli_test" / (std::string(info->test_suite_name()) + "." + info->name());
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(const fs::path& dir, const std::string& args) {
  const auto out = dir / "stdout.txt", err = dir / "stderr.txt";
  const std::string cmd = "cd '" + dir.string() + "' && '" GPQM_CLI_PATH "' " + args + " >'" + out.string() +
                          "' 2>'" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, gpqm::io::read_file(out), gpqm::io::read_file(err)};
}

std::string slurp(const fs::path& p) { return gpqm::io::read_file(p); }

void write(const fs::path& p, const std::string& s) { gpqm::io::write_file(p, s); }

const char* kReference = R"({"faps":[
  {"id":1,"position":[50,75,10],"demand_bps":40e6},
  {"id":2,"position":[75,25,10],"demand_bps":125e6},
  {"id":3,"position":[25,25,10],"demand_bps":150e6}],
 "duration_s":70,"planning_period_s":5})";

TEST(Generate, WritesReproducibleFiles) {
  const auto d = work_dir();
  ASSERT_EQ(cli(d, "generate --faps 3 --duration 70 --seed 42 --out a").code, 0);
  ASSERT_EQ(cli(d, "generate --faps 3 --duration 70 --seed 42 --out b").code, 0);
  for (const char* f : {"rwm3_seed42.json", "rwm3_seed42.waypoints.txt"}) {
    ASSERT_TRUE(fs::exists(d / "a" / f)) << f;
    EXPECT_EQ(slurp(d / "a" / f), slurp(d / "b" / f)) << f;
  }
  const auto s = gpqm::io::load_scenario(d / "a" / "rwm3_seed42.json");
  EXPECT_EQ(s.trace.faps.size(), 3u);
  EXPECT_DOUBLE_EQ(s.trace.duration_s, 70.0);
}

TEST(Generate, TwelveFaps) {
  const auto d = work_dir();
  ASSERT_EQ(cli(d, "generate --faps 12 --seed 3 --out g").code, 0);
  const auto j = json::parse(slurp(d / "g" / "rwm12_seed3.json"));
  EXPECT_EQ(j["faps"].size(), 12u);
}

TEST(Generate, UsageErrors) {
  const auto d = work_dir();
  EXPECT_EQ(cli(d, "generate --faps 0 --out g").code, 2);
  EXPECT_EQ(cli(d, "generate --faps 3 --x-max -5 --out g").code, 2);
  EXPECT_EQ(cli(d, "generate --faps 3 --speed-min 4 --speed-max 1 --out g").code, 2);
  EXPECT_EQ(cli(d, "generate --out g").code, 2);
  EXPECT_EQ(cli(d, "frobnicate").code, 2);
  EXPECT_EQ(cli(d, "").code, 2);
  EXPECT_FALSE(fs::exists(d / "g"));
}

TEST(Plan, ReferenceFixture) {
  const auto d = work_dir();
  write(d / "ref.json", kReference);
  const auto r = cli(d, "plan --scenario ref.json --out ref.plan.json");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("t=0 P_T=20 dBm"), std::string::npos) << r.out;
  const auto j = json::parse(slurp(d / "ref.plan.json"));
  ASSERT_EQ(j["plans"].size(), 15u);
  const auto& first = j["plans"][0];
  EXPECT_EQ(first["p_tx_dbm"], 20.0);
  EXPECT_EQ(first["faps"][2]["queue_pkts"], 5);
  // A static scenario gives the same plan at every snapshot.
  for (const auto& p : j["plans"]) {
    auto a = p, b = first;
    a.erase("t");
    b.erase("t");
    EXPECT_EQ(a, b) << p["t"];
  }
  EXPECT_EQ(j["config_echo"]["packet_size_bytes"], 1400.0);
}

TEST(Plan, InfeasibleSnapshotIsNamed) {
  const auto d = work_dir();
  write(d / "s.json", R"({"faps":[
    {"id":1,"position":[50,75,10],"demand_schedule":[{"t_s":0,"demand_bps":40e6},{"t_s":10,"demand_bps":400e6}]},
    {"id":2,"position":[75,25,10],"demand_bps":60e6}],"duration_s":20,"planning_period_s":5})");
  const auto r = cli(d, "plan --scenario s.json --out s.plan.json");
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("t=10"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(d / "s.plan.json"));
}

TEST(Plan, IoErrors) {
  const auto d = work_dir();
  EXPECT_EQ(cli(d, "plan --scenario missing.json --out p.json").code, 4);
  write(d / "bad.json", "{ not json");
  EXPECT_EQ(cli(d, "plan --scenario bad.json --out p.json").code, 4);
}

TEST(Simulate, RunsLayoutAndDeterminism) {
  const auto d = work_dir();
  write(d / "ref.json", kReference);
  ASSERT_EQ(cli(d, "plan --scenario ref.json --out ref.plan.json").code, 0);
  const std::string args = "simulate --scenario ref.json --plan ref.plan.json --policy gpqm --runs 3 --seed 5 ";
  const auto r = cli(d, args + "--out o1");
  ASSERT_EQ(r.code, 0) << r.err;
  ASSERT_EQ(cli(d, args + "--out o2").code, 0);
  for (int k = 5; k <= 7; ++k) {
    const fs::path run = fs::path("ref") / "gpqm" / ("seed" + std::to_string(k));
    for (const char* f : {"throughput.csv", "summary.json", "delay_cdf.csv"}) {
      ASSERT_TRUE(fs::exists(d / "o1" / run / f)) << run / f;
      EXPECT_EQ(slurp(d / "o1" / run / f), slurp(d / "o2" / run / f)) << run / f;
    }
    const auto s = json::parse(slurp(d / "o1" / run / "summary.json"));
    EXPECT_EQ(s["seed"], k);
    EXPECT_EQ(s["window_length_s"], 70.0);
  }
  EXPECT_FALSE(fs::exists(d / "o1" / "ref" / "gpqm" / "seed8"));
  EXPECT_FALSE(fs::exists(d / "o1" / "ref" / "gpqm" / "seed5" / "packets.csv"));
  const auto pooled = json::parse(slurp(d / "o1" / "ref" / "gpqm" / "summary.json"));
  EXPECT_EQ(pooled["runs"], 3);
  EXPECT_EQ(pooled["label"], "gpqm/scheduled");
  EXPECT_EQ(slurp(d / "o1" / "ref" / "gpqm" / "summary.json"), slurp(d / "o2" / "ref" / "gpqm" / "summary.json"));
  // 70 per-second samples per seed, pooled.
  std::istringstream cdf(slurp(d / "o1" / "ref" / "gpqm" / "throughput_cdf.csv"));
  std::string line, last;
  while (std::getline(cdf, line)) last = line;
  EXPECT_NE(last.find(",1.0,0.0"), std::string::npos) << last;
}

TEST(Simulate, DropTailBaselineAndPacketLog) {
  const auto d = work_dir();
  write(d / "ref.json", kReference);
  const auto r = cli(d, "simulate --scenario ref.json --policy centroid --queue droptail --queue-size 100 "
                        "--measure 5 --bootstrap 1 --packet-log --out o");
  ASSERT_EQ(r.code, 0) << r.err;
  const fs::path run = d / "o" / "ref" / "centroid" / "seed1";
  const auto s = json::parse(slurp(run / "summary.json"));
  EXPECT_EQ(s["label"], "centroid/droptail100");
  EXPECT_FALSE(s["p90_delay_s"].is_null());
  EXPECT_EQ(slurp(run / "packets.csv").rfind("source_id,created_s,delay_s,dropped\n", 0), 0u);
  EXPECT_EQ(json::parse(slurp(d / "o" / "ref" / "centroid" / "manifest.json"))["seeds"], json::array({1}));
}

TEST(Simulate, Errors) {
  const auto d = work_dir();
  write(d / "ref.json", kReference);
  EXPECT_EQ(cli(d, "simulate --scenario ref.json --policy gpqm --out o").code, 2);
  EXPECT_EQ(cli(d, "simulate --scenario ref.json --policy centroid --queue scheduled --out o").code, 2);
  EXPECT_EQ(cli(d, "simulate --scenario ref.json --policy nearest --out o").code, 2);
  EXPECT_EQ(cli(d, "simulate --scenario ref.json --policy centroid --runs 0 --out o").code, 2);
  EXPECT_EQ(cli(d, "simulate --scenario ref.json --policy centroid --queue-size 0 --out o").code, 2);
  EXPECT_EQ(cli(d, "simulate --scenario ref.json --plan nope.json --out o").code, 4);
}

TEST(Benchmark, InstanceRowsPerMethod) {
  const auto d = work_dir();
  const auto r = cli(d, "benchmark --faps 3 --instances 5 --iterations 100 --measure 5 --bootstrap 1 --out b.csv");
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(slurp(d / "b.csv"));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "instance,seed,method,objective_bps,feasible,p90_throughput_bps,p90_delay_s");
  int gpqm = 0, pso = 0;
  while (std::getline(in, line)) {
    gpqm += line.find(",gpqm,") != std::string::npos;
    pso += line.find(",pso,") != std::string::npos;
  }
  EXPECT_EQ(gpqm, 5);
  EXPECT_EQ(pso, 5);
  ASSERT_EQ(cli(d, "benchmark --instances 1 --iterations 10 --measure 2 --bootstrap 1 --reference-row --out r.csv").code, 0);
  EXPECT_NE(slurp(d / "r.csv").find("\n0,0,published,"), std::string::npos);
  EXPECT_EQ(cli(d, "benchmark --instances 0").code, 2);
}

TEST(Analyze, AppendixA) {
  const auto d = work_dir();
  auto r = cli(d, "analyze --appendix-a --two-faps 5,5,5,95,95,5,20,20 --out a");
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = json::parse(slurp(d / "a" / "appendix_a.json"));
  EXPECT_EQ(j["overlap_class"], "disjoint");
  EXPECT_TRUE(j["min_c_point"].is_null());

  r = cli(d, "analyze --appendix-a --two-faps 40,50,10,60,50,10,30,30 --capacity regression --out a");
  ASSERT_EQ(r.code, 0) << r.err;
  j = json::parse(slurp(d / "a" / "appendix_a.json"));
  EXPECT_EQ(j["overlap_class"], "partial");
  EXPECT_LE(j["min_c_bps"].get<double>(), j["max_c_bps"].get<double>());

  EXPECT_EQ(cli(d, "analyze --appendix-a --two-faps 1,2,3 --out a").code, 2);
  EXPECT_EQ(cli(d, "analyze --out a").code, 2);
}

TEST(Analyze, CdfTableAndCompare) {
  const auto d = work_dir();
  write(d / "ref.json", kReference);
  const std::string base = "simulate --scenario ref.json --measure 20 --bootstrap 2 --runs 2 --out o ";
  ASSERT_EQ(cli(d, base + "--policy centroid").code, 0);
  ASSERT_EQ(cli(d, base + "--policy venue-center --queue codel").code, 0);

  auto r = cli(d, "analyze --cdf o/ref/centroid/seed1 o/ref/centroid/seed2/throughput.csv --out c");
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(slurp(d / "c" / "throughput_bps_cdf.csv"));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "throughput_bps,cdf,ccdf");
  int rows = 0;
  while (std::getline(in, line)) {
    double x, c, cc;
    char s1, s2;
    std::istringstream ls(line);
    ASSERT_TRUE(ls >> x >> s1 >> c >> s2 >> cc) << line;
    EXPECT_NEAR(c + cc, 1.0, 1e-12) << line;
    ++rows;
  }
  EXPECT_GT(rows, 0);
  EXPECT_LE(rows, 40);

  r = cli(d, "analyze --compare o/ref/centroid o/ref/venue-center --baseline centroid/droptail100 --out c");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("venue-center/codel,"), std::string::npos) << r.out;
  EXPECT_TRUE(fs::exists(d / "c" / "comparison.csv"));
  EXPECT_EQ(cli(d, "analyze --compare o/ref/centroid o/ref/venue-center --baseline nope --out c").code, 2);
  EXPECT_EQ(cli(d, "analyze --cdf o/ref/centroid/seed9 --out c").code, 4);
}

}  // namespace

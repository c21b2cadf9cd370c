#pragma once

// Batch front-end: scenario generation, planning, simulation, benchmarking and
// analysis. Every subcommand writes files only; identical arguments give
// byte-identical outputs.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gpqm/error.hpp"
#include "gpqm/io.hpp"
#include "gpqm/metrics.hpp"
#include "gpqm/placement.hpp"
#include "gpqm/planner.hpp"
#include "gpqm/psobench.hpp"
#include "gpqm/scenario.hpp"
#include "gpqm/simulator.hpp"

namespace gpqm::cli {

namespace fs = std::filesystem;
using nlohmann::json;

enum ExitCode : int { exit_ok = 0, exit_usage = 2, exit_infeasible = 3, exit_io = 4 };

inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::io: return exit_io;
    case ErrorKind::domain:
    case ErrorKind::configuration: return exit_usage;
    default: return exit_infeasible;
  }
}

// What one simulate invocation runs and where it writes.
struct RunManifest {
  std::string subcommand;
  std::vector<std::string> inputs;
  fs::path output_dir;
  std::vector<std::uint64_t> seeds;
  int runs_per_seed = 1;
  json overrides = json::object();

  void validate() const {
    if (seeds.empty()) fail(ErrorKind::configuration, "seed list is empty");
    if (runs_per_seed < 1) fail(ErrorKind::configuration, "runs per seed must be >= 1");
    std::error_code ec;
    fs::create_directories(output_dir, ec);
    if (ec || !fs::is_directory(output_dir)) fail(ErrorKind::io, "output directory " + output_dir.string() + " is not writable");
  }

  json to_json() const {
    return {{"subcommand", subcommand}, {"inputs", inputs},         {"output_dir", output_dir.generic_string()},
            {"seeds", seeds},           {"runs_per_seed", runs_per_seed}, {"overrides", overrides}};
  }
};

// Runs f(0..n-1) on a small worker pool; the first exception is rethrown.
template <class F>
void parallel_for(std::size_t n, F&& f) {
  if (n == 0) return;
  const std::size_t workers = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, n);
  std::atomic<std::size_t> next{0};
  std::vector<std::future<void>> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.push_back(std::async(std::launch::async, [&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) f(i);
    }));
  std::exception_ptr first;
  for (auto& p : pool) {
    try {
      p.get();
    } catch (...) {
      if (!first) first = std::current_exception();
    }
  }
  if (first) std::rethrow_exception(first);
}

inline std::string format_vec(const Vec3& v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "(%.3f, %.3f, %.3f)", v.x, v.y, v.z);
  return buf;
}

inline std::string csv_number(const std::optional<double>& v) { return v ? json(*v).dump() : std::string(); }

inline std::vector<double> read_csv_column(const fs::path& path, const std::string& column) {
  std::istringstream in(io::read_file(path));
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::io, path.string() + " is empty");
  std::vector<std::string> header;
  std::istringstream hs(line);
  for (std::string cell; std::getline(hs, cell, ',');) header.push_back(cell);
  const auto it = std::find(header.begin(), header.end(), column);
  if (it == header.end()) fail(ErrorKind::io, path.string() + " has no column '" + column + "'");
  const auto col = static_cast<std::size_t>(it - header.begin());
  std::vector<double> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    for (std::size_t k = 0; k <= col; ++k)
      if (!std::getline(ls, cell, ',')) fail(ErrorKind::io, path.string() + ": line " + std::to_string(lineno) + " is short");
    try {
      std::size_t used = 0;
      out.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      fail(ErrorKind::io, path.string() + ": line " + std::to_string(lineno) + " is not numeric");
    }
  }
  return out;
}

// generate

struct GenerateOptions {
  int faps = 3;
  double duration_s = 70.0;
  double period_s = 5.0;
  std::uint64_t seed = 1;
  fs::path out;
  std::string name;
  std::vector<double> demand_mbps{40.0, 125.0, 150.0};
  MobilityParams mobility;
  std::optional<double> planar_z_m;
  Venue venue;
  bool still = false;
  bool inline_waypoints = false;
};

inline int cmd_generate(const GenerateOptions& o, std::ostream& out) {
  if (o.faps < 1) fail(ErrorKind::domain, "--faps must be >= 1");
  if (o.demand_mbps.empty()) fail(ErrorKind::domain, "--demand-mbps needs at least one value");
  for (double d : o.demand_mbps)
    if (!(d > 0.0)) fail(ErrorKind::domain, "demands must be > 0");
  auto mobility = o.mobility;
  mobility.planar_z_m = o.planar_z_m;
  io::ScenarioFile sf;
  sf.trace = generate_rwm(o.faps, o.venue, mobility, o.duration_s, o.seed);
  sf.trace.planning_period_s = o.period_s;
  sf.mobility = mobility;
  for (std::size_t i = 0; i < sf.trace.faps.size(); ++i) {
    auto& f = sf.trace.faps[i];
    f.demand = {{0.0, o.demand_mbps[i % o.demand_mbps.size()] * 1e6}};
    if (o.still) f.waypoints.resize(1);
  }
  sf.trace.validate();
  sf.mcs = io::table_for(o.faps, sf.trace.channel.mac_efficiency, std::nullopt);

  const std::string name = o.name.empty() ? "rwm" + std::to_string(o.faps) + "_seed" + std::to_string(o.seed) : o.name;
  const fs::path json_path = o.out / (name + ".json");
  if (!o.inline_waypoints) {
    sf.waypoints_file = name + ".waypoints.txt";
    std::ostringstream wp;
    io::write_waypoints(wp, sf.trace);
    io::write_file(o.out / *sf.waypoints_file, wp.str());
  }
  io::write_file(json_path, io::dump(io::to_json(sf, o.inline_waypoints)));
  out << "wrote " << json_path.generic_string() << " (" << o.faps << " FAPs, " << o.duration_s << " s)\n";
  return exit_ok;
}

// plan

struct PlanOptions {
  fs::path scenario;
  fs::path out;
  std::optional<double> delay_threshold_s;
  std::optional<double> power_step_db;
};

inline int cmd_plan(const PlanOptions& o, std::ostream& out) {
  const auto sf = io::load_scenario(o.scenario);
  auto cfg = sf.planner_config();
  if (o.delay_threshold_s) cfg.delay_threshold_s = *o.delay_threshold_s;
  if (o.power_step_db) cfg.power_step_db = *o.power_step_db;
  cfg.validate();
  const auto series = plan_series(sf.trace, cfg);
  io::write_file(o.out, io::dump(io::to_json(series, cfg)));
  for (const auto& p : series.plans) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "t=%g P_T=%g dBm", p.time_s, p.tx_power_dbm);
    out << buf << " FGW=" << format_vec(p.fgw_position) << " Q=";
    for (std::size_t i = 0; i < p.faps.size(); ++i) out << (i ? "/" : "") << p.faps[i].queue_pkts;
    out << '\n';
  }
  return exit_ok;
}

// simulate

struct SimulateOptions {
  fs::path scenario;
  std::optional<fs::path> plan;
  std::string policy = "gpqm";
  std::string queue;  // defaults by policy
  int queue_size = 100;
  std::uint64_t seed = 1;
  int runs = 1;
  fs::path out = "out";
  std::string channel_mode = "independent";
  std::string fading = "on";
  std::string traffic = "poisson";
  double bootstrap_s = 30.0;
  double measure_s = 70.0;
  bool packet_log = false;
  std::size_t cdf_rows = 1000;

  std::string queue_name() const {
    if (!queue.empty()) return queue;
    return policy == "gpqm" ? "scheduled" : "droptail";
  }
  std::string label() const {
    const auto q = queue_name();
    return policy + "/" + (q == "droptail" ? q + std::to_string(queue_size) : q);
  }
};

inline SimConfig sim_config(const io::ScenarioFile& sf, const std::optional<PlanSeries>& plan,
                            const SimulateOptions& o, std::uint64_t seed) {
  SimConfig sc;
  sc.trace = sf.trace;
  sc.mcs = sf.mcs;
  sc.plan = plan;
  sc.seed = seed;
  sc.bootstrap_s = o.bootstrap_s;
  sc.measure_s = o.measure_s;
  sc.packet_size_bytes = sf.planner_config().packet_size_bytes;
  sc.record_packets = o.packet_log;
  sc.fading_enabled = o.fading == "on";
  sc.channel_mode = o.channel_mode == "shared" ? ChannelMode::shared_cap : ChannelMode::independent_fair_share;
  if (o.policy == "gpqm") sc.placement.kind = PlacementKind::plan;
  else if (o.policy == "centroid") sc.placement.kind = PlacementKind::fap_centroid;
  else sc.placement.kind = PlacementKind::venue_center;
  const auto q = o.queue_name();
  if (q == "scheduled") sc.queue.kind = QueueKind::gpqm_scheduled;
  else if (q == "droptail") sc.queue.kind = QueueKind::droptail;
  else if (q == "red") sc.queue.kind = QueueKind::red;
  else sc.queue.kind = QueueKind::codel;
  sc.queue.droptail_size = o.queue_size;
  if (o.traffic == "onoff") sc.traffic.kind = TrafficKind::onoff;
  else if (o.traffic == "aimd") sc.traffic.kind = TrafficKind::aimd;
  return sc;
}

inline json run_summary(const std::string& label, const SimMetrics& m) {
  json j = io::summary_json(label, m);
  j["window_start_s"] = m.window_start_s;
  j["window_length_s"] = m.window_length_s;
  j["delivered_in_window"] = m.delay_s.size();
  json faps = json::array();
  for (const auto& f : m.faps)
    faps.push_back({{"id", f.id},
                    {"generated", f.generated},
                    {"delivered", f.delivered},
                    {"dropped", f.dropped},
                    {"window_generated", f.window_generated},
                    {"window_dropped", f.window_dropped},
                    {"goodput_bps", f.goodput_bps(m.window_length_s)},
                    {"max_occupancy", f.max_occupancy}});
  j["faps"] = faps;
  return j;
}

inline void write_cdf_file(const fs::path& path, const std::vector<double>& samples, const std::string& column,
                           std::size_t max_rows) {
  std::ostringstream os;
  io::write_cdf_table(os, DistributionSummary(samples), column, max_rows);
  io::write_file(path, os.str());
}

inline int cmd_simulate(const SimulateOptions& o, std::ostream& out) {
  if (o.runs < 1) fail(ErrorKind::configuration, "--runs must be >= 1");
  const bool needs_plan = o.policy == "gpqm" || o.queue_name() == "scheduled";
  if (needs_plan && !o.plan) fail(ErrorKind::configuration, "policy '" + o.label() + "' requires --plan");
  const auto sf = io::load_scenario(o.scenario);
  std::optional<PlanSeries> plan;
  if (o.plan) plan = io::plan_series_from_json(io::parse_json(io::read_file(*o.plan), o.plan->string()));

  const std::string scenario_name = o.scenario.stem().string();
  const fs::path dir = o.out / scenario_name / o.policy;
  RunManifest manifest{"simulate", {o.scenario.generic_string()}, dir, {}, 1, json::object()};
  if (o.plan) manifest.inputs.push_back(o.plan->generic_string());
  for (int k = 0; k < o.runs; ++k) manifest.seeds.push_back(o.seed + static_cast<std::uint64_t>(k));
  manifest.overrides = {{"queue", o.queue_name()}, {"queue_size", o.queue_size}, {"channel_mode", o.channel_mode},
                        {"fading", o.fading},      {"traffic", o.traffic},       {"bootstrap_s", o.bootstrap_s},
                        {"measure_s", o.measure_s}};
  manifest.validate();
  // Fail on configuration problems before any run starts.
  sim_config(sf, plan, o, manifest.seeds.front()).validate();

  std::vector<SimMetrics> results(manifest.seeds.size());
  parallel_for(results.size(), [&](std::size_t i) {
    const auto seed = manifest.seeds[i];
    auto m = run_sim(sim_config(sf, plan, o, seed));
    const fs::path run_dir = dir / ("seed" + std::to_string(seed));
    std::ostringstream thr;
    io::write_throughput_csv(thr, m);
    io::write_file(run_dir / "throughput.csv", thr.str());
    write_cdf_file(run_dir / "delay_cdf.csv", m.delay_s, "delay_s", o.cdf_rows);
    json summary = run_summary(o.label(), m);
    summary["seed"] = seed;
    io::write_file(run_dir / "summary.json", io::dump(summary));
    if (o.packet_log) {
      std::ostringstream pk;
      io::write_packets_csv(pk, m);
      io::write_file(run_dir / "packets.csv", pk.str());
    }
    m.packets.clear();
    results[i] = std::move(m);
  });

  // Pooled over the per-second and per-packet samples of every seed.
  SimMetrics pooled;
  pooled.window_start_s = o.bootstrap_s;
  pooled.window_length_s = o.measure_s;
  for (auto& m : results) {
    pooled.throughput_bps.insert(pooled.throughput_bps.end(), m.throughput_bps.begin(), m.throughput_bps.end());
    pooled.delay_s.insert(pooled.delay_s.end(), m.delay_s.begin(), m.delay_s.end());
    for (const auto& f : m.faps) pooled.faps.push_back(f);
    m.delay_s.clear();
  }
  json summary = io::summary_json(o.label(), pooled);
  summary["runs"] = results.size();
  summary["seeds"] = manifest.seeds;
  summary["window_start_s"] = pooled.window_start_s;
  summary["window_length_s"] = pooled.window_length_s;
  summary["scenario"] = scenario_name;
  io::write_file(dir / "summary.json", io::dump(summary));
  io::write_file(dir / "manifest.json", io::dump(manifest.to_json()));
  write_cdf_file(dir / "throughput_cdf.csv", pooled.throughput_bps, "throughput_bps", 0);
  write_cdf_file(dir / "delay_cdf.csv", pooled.delay_s, "delay_s", o.cdf_rows);

  const auto s = summarize(pooled);
  out << o.label() << " runs=" << results.size() << " p90_throughput_bps=" << csv_number(s.throughput.percentile(90))
      << " p90_delay_s=" << csv_number(s.delay.percentile(90)) << " plr=" << json(pooled.plr()).dump() << '\n';
  return exit_ok;
}

// benchmark

struct BenchmarkOptions {
  int faps = 3;
  int instances = 5;
  std::uint64_t seed = 1;
  std::vector<double> demand_fractions{0.25, 0.5, 0.75};
  std::string capacity = "regression";
  int iterations = 2000;
  int swarm = 50;
  double measure_s = 70.0;
  double bootstrap_s = 30.0;
  bool reference_row = false;
  fs::path out = "benchmark.csv";
};

inline CapacityKind capacity_kind(const std::string& name) {
  if (name == "shannon") return CapacityKind::shannon;
  if (name == "mcs_table") return CapacityKind::mcs_table;
  return CapacityKind::regression;
}

inline int cmd_benchmark(const BenchmarkOptions& o, std::ostream& out) {
  if (o.faps < 1) fail(ErrorKind::domain, "--faps must be >= 1");
  if (o.instances < 1) fail(ErrorKind::domain, "--instances must be >= 1");
  if (o.demand_fractions.empty()) fail(ErrorKind::domain, "--demand-fractions needs at least one value");
  PlannerConfig cfg;
  cfg.mcs = mcs::default_table(o.faps, cfg.channel.mac_efficiency);
  PsoParams pso;
  pso.iterations = o.iterations;
  pso.swarm_size = o.swarm;
  SimTemplate tpl;
  tpl.measure_s = o.measure_s;
  tpl.bootstrap_s = o.bootstrap_s;
  const auto instances = random_instances(o.instances, o.faps, cfg, o.demand_fractions, o.seed);
  auto rows = benchmark(instances, cfg, pso, tpl, capacity_kind(o.capacity));
  if (o.reference_row) rows.push_back(published_reference_row(PlannerConfig{}, capacity_kind(o.capacity)));
  std::ostringstream csv;
  write_benchmark_csv(csv, rows);
  io::write_file(o.out, csv.str());
  for (const auto& a : aggregate(rows))
    out << a.method << " feasible_rows=" << a.rows << " mean_objective_bps=" << json(a.mean_objective_bps).dump()
        << " mean_p90_delay_s=" << json(a.mean_p90_delay_s).dump() << '\n';
  return exit_ok;
}

// analyze

struct AnalyzeOptions {
  bool appendix_a = false;
  std::vector<double> two_faps;  // x1 y1 z1 x2 y2 z2 r1 r2
  std::string capacity = "shannon";
  double tx_power_dbm = 20.0;
  std::vector<fs::path> cdf_inputs;
  std::string column = "throughput_bps";
  std::size_t max_rows = 0;
  std::vector<fs::path> compare_inputs;
  std::string baseline;
  fs::path out = ".";
};

inline CapacityFn capacity_fn(const std::string& name, const ChannelParams& channel, const McsTable& table) {
  if (name == "shannon") return [b = channel.bandwidth_hz](double snr) { return shannon_capacity(b, snr); };
  if (name == "regression") return regression_capacity(table);
  return [table](double snr) {
    const auto e = table.best_for_snr(snr);
    return e ? e->fair_share_bps : 0.0;
  };
}

inline int analyze_appendix_a(const AnalyzeOptions& o, std::ostream& out) {
  if (o.two_faps.size() != 8) fail(ErrorKind::domain, "--two-faps needs x1,y1,z1,x2,y2,z2,r1,r2");
  const std::vector<SphereConstraint> spheres{{{o.two_faps[0], o.two_faps[1], o.two_faps[2]}, o.two_faps[6]},
                                              {{o.two_faps[3], o.two_faps[4], o.two_faps[5]}, o.two_faps[7]}};
  for (const auto& s : spheres)
    if (!(s.radius_m > 0.0)) fail(ErrorKind::domain, "radii must be > 0");
  const PlannerConfig cfg;
  const auto r = appendix_a_analysis(spheres, cfg.venue, cfg.channel, o.tx_power_dbm,
                                     capacity_fn(o.capacity, cfg.channel, cfg.mcs));
  const auto point = [](const std::optional<Vec3>& p) { return p ? io::to_json(*p) : json(); };
  const json j = {{"overlap_class", to_string(r.overlap_class)},
                  {"capacity", o.capacity},
                  {"tx_power_dbm", o.tx_power_dbm},
                  {"spheres", {{{"center", io::to_json(spheres[0].center)}, {"radius_m", spheres[0].radius_m}},
                               {{"center", io::to_json(spheres[1].center)}, {"radius_m", spheres[1].radius_m}}}},
                  {"min_c_point", point(r.min_c_point)},
                  {"max_c_point", point(r.max_c_point)},
                  {"min_c_bps", r.min_c_point ? json(r.min_c_value) : json()},
                  {"max_c_bps", r.max_c_point ? json(r.max_c_value) : json()}};
  io::write_file(o.out / "appendix_a.json", io::dump(j));
  out << "overlap_class=" << to_string(r.overlap_class);
  if (r.min_c_point)
    out << " min_c=" << json(r.min_c_value).dump() << " at " << format_vec(*r.min_c_point)
        << " max_c=" << json(r.max_c_value).dump() << " at " << format_vec(*r.max_c_point);
  out << '\n';
  return exit_ok;
}

// A CDF input is either a CSV file or a directory holding throughput.csv.
inline int analyze_cdf(const AnalyzeOptions& o, std::ostream& out) {
  std::vector<double> samples;
  for (const auto& p : o.cdf_inputs) {
    const fs::path file = fs::is_directory(p) ? p / "throughput.csv" : p;
    const auto v = read_csv_column(file, o.column);
    samples.insert(samples.end(), v.begin(), v.end());
  }
  const fs::path path = o.out / (o.column + "_cdf.csv");
  write_cdf_file(path, samples, o.column, o.max_rows);
  out << "wrote " << path.generic_string() << " from " << samples.size() << " samples\n";
  return exit_ok;
}

// Compares pooled summaries; each input is a summary.json or its directory.
inline int analyze_compare(const AnalyzeOptions& o, std::ostream& out) {
  if (o.compare_inputs.size() < 2) fail(ErrorKind::domain, "--compare needs at least two summaries");
  std::vector<json> summaries;
  for (const auto& p : o.compare_inputs) {
    const fs::path file = fs::is_directory(p) ? p / "summary.json" : p;
    summaries.push_back(io::parse_json(io::read_file(file), file.string()));
  }
  const json* base = nullptr;
  try {
    for (const auto& s : summaries) {
      if (s.at("window_start_s") != summaries.front().at("window_start_s") ||
          s.at("window_length_s") != summaries.front().at("window_length_s"))
        fail(ErrorKind::domain, "summary '" + s.at("label").get<std::string>() + "' uses a different measurement window");
      if (s.at("label").get<std::string>() == o.baseline) base = &s;
    }
    if (!base) fail(ErrorKind::domain, "baseline '" + o.baseline + "' is not among the summaries");
    const auto num = [](const json& j, const char* key) {
      return j.at(key).is_null() ? std::optional<double>() : std::optional<double>(j.at(key).get<double>());
    };
    std::ostringstream csv;
    csv << "label,p90_throughput_bps,p90_delay_s,plr,throughput_delta,delay_delta\n";
    for (const auto& s : summaries) {
      const auto t = num(s, "p90_throughput_bps"), d = num(s, "p90_delay_s");
      csv << s.at("label").get<std::string>() << ',' << csv_number(t) << ',' << csv_number(d) << ','
          << s.at("plr").dump() << ',' << csv_number(relative_delta(t, num(*base, "p90_throughput_bps"))) << ','
          << csv_number(relative_delta(d, num(*base, "p90_delay_s"))) << '\n';
    }
    io::write_file(o.out / "comparison.csv", csv.str());
    out << csv.str();
  } catch (const json::exception& e) {
    fail(ErrorKind::io, std::string("summary: ") + e.what());
  }
  return exit_ok;
}

inline int cmd_analyze(const AnalyzeOptions& o, std::ostream& out) {
  const int modes = int(o.appendix_a) + int(!o.cdf_inputs.empty()) + int(!o.compare_inputs.empty());
  if (modes != 1) fail(ErrorKind::configuration, "choose exactly one of --appendix-a, --cdf, --compare");
  if (o.appendix_a) return analyze_appendix_a(o, out);
  if (!o.cdf_inputs.empty()) return analyze_cdf(o, out);
  return analyze_compare(o, out);
}

// Entry point

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Gateway placement and queue management planner and simulator"};
  app.require_subcommand(1);

  GenerateOptions gen;
  auto* g = app.add_subcommand("generate", "Generate a random-waypoint scenario");
  g->add_option("--faps", gen.faps, "Number of FAPs")->required();
  g->add_option("--duration", gen.duration_s, "Scenario duration in seconds");
  g->add_option("--period", gen.period_s, "Planning period in seconds");
  g->add_option("--seed", gen.seed, "Mobility seed");
  g->add_option("--out", gen.out, "Output directory")->required();
  g->add_option("--name", gen.name, "Scenario file stem");
  g->add_option("--demand-mbps", gen.demand_mbps, "Per-FAP demands, reused cyclically")->delimiter(',');
  g->add_option("--speed-min", gen.mobility.speed_min_mps, "Minimum leg speed (m/s)");
  g->add_option("--speed-max", gen.mobility.speed_max_mps, "Maximum leg speed (m/s)");
  g->add_option("--pause", gen.mobility.pause_s, "Pause at each waypoint (s)");
  g->add_option("--planar-z", gen.planar_z_m, "Fixed FAP altitude (m)");
  g->add_option("--x-max", gen.venue.x_max_m, "Venue length (m)");
  g->add_option("--y-max", gen.venue.y_max_m, "Venue width (m)");
  g->add_option("--z-max", gen.venue.z_max_m, "Venue height (m)");
  g->add_option("--min-separation", gen.venue.min_separation_m, "Minimum FGW-FAP distance (m)");
  g->add_option("--min-altitude", gen.venue.min_altitude_m, "FGW altitude floor (m)");
  g->add_flag("--static", gen.still, "Hold every FAP at its initial position");
  g->add_flag("--inline-waypoints", gen.inline_waypoints, "Embed waypoints in the scenario JSON");

  PlanOptions plan;
  auto* p = app.add_subcommand("plan", "Plan FGW position, power and queue sizes per snapshot");
  p->add_option("--scenario", plan.scenario, "Scenario JSON")->required();
  p->add_option("--out", plan.out, "Plan JSON to write")->required();
  p->add_option("--delay-threshold", plan.delay_threshold_s, "Delay bound H in seconds");
  p->add_option("--power-step", plan.power_step_db, "Power step in dB");

  SimulateOptions sim;
  auto* s = app.add_subcommand("simulate", "Simulate a scenario under a placement and queue policy");
  s->add_option("--scenario", sim.scenario, "Scenario JSON")->required();
  s->add_option("--plan", sim.plan, "Plan JSON");
  s->add_option("--policy", sim.policy, "FGW placement")->check(CLI::IsMember({"gpqm", "centroid", "venue-center"}));
  s->add_option("--queue", sim.queue, "Queue discipline")->check(CLI::IsMember({"scheduled", "droptail", "red", "codel"}));
  s->add_option("--queue-size", sim.queue_size, "Drop-Tail size in packets");
  s->add_option("--seed", sim.seed, "First seed");
  s->add_option("--runs", sim.runs, "Number of consecutive seeds");
  s->add_option("--out", sim.out, "Output directory");
  s->add_option("--channel-mode", sim.channel_mode, "Capacity model")->check(CLI::IsMember({"independent", "shared"}));
  s->add_option("--fading", sim.fading, "Rician fading")->check(CLI::IsMember({"on", "off"}));
  s->add_option("--traffic", sim.traffic, "Source model")->check(CLI::IsMember({"poisson", "onoff", "aimd"}));
  s->add_option("--bootstrap", sim.bootstrap_s, "Warm-up excluded from metrics (s)");
  s->add_option("--measure", sim.measure_s, "Measurement window (s)");
  s->add_option("--cdf-rows", sim.cdf_rows, "Row cap for delay CDF tables (0 keeps all)");
  s->add_flag("--packet-log", sim.packet_log, "Write per-packet records");

  BenchmarkOptions bench;
  auto* b = app.add_subcommand("benchmark", "Compare planner and PSO plans on random static instances");
  b->add_option("--faps", bench.faps, "FAPs per instance");
  b->add_option("--instances", bench.instances, "Number of instances");
  b->add_option("--seed", bench.seed, "Instance seed");
  b->add_option("--demand-fractions", bench.demand_fractions, "Demands as fractions of the reference share")
      ->delimiter(',');
  b->add_option("--capacity", bench.capacity, "PSO capacity model")
      ->check(CLI::IsMember({"shannon", "regression", "mcs_table"}));
  b->add_option("--iterations", bench.iterations, "PSO iterations");
  b->add_option("--swarm", bench.swarm, "PSO swarm size");
  b->add_option("--bootstrap", bench.bootstrap_s, "Warm-up excluded from metrics (s)");
  b->add_option("--measure", bench.measure_s, "Measurement window (s)");
  b->add_flag("--reference-row", bench.reference_row, "Append the published local optimum of the reference snapshot");
  b->add_option("--out", bench.out, "Report CSV to write");

  AnalyzeOptions an;
  auto* a = app.add_subcommand("analyze", "Capacity extremes, CDF tables and run comparisons");
  a->add_flag("--appendix-a", an.appendix_a, "Capacity extremes over two FAP spheres");
  a->add_option("--two-faps", an.two_faps, "x1,y1,z1,x2,y2,z2,r1,r2")->delimiter(',')->expected(8);
  a->add_option("--capacity", an.capacity, "Capacity model")
      ->check(CLI::IsMember({"shannon", "regression", "mcs_table"}));
  a->add_option("--power", an.tx_power_dbm, "Transmit power (dBm)");
  a->add_option("--cdf", an.cdf_inputs, "CSV files or seed directories to pool");
  a->add_option("--column", an.column, "CSV column for --cdf");
  a->add_option("--max-rows", an.max_rows, "Row cap for the CDF table (0 keeps all)");
  a->add_option("--compare", an.compare_inputs, "Summary files or directories");
  a->add_option("--baseline", an.baseline, "Baseline label for --compare");
  a->add_option("--out", an.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_usage;
  }

  try {
    if (g->parsed()) return cmd_generate(gen, out);
    if (p->parsed()) return cmd_plan(plan, out);
    if (s->parsed()) return cmd_simulate(sim, out);
    if (b->parsed()) return cmd_benchmark(bench, out);
    return cmd_analyze(an, out);
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << "error (io): " << e.what() << '\n';
    return exit_io;
  }
}

}  // namespace gpqm::cli

#pragma once

// File formats: waypoint text, scenario JSON and plan-series JSON.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpqm/channel.hpp"
#include "gpqm/error.hpp"
#include "gpqm/placement.hpp"
#include "gpqm/planner.hpp"
#include "gpqm/scenario.hpp"

namespace gpqm::io {

using nlohmann::json;

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write " + path.string());
  out << content;
  if (!out) fail(ErrorKind::io, "write failed for " + path.string());
}

inline json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::io, origin + ": " + e.what());
  }
}

inline std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

// One line per waypoint: "<fap_id> <t_s> <x> <y> <z>".
inline void write_waypoints(std::ostream& os, const ScenarioTrace& trace) {
  for (const auto& f : trace.faps)
    for (const auto& w : f.waypoints)
      os << f.id << ' ' << fixed6(w.t_s) << ' ' << fixed6(w.position.x) << ' ' << fixed6(w.position.y)
         << ' ' << fixed6(w.position.z) << '\n';
}

inline std::map<int, std::vector<Waypoint>> read_waypoints(std::istream& is) {
  std::map<int, std::vector<Waypoint>> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    int id = 0;
    Waypoint w;
    if (!(ls >> id >> w.t_s >> w.position.x >> w.position.y >> w.position.z))
      fail(ErrorKind::io, "waypoint line " + std::to_string(lineno) + " is malformed");
    out[id].push_back(w);
  }
  return out;
}

inline json to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

inline Vec3 vec3_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) fail(ErrorKind::io, "expected [x, y, z]");
  return Vec3{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline json to_json(const Venue& v) {
  return {{"x_max_m", v.x_max_m}, {"y_max_m", v.y_max_m}, {"z_max_m", v.z_max_m},
          {"min_separation_m", v.min_separation_m}, {"min_altitude_m", v.min_altitude_m}};
}

inline Venue venue_from_json(const json& j) {
  Venue v;
  v.x_max_m = j.value("x_max_m", v.x_max_m);
  v.y_max_m = j.value("y_max_m", v.y_max_m);
  v.z_max_m = j.value("z_max_m", v.z_max_m);
  v.min_separation_m = j.value("min_separation_m", v.min_separation_m);
  v.min_altitude_m = j.value("min_altitude_m", v.min_altitude_m);
  return v;
}

inline json to_json(const ChannelParams& c) {
  return {{"carrier_frequency_hz", c.carrier_frequency_hz}, {"noise_power_dbm", c.noise_power_dbm},
          {"bandwidth_hz", c.bandwidth_hz},                 {"mac_efficiency", c.mac_efficiency},
          {"max_tx_power_dbm", c.max_tx_power_dbm},         {"rician_k_db", c.rician_k_db}};
}

inline ChannelParams channel_from_json(const json& j) {
  ChannelParams c;
  c.carrier_frequency_hz = j.value("carrier_frequency_hz", c.carrier_frequency_hz);
  c.noise_power_dbm = j.value("noise_power_dbm", c.noise_power_dbm);
  c.bandwidth_hz = j.value("bandwidth_hz", c.bandwidth_hz);
  c.mac_efficiency = j.value("mac_efficiency", c.mac_efficiency);
  c.max_tx_power_dbm = j.value("max_tx_power_dbm", c.max_tx_power_dbm);
  c.rician_k_db = j.value("rician_k_db", c.rician_k_db);
  return c;
}

inline json to_json(const McsTable& t) {
  json rows = json::array();
  for (const auto& e : t.entries())
    rows.push_back({{"index", e.index}, {"min_snr_db", e.min_snr_db}, {"phy_rate_bps", e.phy_rate_bps},
                    {"fair_share_bps", e.fair_share_bps}});
  return {{"contender_count", t.contender_count()}, {"entries", rows}};
}

inline std::vector<McsEntry> mcs_entries_from_json(const json& rows) {
  std::vector<McsEntry> out;
  for (const auto& r : rows)
    out.push_back({r.at("index").get<int>(), r.at("min_snr_db").get<double>(), r.at("phy_rate_bps").get<double>(),
                   r.at("fair_share_bps").get<double>()});
  return out;
}

inline json to_json(const MobilityParams& m) {
  json j = {{"speed_min_mps", m.speed_min_mps}, {"speed_max_mps", m.speed_max_mps}, {"pause_s", m.pause_s}};
  if (m.planar_z_m) j["planar_z_m"] = *m.planar_z_m;
  return j;
}

inline MobilityParams mobility_from_json(const json& j) {
  MobilityParams m;
  m.speed_min_mps = j.value("speed_min_mps", m.speed_min_mps);
  m.speed_max_mps = j.value("speed_max_mps", m.speed_max_mps);
  m.pause_s = j.value("pause_s", m.pause_s);
  if (j.contains("planar_z_m")) m.planar_z_m = j.at("planar_z_m").get<double>();
  return m;
}

struct PlannerOverrides {
  std::optional<double> delay_threshold_s;
  std::optional<double> packet_size_bytes;
  std::optional<double> power_step_db;
};

// A scenario as stored on disk: the trace plus the MCS table and planner
// settings that apply to it.
struct ScenarioFile {
  ScenarioTrace trace;
  McsTable mcs = mcs::default_table();
  MobilityParams mobility;
  PlannerOverrides planner;
  std::optional<std::vector<McsEntry>> mcs_overrides;
  std::optional<std::string> waypoints_file;  // relative to the scenario file

  PlannerConfig planner_config() const {
    PlannerConfig cfg = planner_config_for(trace, mcs);
    if (planner.delay_threshold_s) cfg.delay_threshold_s = *planner.delay_threshold_s;
    if (planner.packet_size_bytes) cfg.packet_size_bytes = *planner.packet_size_bytes;
    if (planner.power_step_db) cfg.power_step_db = *planner.power_step_db;
    return cfg;
  }
};

// Table for a FAP count: the default ladder, or the overrides when given.
inline McsTable table_for(int fap_count, double efficiency, const std::optional<std::vector<McsEntry>>& overrides) {
  const int contenders = std::max(1, fap_count);
  if (overrides) return McsTable(*overrides, contenders);
  return mcs::default_table(contenders, efficiency);
}

inline json to_json(const ScenarioFile& s, bool inline_waypoints) {
  json faps = json::array();
  for (const auto& f : s.trace.faps) {
    json jf = {{"id", f.id}};
    if (f.demand.size() == 1 && f.demand.front().t_s == 0.0) {
      jf["demand_bps"] = f.demand.front().demand_bps;
    } else {
      json sched = json::array();
      for (const auto& d : f.demand) sched.push_back({{"t_s", d.t_s}, {"demand_bps", d.demand_bps}});
      jf["demand_schedule"] = sched;
    }
    if (inline_waypoints) {
      json wps = json::array();
      for (const auto& w : f.waypoints) wps.push_back({w.t_s, w.position.x, w.position.y, w.position.z});
      jf["waypoints"] = wps;
    }
    faps.push_back(jf);
  }
  json j = {{"venue", to_json(s.trace.venue)},
            {"channel", to_json(s.trace.channel)},
            {"mobility", to_json(s.mobility)},
            {"faps", faps},
            {"duration_s", s.trace.duration_s},
            {"planning_period_s", s.trace.planning_period_s},
            {"seed", s.trace.seed}};
  if (s.mcs_overrides) j["mcs_overrides"] = to_json(McsTable(*s.mcs_overrides, s.mcs.contender_count()))["entries"];
  json planner = json::object();
  if (s.planner.delay_threshold_s) planner["delay_threshold_s"] = *s.planner.delay_threshold_s;
  if (s.planner.packet_size_bytes) planner["packet_size_bytes"] = *s.planner.packet_size_bytes;
  if (s.planner.power_step_db) planner["power_step_db"] = *s.planner.power_step_db;
  if (!planner.empty()) j["planner"] = planner;
  if (s.waypoints_file && !inline_waypoints) j["waypoints_file"] = *s.waypoints_file;
  return j;
}

// external_waypoints fills FAPs whose entry carries no inline waypoints.
inline ScenarioFile scenario_from_json(const json& j,
                                       const std::map<int, std::vector<Waypoint>>* external_waypoints = nullptr) {
  try {
    ScenarioFile s;
    s.trace.venue = venue_from_json(j.value("venue", json::object()));
    s.trace.channel = channel_from_json(j.value("channel", json::object()));
    s.mobility = mobility_from_json(j.value("mobility", json::object()));
    s.trace.duration_s = j.value("duration_s", s.trace.duration_s);
    s.trace.planning_period_s = j.value("planning_period_s", s.trace.planning_period_s);
    s.trace.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("mcs_overrides")) s.mcs_overrides = mcs_entries_from_json(j.at("mcs_overrides"));
    if (j.contains("waypoints_file")) s.waypoints_file = j.at("waypoints_file").get<std::string>();
    if (j.contains("planner")) {
      const auto& p = j.at("planner");
      if (p.contains("delay_threshold_s")) s.planner.delay_threshold_s = p.at("delay_threshold_s").get<double>();
      if (p.contains("packet_size_bytes")) s.planner.packet_size_bytes = p.at("packet_size_bytes").get<double>();
      if (p.contains("power_step_db")) s.planner.power_step_db = p.at("power_step_db").get<double>();
    }
    for (const auto& jf : j.at("faps")) {
      FapTrace f;
      f.id = jf.at("id").get<int>();
      if (jf.contains("demand_bps")) {
        f.demand = {{0.0, jf.at("demand_bps").get<double>()}};
      } else if (jf.contains("demand_schedule")) {
        for (const auto& d : jf.at("demand_schedule"))
          f.demand.push_back({d.at("t_s").get<double>(), d.at("demand_bps").get<double>()});
      } else {
        fail(ErrorKind::io, "FAP " + std::to_string(f.id) + " has no demand");
      }
      if (jf.contains("waypoints")) {
        for (const auto& w : jf.at("waypoints")) {
          if (!w.is_array() || w.size() != 4) fail(ErrorKind::io, "waypoint must be [t, x, y, z]");
          f.waypoints.push_back({w[0].get<double>(), {w[1].get<double>(), w[2].get<double>(), w[3].get<double>()}});
        }
      } else if (jf.contains("position")) {
        f.waypoints = {{0.0, vec3_from_json(jf.at("position"))}};
      } else if (external_waypoints && external_waypoints->contains(f.id)) {
        f.waypoints = external_waypoints->at(f.id);
      } else {
        fail(ErrorKind::io, "FAP " + std::to_string(f.id) + " has no waypoints");
      }
      s.trace.faps.push_back(std::move(f));
    }
    s.mcs = table_for(static_cast<int>(s.trace.faps.size()), s.trace.channel.mac_efficiency, s.mcs_overrides);
    s.trace.validate();
    return s;
  } catch (const json::exception& e) {
    fail(ErrorKind::io, std::string("scenario: ") + e.what());
  }
}

inline ScenarioFile load_scenario(const std::filesystem::path& path) {
  const json j = parse_json(read_file(path), path.string());
  if (j.contains("waypoints_file")) {
    const auto wp = path.parent_path() / j.at("waypoints_file").get<std::string>();
    std::istringstream in(read_file(wp));
    const auto waypoints = read_waypoints(in);
    return scenario_from_json(j, &waypoints);
  }
  return scenario_from_json(j);
}

inline json to_json(const PlannerConfig& c) {
  return {{"delay_threshold_s", c.delay_threshold_s}, {"packet_size_bytes", c.packet_size_bytes},
          {"power_step_db", c.power_step_db},         {"update_period_s", c.update_period_s},
          {"venue", to_json(c.venue)},                {"channel", to_json(c.channel)},
          {"mcs", to_json(c.mcs)}};
}

inline json to_json(const GpqmPlan& p) {
  json faps = json::array();
  for (const auto& f : p.faps)
    faps.push_back({{"id", f.id},
                    {"mcs", f.mcs_index},
                    {"snr_db", f.target_snr_db},
                    {"capacity_bps", f.capacity_bps},
                    {"rho", f.rho},
                    {"queue_pkts", f.queue_pkts},
                    {"delay_s", f.delay_s},
                    {"plr", f.plr}});
  return {{"t", p.time_s}, {"p_tx_dbm", p.tx_power_dbm}, {"fgw", to_json(p.fgw_position)}, {"faps", faps}};
}

inline json to_json(const PlanSeries& series, const PlannerConfig& config) {
  json plans = json::array();
  for (const auto& p : series.plans) plans.push_back(to_json(p));
  return {{"config_echo", to_json(config)}, {"planning_period_s", series.planning_period_s}, {"plans", plans}};
}

inline PlanSeries plan_series_from_json(const json& j) {
  try {
    PlanSeries s;
    s.planning_period_s = j.value("planning_period_s", 1.0);
    for (const auto& jp : j.at("plans")) {
      GpqmPlan p;
      p.time_s = jp.at("t").get<double>();
      p.tx_power_dbm = jp.at("p_tx_dbm").get<double>();
      p.fgw_position = vec3_from_json(jp.at("fgw"));
      for (const auto& jf : jp.at("faps"))
        p.faps.push_back({jf.at("id").get<int>(), jf.at("mcs").get<int>(), jf.at("snr_db").get<double>(),
                          jf.at("capacity_bps").get<double>(), jf.at("rho").get<double>(),
                          jf.at("queue_pkts").get<int>(), jf.at("delay_s").get<double>(), jf.at("plr").get<double>()});
      if (!s.plans.empty() && !(p.time_s > s.plans.back().time_s))
        fail(ErrorKind::io, "plan times must be strictly increasing");
      s.plans.push_back(std::move(p));
    }
    return s;
  } catch (const json::exception& e) {
    fail(ErrorKind::io, std::string("plan: ") + e.what());
  }
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace gpqm::io

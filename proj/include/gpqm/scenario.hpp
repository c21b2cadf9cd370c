#pragma once

// Scenario traces: per-FAP waypoint sequences with demand schedules, random
// waypoint generation, interpolation and planning snapshots.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "gpqm/channel.hpp"
#include "gpqm/error.hpp"
#include "gpqm/placement.hpp"
#include "gpqm/planner.hpp"
#include "gpqm/vec3.hpp"

namespace gpqm {

struct Waypoint {
  double t_s = 0.0;
  Vec3 position;
};

struct DemandStep {
  double t_s = 0.0;
  double demand_bps = 0.0;
};

struct FapTrace {
  int id = 0;
  std::vector<Waypoint> waypoints;
  std::vector<DemandStep> demand;  // piecewise constant, first step at t=0

  double demand_at(double t_s) const {
    double d = 0.0;
    for (const auto& s : demand) {
      if (s.t_s <= t_s + 1e-9) d = s.demand_bps;
      else break;
    }
    return d;
  }
};

struct ScenarioTrace {
  Venue venue;
  ChannelParams channel;
  double duration_s = 70.0;
  double planning_period_s = 5.0;
  std::vector<FapTrace> faps;
  std::uint64_t seed = 0;

  const FapTrace& fap(int id) const {
    for (const auto& f : faps)
      if (f.id == id) return f;
    fail(ErrorKind::domain, "unknown FAP id " + std::to_string(id));
  }

  void validate() const {
    venue.validate();
    channel.validate();
    if (!(duration_s > 0.0)) fail(ErrorKind::domain, "duration must be > 0");
    if (!(planning_period_s > 0.0)) fail(ErrorKind::domain, "planning period must be > 0");
    for (const auto& f : faps) {
      if (f.waypoints.empty() || f.waypoints.front().t_s != 0.0)
        fail(ErrorKind::domain, "FAP " + std::to_string(f.id) + ": waypoints must start at t=0");
      for (std::size_t i = 0; i < f.waypoints.size(); ++i) {
        if (!venue.contains(f.waypoints[i].position))
          fail(ErrorKind::domain, "FAP " + std::to_string(f.id) + ": waypoint outside the venue");
        if (i > 0 && f.waypoints[i].t_s < f.waypoints[i - 1].t_s)
          fail(ErrorKind::domain, "FAP " + std::to_string(f.id) + ": waypoints not time-sorted");
      }
    }
  }
};

struct MobilityParams {
  double speed_min_mps = 0.5;
  double speed_max_mps = 3.0;
  double pause_s = 0.0;
  std::optional<double> planar_z_m;  // fixed altitude instead of 3D targets

  void validate() const {
    if (!(speed_min_mps > 0.0 && speed_min_mps <= speed_max_mps))
      fail(ErrorKind::domain, "speeds must satisfy 0 < min <= max");
    if (!(pause_s >= 0.0)) fail(ErrorKind::domain, "pause must be >= 0");
  }
};

inline Vec3 position_at(const FapTrace& f, double t_s) {
  const auto& w = f.waypoints;
  if (w.empty()) fail(ErrorKind::domain, "FAP " + std::to_string(f.id) + " has no waypoints");
  if (t_s <= w.front().t_s) return w.front().position;
  for (std::size_t i = 1; i < w.size(); ++i) {
    if (t_s <= w[i].t_s) {
      const double span = w[i].t_s - w[i - 1].t_s;
      if (span <= 0.0) return w[i].position;
      return lerp(w[i - 1].position, w[i].position, (t_s - w[i - 1].t_s) / span);
    }
  }
  return w.back().position;
}

inline Vec3 position_at(const ScenarioTrace& trace, int fap_id, double t_s) {
  if (t_s < 0.0 || t_s > trace.duration_s + 1e-9)
    fail(ErrorKind::domain, "t=" + std::to_string(t_s) + " outside [0, duration]");
  return position_at(trace.fap(fap_id), t_s);
}

// Random waypoint mobility: uniform targets in the venue, uniform leg speed,
// optional pause; the last leg is cut at the scenario duration.
inline ScenarioTrace generate_rwm(int n_faps, const Venue& venue, const MobilityParams& mobility,
                                  double duration_s, std::uint64_t seed) {
  if (n_faps < 1) fail(ErrorKind::domain, "need at least one FAP");
  venue.validate();
  mobility.validate();
  if (!(duration_s > 0.0)) fail(ErrorKind::domain, "duration must be > 0");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(0.0, venue.x_max_m), uy(0.0, venue.y_max_m),
      uz(venue.min_altitude_m, venue.z_max_m), uv(mobility.speed_min_mps, mobility.speed_max_mps);
  const auto draw = [&] {
    const double x = ux(rng), y = uy(rng);
    return Vec3{x, y, mobility.planar_z_m ? *mobility.planar_z_m : uz(rng)};
  };

  ScenarioTrace trace;
  trace.venue = venue;
  trace.duration_s = duration_s;
  trace.seed = seed;
  for (int id = 1; id <= n_faps; ++id) {
    FapTrace f;
    f.id = id;
    Vec3 here = draw();
    double t = 0.0;
    f.waypoints.push_back({0.0, here});
    while (t < duration_s) {
      const Vec3 target = draw();
      const double speed = uv(rng);
      const double leg = distance(here, target) / speed;
      if (t + leg >= duration_s) {
        f.waypoints.push_back({duration_s, lerp(here, target, (duration_s - t) / leg)});
        break;
      }
      t += leg;
      here = target;
      f.waypoints.push_back({t, here});
      if (mobility.pause_s > 0.0) {
        t = std::min(duration_s, t + mobility.pause_s);
        f.waypoints.push_back({t, here});
      }
    }
    trace.faps.push_back(std::move(f));
  }
  return trace;
}

// Constant demand per FAP as a fraction of a reference share; fractions are
// reused cyclically when there are more FAPs than fractions.
inline void assign_demand_fractions(ScenarioTrace& trace, const std::vector<double>& fractions,
                                    double reference_share_bps) {
  if (fractions.empty()) fail(ErrorKind::domain, "need at least one demand fraction");
  for (std::size_t i = 0; i < trace.faps.size(); ++i)
    trace.faps[i].demand = {{0.0, fractions[i % fractions.size()] * reference_share_bps}};
}

inline Snapshot snapshot_at(const ScenarioTrace& trace, double t_s) {
  Snapshot s;
  s.time_s = t_s;
  for (const auto& f : trace.faps) s.faps.push_back({f.id, position_at(f, t_s), f.demand_at(t_s)});
  return s;
}

inline std::vector<Snapshot> snapshots(const ScenarioTrace& trace) {
  if (!(trace.planning_period_s > 0.0)) fail(ErrorKind::domain, "planning period must be > 0");
  const auto count = static_cast<long>(std::floor(trace.duration_s / trace.planning_period_s + 1e-9));
  std::vector<Snapshot> out;
  for (long k = 0; k <= count; ++k) out.push_back(snapshot_at(trace, static_cast<double>(k) * trace.planning_period_s));
  return out;
}

// A trace that holds every FAP of a snapshot still for duration_s.
inline ScenarioTrace static_trace(const Snapshot& s, const Venue& venue, const ChannelParams& channel,
                                  double duration_s, double planning_period_s) {
  ScenarioTrace t;
  t.venue = venue;
  t.channel = channel;
  t.duration_s = duration_s;
  t.planning_period_s = planning_period_s;
  for (const auto& f : s.faps) t.faps.push_back({f.id, {{0.0, f.position}}, {{0.0, f.demand_bps}}});
  return t;
}

inline PlannerConfig planner_config_for(const ScenarioTrace& trace, const McsTable& table) {
  PlannerConfig cfg{.venue = trace.venue, .channel = trace.channel, .mcs = table};
  cfg.update_period_s = trace.planning_period_s;
  return cfg;
}

inline PlanSeries plan_series(const ScenarioTrace& trace, const PlannerConfig& config) {
  PlanSeries out;
  out.planning_period_s = trace.planning_period_s;
  for (const auto& snap : snapshots(trace)) {
    try {
      out.plans.push_back(plan_snapshot(snap, config));
    } catch (const Error& e) {
      if (e.time_s()) throw;
      throw Error(e.kind(), "t=" + std::to_string(snap.time_s) + ": " + e.what(), snap.time_s);
    }
  }
  return out;
}

}  // namespace gpqm

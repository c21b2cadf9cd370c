#pragma once

// The GPQM planner: for one snapshot of FAP positions and demands, find the
// lowest common TX power at which an FGW position meets every FAP's target MCS,
// then size each FAP queue from its M/D/1 load.

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "gpqm/channel.hpp"
#include "gpqm/error.hpp"
#include "gpqm/placement.hpp"
#include "gpqm/queueing.hpp"
#include "gpqm/vec3.hpp"

namespace gpqm {

struct FapState {
  int id = 0;
  Vec3 position;
  double demand_bps = 0.0;
};

struct Snapshot {
  double time_s = 0.0;
  std::vector<FapState> faps;
};

struct PlannerConfig {
  double delay_threshold_s = 0.010;
  double packet_size_bytes = 1400.0;
  Venue venue;
  ChannelParams channel;
  McsTable mcs = mcs::default_table();
  double power_step_db = 1.0;
  double update_period_s = 5.0;

  void validate() const {
    if (!(delay_threshold_s > 0.0)) fail(ErrorKind::domain, "delay threshold must be > 0");
    if (!(packet_size_bytes > 0.0)) fail(ErrorKind::domain, "packet size must be > 0");
    if (!(power_step_db > 0.0)) fail(ErrorKind::domain, "power step must be > 0");
    if (!(update_period_s > 0.0)) fail(ErrorKind::domain, "update period must be > 0");
    venue.validate();
    channel.validate();
  }
};

struct FapPlan {
  int id = 0;
  int mcs_index = 0;
  double target_snr_db = 0.0;
  double capacity_bps = 0.0;
  double rho = 0.0;
  int queue_pkts = 1;
  double delay_s = 0.0;
  double plr = 0.0;
};

struct GpqmPlan {
  double time_s = 0.0;
  double tx_power_dbm = 0.0;
  Vec3 fgw_position;
  std::vector<FapPlan> faps;

  const FapPlan* find(int id) const {
    for (const auto& f : faps)
      if (f.id == id) return &f;
    return nullptr;
  }
};

struct PlanSeries {
  double planning_period_s = 1.0;
  std::vector<GpqmPlan> plans;

  // Zero-order hold: the latest plan issued at or before t.
  const GpqmPlan& at(double t_s) const {
    if (plans.empty()) fail(ErrorKind::configuration, "empty plan series");
    auto it = std::upper_bound(plans.begin(), plans.end(), t_s + 1e-9,
                               [](double t, const GpqmPlan& p) { return t < p.time_s; });
    if (it == plans.begin()) fail(ErrorKind::configuration, "no plan covers t=" + std::to_string(t_s));
    return *std::prev(it);
  }

  // Resample onto a 1 s grid over [0, duration] by zero-order hold.
  PlanSeries resampled(double duration_s, double period_s = 1.0) const {
    PlanSeries out;
    out.planning_period_s = period_s;
    const auto count = static_cast<long>(std::floor(duration_s / period_s + 1e-9));
    for (long k = 0; k <= count; ++k) {
      GpqmPlan p = at(static_cast<double>(k) * period_s);
      p.time_s = static_cast<double>(k) * period_s;
      out.plans.push_back(std::move(p));
    }
    return out;
  }
};

inline double aggregate_capacity_limit(const McsTable& table, double efficiency,
                                       const std::vector<int>& mcs_indexes) {
  double top = 0.0;
  for (int idx : mcs_indexes) {
    auto pos = table.position_of(idx);
    if (pos) top = std::max(top, table.entries()[*pos].phy_rate_bps);
  }
  return efficiency * top;
}

inline void validate_snapshot(const Snapshot& s, const Venue& venue) {
  if (s.faps.empty()) fail(ErrorKind::domain, "snapshot has no FAPs");
  std::set<int> ids;
  for (const auto& f : s.faps) {
    if (!ids.insert(f.id).second) fail(ErrorKind::domain, "duplicate FAP id " + std::to_string(f.id));
    if (!venue.contains(f.position))
      fail(ErrorKind::domain, "FAP " + std::to_string(f.id) + " lies outside the venue");
    if (!(f.demand_bps > 0.0))
      fail(ErrorKind::domain, "FAP " + std::to_string(f.id) + " demand must be > 0");
  }
}

namespace detail {

inline std::vector<SphereConstraint> spheres_for(const Snapshot& s, const PlannerConfig& cfg,
                                                 const std::vector<std::size_t>& targets, double tx_power_dbm) {
  std::vector<SphereConstraint> out;
  for (std::size_t i = 0; i < s.faps.size(); ++i) {
    const auto& e = cfg.mcs.entries()[targets[i]];
    out.push_back({s.faps[i].position, max_distance(cfg.channel, tx_power_dbm, e.min_snr_db)});
  }
  return out;
}

inline double predicted_delay(double demand_bps, double capacity_bps, double packet_size_bytes) {
  const double rho = demand_bps / capacity_bps;
  if (rho >= 1.0) return std::numeric_limits<double>::infinity();
  return md1_delay(rho, capacity_bps / (8.0 * packet_size_bytes));
}

}  // namespace detail

// Result of the placement/delay test at one power level for given MCS
// positions in the table; shared by the planner loop and minimality checks.
struct PowerLevelOutcome {
  bool subspace_empty = true;
  bool delays_met = false;
  Vec3 position;
};

inline PowerLevelOutcome test_power_level(const Snapshot& s, const PlannerConfig& cfg,
                                          const std::vector<std::size_t>& targets, double tx_power_dbm) {
  PowerLevelOutcome out;
  const auto spheres = detail::spheres_for(s, cfg, targets, tx_power_dbm);
  const auto placed = compute_fgw_pos(spheres, cfg.venue);
  if (placed.empty()) return out;
  out.subspace_empty = false;
  out.position = *placed.position;
  out.delays_met = true;
  for (std::size_t i = 0; i < s.faps.size(); ++i) {
    const double c = cfg.mcs.entries()[targets[i]].fair_share_bps;
    if (!(detail::predicted_delay(s.faps[i].demand_bps, c, cfg.packet_size_bytes) < cfg.delay_threshold_s))
      out.delays_met = false;
  }
  return out;
}

inline std::vector<std::size_t> demand_targets(const Snapshot& s, const PlannerConfig& cfg) {
  std::vector<std::size_t> targets;
  for (const auto& f : s.faps) {
    try {
      targets.push_back(*cfg.mcs.position_of(select_mcs(cfg.mcs, f.demand_bps).index));
    } catch (const Error& e) {
      throw Error(e.kind(), "t=" + std::to_string(s.time_s) + ": FAP " + std::to_string(f.id) + ": " + e.what(), s.time_s);
    }
  }
  return targets;
}

struct PlanDiagnostics {
  int power_iterations = 0;
  int mcs_escalations = 0;
  std::vector<std::size_t> final_targets;  // positions in the MCS table
};

inline GpqmPlan plan_snapshot(const Snapshot& s, const PlannerConfig& cfg, PlanDiagnostics* diag = nullptr) {
  cfg.validate();
  validate_snapshot(s, cfg.venue);
  const auto at_time = [&](ErrorKind k, const std::string& msg) {
    throw Error(k, "t=" + std::to_string(s.time_s) + ": " + msg, s.time_s);
  };

  auto targets = demand_targets(s, cfg);
  const auto indexes_of = [&] {
    std::vector<int> idx;
    for (auto t : targets) idx.push_back(cfg.mcs.entries()[t].index);
    return idx;
  };

  double demand_sum = 0.0;
  for (const auto& f : s.faps) demand_sum += f.demand_bps;
  if (demand_sum > aggregate_capacity_limit(cfg.mcs, cfg.channel.mac_efficiency, indexes_of()))
    at_time(ErrorKind::aggregate_capacity, "aggregate demand exceeds the channel capacity");

  PlanDiagnostics local;
  const auto levels = static_cast<int>(std::floor(cfg.channel.max_tx_power_dbm / cfg.power_step_db + 1e-9));
  for (int k = 0; k <= levels; ++k) {
    const double p_tx = k * cfg.power_step_db;
    ++local.power_iterations;
    for (;;) {
      const auto outcome = test_power_level(s, cfg, targets, p_tx);
      if (outcome.subspace_empty) break;
      if (outcome.delays_met) {
        double capacity_sum = 0.0;
        for (auto t : targets) capacity_sum += cfg.mcs.entries()[t].fair_share_bps;
        if (capacity_sum > aggregate_capacity_limit(cfg.mcs, cfg.channel.mac_efficiency, indexes_of()))
          at_time(ErrorKind::aggregate_capacity, "selected fair shares exceed the channel capacity");

        GpqmPlan plan;
        plan.time_s = s.time_s;
        plan.tx_power_dbm = p_tx;
        plan.fgw_position = outcome.position;
        for (std::size_t i = 0; i < s.faps.size(); ++i) {
          const auto& e = cfg.mcs.entries()[targets[i]];
          const auto flow = rates_from_traffic(s.faps[i].demand_bps, e.fair_share_bps, cfg.packet_size_bytes);
          const auto q = size_queue(flow);
          plan.faps.push_back({s.faps[i].id, e.index, e.min_snr_db, e.fair_share_bps, flow.load,
                               q.size_packets, q.predicted_delay_s, q.predicted_plr});
        }
        local.final_targets = targets;
        if (diag) *diag = local;
        return plan;
      }
      // Raising power cannot lower the delay of a FAP whose MCS is fixed, so
      // the offending FAPs move up one MCS before the loop continues.
      for (std::size_t i = 0; i < s.faps.size(); ++i) {
        const double c = cfg.mcs.entries()[targets[i]].fair_share_bps;
        if (detail::predicted_delay(s.faps[i].demand_bps, c, cfg.packet_size_bytes) < cfg.delay_threshold_s)
          continue;
        if (targets[i] + 1 >= cfg.mcs.size())
          at_time(ErrorKind::delay_infeasible,
                  "FAP " + std::to_string(s.faps[i].id) + " misses the delay threshold at the top MCS");
        ++targets[i];
        ++local.mcs_escalations;
      }
    }
  }
  throw Error(ErrorKind::placement_infeasible,
              "t=" + std::to_string(s.time_s) +
                  ": gateway placement subspace is empty at the maximum TX power; the access network "
                  "needs more FAPs or relays",
              s.time_s);
}

struct ConstraintCheck {
  std::string name;
  bool passed = false;
  double slack = 0.0;
};

struct FormulationReport {
  double objective_bps = 0.0;
  std::vector<ConstraintCheck> checks;

  int failures() const {
    return static_cast<int>(std::count_if(checks.begin(), checks.end(), [](const auto& c) { return !c.passed; }));
  }
  const ConstraintCheck* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
  std::vector<std::string> failed_names() const {
    std::vector<std::string> out;
    for (const auto& c : checks)
      if (!c.passed) out.push_back(c.name);
    return out;
  }
};

// Constraint names shared with the solver's violation lists.
namespace constraint {
inline constexpr const char* power = "power";
inline constexpr const char* aggregate = "aggregate_capacity";
inline constexpr const char* demand = "demand";
inline constexpr const char* queue = "queue_size";
inline constexpr const char* delay = "delay";
inline constexpr const char* x_bounds = "x_bounds";
inline constexpr const char* y_bounds = "y_bounds";
inline constexpr const char* z_bounds = "z_bounds";
inline constexpr const char* link = "link";
inline constexpr const char* separation = "separation";
}  // namespace constraint

inline constexpr double kLinkToleranceDb = 1e-9;

// Evaluates the objective and all ten constraints of the placement problem for
// a plan. Delays are recomputed from demand and planned capacity.
inline FormulationReport check_formulation(const GpqmPlan& plan, const Snapshot& s, const PlannerConfig& cfg) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  FormulationReport r;
  const auto add = [&](const char* name, double slack, bool strict) {
    r.checks.push_back({name, strict ? slack > 0.0 : slack >= 0.0, slack});
  };

  std::vector<const FapPlan*> per_fap;
  std::vector<int> indexes;
  for (const auto& f : s.faps) {
    per_fap.push_back(plan.find(f.id));
    if (per_fap.back()) {
      r.objective_bps += per_fap.back()->capacity_bps;
      indexes.push_back(per_fap.back()->mcs_index);
    }
  }

  add(constraint::power, std::min(plan.tx_power_dbm, cfg.channel.max_tx_power_dbm - plan.tx_power_dbm), false);
  add(constraint::aggregate,
      aggregate_capacity_limit(cfg.mcs, cfg.channel.mac_efficiency, indexes) - r.objective_bps, false);

  double demand_slack = inf, queue_slack = inf, delay_slack = inf, link_slack = inf, sep_slack = inf;
  for (std::size_t i = 0; i < s.faps.size(); ++i) {
    const auto& f = s.faps[i];
    const FapPlan* fp = per_fap[i];
    if (!fp) {
      demand_slack = queue_slack = delay_slack = link_slack = -inf;
      continue;
    }
    demand_slack = std::min(demand_slack, fp->capacity_bps - f.demand_bps);
    queue_slack = std::min(queue_slack, static_cast<double>(fp->queue_pkts));
    delay_slack = std::min(delay_slack, cfg.delay_threshold_s -
                                            detail::predicted_delay(f.demand_bps, fp->capacity_bps,
                                                                    cfg.packet_size_bytes));
    const double d = distance(plan.fgw_position, f.position);
    link_slack = std::min(link_slack, d > 0.0 ? friis_snr(cfg.channel, plan.tx_power_dbm, d) - fp->target_snr_db : inf);
    sep_slack = std::min(sep_slack, d - cfg.venue.min_separation_m);
  }
  // T_i > 0 is strict; T_i <= C_0i is not.
  const bool demands_positive =
      std::all_of(s.faps.begin(), s.faps.end(), [](const FapState& f) { return f.demand_bps > 0.0; });
  r.checks.push_back({constraint::demand, demand_slack >= 0.0 && demands_positive, demand_slack});
  add(constraint::queue, queue_slack, false);
  add(constraint::delay, delay_slack, true);

  const Vec3& g = plan.fgw_position;
  const Venue& v = cfg.venue;
  double xs = std::min(g.x, v.x_max_m - g.x), ys = std::min(g.y, v.y_max_m - g.y),
         zs = std::min(g.z - v.min_altitude_m, v.z_max_m - g.z);
  for (const auto& f : s.faps) {
    xs = std::min({xs, f.position.x, v.x_max_m - f.position.x});
    ys = std::min({ys, f.position.y, v.y_max_m - f.position.y});
    zs = std::min({zs, f.position.z, v.z_max_m - f.position.z});
  }
  add(constraint::x_bounds, xs, false);
  add(constraint::y_bounds, ys, false);
  add(constraint::z_bounds, zs, false);
  // Points on a sphere surface reproduce the target SNR only to rounding.
  r.checks.push_back({constraint::link, link_slack >= -kLinkToleranceDb, link_slack});
  add(constraint::separation, sep_slack, true);
  return r;
}

}  // namespace gpqm

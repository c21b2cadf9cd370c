#pragma once

// Particle swarm solver for the continuous placement problem and a harness
// that compares solver plans with planner plans in simulation.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "gpqm/channel.hpp"
#include "gpqm/error.hpp"
#include "gpqm/metrics.hpp"
#include "gpqm/planner.hpp"
#include "gpqm/queueing.hpp"
#include "gpqm/scenario.hpp"
#include "gpqm/simulator.hpp"

namespace gpqm {

enum class CapacityKind { shannon, regression, mcs_table };

inline const char* to_string(CapacityKind k) {
  switch (k) {
    case CapacityKind::shannon: return "shannon";
    case CapacityKind::regression: return "regression";
    case CapacityKind::mcs_table: return "mcs_table";
  }
  return "unknown";
}

// SNR-to-fair-share line through the calibrated rows of the table (MCS 2, 5
// and 7), or through every row when those are absent.
inline LinearCapacityModel anchor_regression(const McsTable& table) {
  std::vector<McsEntry> rows;
  for (const auto& a : mcs::kAnchors)
    if (auto pos = table.position_of(a.index)) rows.push_back(table.entries()[*pos]);
  if (rows.size() < 2) return regression_capacity(table);
  return regression_capacity(McsTable(std::move(rows), table.contender_count()));
}

struct OptProblem {
  Snapshot snapshot;
  PlannerConfig config;
  CapacityKind capacity = CapacityKind::regression;

  double link_capacity(double snr_db) const {
    switch (capacity) {
      case CapacityKind::shannon: return shannon_capacity(config.channel.bandwidth_hz, snr_db);
      case CapacityKind::regression: return regression(snr_db);
      case CapacityKind::mcs_table: {
        const auto e = config.mcs.best_for_snr(snr_db);
        return e ? e->fair_share_bps : 0.0;
      }
    }
    return 0.0;
  }

  // Channel cap on the summed link capacities: the MAC-efficiency share of the
  // fastest selected PHY rate, or for the Shannon model the Shannon capacity
  // at the best link SNR.
  template <class FapEvals>
  double aggregate_limit(const FapEvals& faps, const std::vector<int>& mcs_indexes) const {
    if (capacity != CapacityKind::shannon)
      return aggregate_capacity_limit(config.mcs, config.channel.mac_efficiency, mcs_indexes);
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& f : faps) best = std::max(best, f.snr_db);
    return shannon_capacity(config.channel.bandwidth_hz, best);
  }

  static OptProblem make(Snapshot s, PlannerConfig cfg, CapacityKind kind) {
    OptProblem p{std::move(s), std::move(cfg), kind, {}};
    p.regression = anchor_regression(p.config.mcs);
    return p;
  }

  LinearCapacityModel regression;
};

struct DecisionVector {
  Vec3 fgw;
  double tx_power_dbm = 0.0;

  std::array<double, 4> as_array() const { return {fgw.x, fgw.y, fgw.z, tx_power_dbm}; }
  static DecisionVector from_array(const std::array<double, 4>& a) { return {{a[0], a[1], a[2]}, a[3]}; }
};

struct Violation {
  std::string name;
  double amount = 0.0;  // in the constraint's natural unit
};

struct FapEvaluation {
  int id = 0;
  double snr_db = 0.0;
  double capacity_bps = 0.0;
  std::optional<McsEntry> mcs;  // ideal MCS at this SNR
  double rho = 0.0;
  double queue_pkts = 0.0;  // real-valued
  double delay_s = 0.0;
};

struct Evaluation {
  double objective_bps = 0.0;
  std::vector<FapEvaluation> faps;
  std::vector<Violation> violations;

  bool feasible() const { return violations.empty(); }
  std::vector<std::string> violated_names() const {
    std::vector<std::string> out;
    for (const auto& v : violations) out.push_back(v.name);
    return out;
  }
};

// Scale that turns a violation amount into a comparable penalty magnitude.
inline double violation_scale(const std::string& name) {
  if (name == constraint::aggregate || name == constraint::demand) return 1e-6;  // Mbit/s
  if (name == constraint::delay) return 1e3;                                   // ms
  return 1.0;                                                                  // dB, m
}

inline Evaluation evaluate(const OptProblem& pb, const DecisionVector& v) {
  const auto& cfg = pb.config;
  const auto& venue = cfg.venue;
  Evaluation ev;
  // Strict constraints record a violation even at zero distance from the bound.
  const auto add = [&](const char* name, double amount, bool violated) {
    if (violated) ev.violations.push_back({name, std::max(amount, 0.0)});
  };

  std::vector<int> indexes;
  double demand_short = 0.0, delay_excess = 0.0, link_short = 0.0, sep_short = 0.0;
  bool delay_bad = false, sep_bad = false, link_bad = false, queue_bad = false;
  for (const auto& f : pb.snapshot.faps) {
    FapEvaluation fe;
    fe.id = f.id;
    const double d = distance(v.fgw, f.position);
    fe.snr_db = d > 0.0 ? friis_snr(cfg.channel, v.tx_power_dbm, d) : std::numeric_limits<double>::infinity();
    fe.capacity_bps = pb.link_capacity(fe.snr_db);
    fe.mcs = cfg.mcs.best_for_snr(fe.snr_db);
    if (fe.mcs) indexes.push_back(fe.mcs->index);
    ev.objective_bps += fe.capacity_bps;

    demand_short += std::max(0.0, f.demand_bps - fe.capacity_bps);
    fe.rho = fe.capacity_bps > 0.0 ? f.demand_bps / fe.capacity_bps : std::numeric_limits<double>::infinity();
    if (fe.rho < 1.0) {
      fe.queue_pkts = md1_queue_size(fe.rho);
      fe.delay_s = md1_delay(fe.rho, fe.capacity_bps / (8.0 * cfg.packet_size_bytes));
      if (fe.delay_s >= cfg.delay_threshold_s) {
        delay_bad = true;
        delay_excess += fe.delay_s - cfg.delay_threshold_s;
      }
    } else {
      // Saturated: no finite queue or delay; charge the whole threshold.
      fe.queue_pkts = std::numeric_limits<double>::infinity();
      fe.delay_s = std::numeric_limits<double>::infinity();
      delay_bad = true;
      delay_excess += cfg.delay_threshold_s;
    }
    if (fe.queue_pkts < 0.0) queue_bad = true;
    if (!fe.mcs) {
      link_bad = true;
      link_short += cfg.mcs.front().min_snr_db - fe.snr_db;
    }
    if (d <= venue.min_separation_m) {
      sep_bad = true;
      sep_short += venue.min_separation_m - d;
    }
    ev.faps.push_back(fe);
  }

  const double p = v.tx_power_dbm;
  add(constraint::power, std::max(-p, p - cfg.channel.max_tx_power_dbm), p < 0.0 || p > cfg.channel.max_tx_power_dbm);
  const double cap = pb.aggregate_limit(ev.faps, indexes);
  add(constraint::aggregate, ev.objective_bps - cap, ev.objective_bps > cap);
  add(constraint::demand, demand_short, demand_short > 0.0);
  add(constraint::queue, 0.0, queue_bad);
  add(constraint::delay, delay_excess, delay_bad);
  const auto outside = [](double x, double lo, double hi) { return std::max({0.0, lo - x, x - hi}); };
  const double xo = outside(v.fgw.x, 0.0, venue.x_max_m), yo = outside(v.fgw.y, 0.0, venue.y_max_m),
               zo = outside(v.fgw.z, venue.min_altitude_m, venue.z_max_m);
  add(constraint::x_bounds, xo, xo > 0.0);
  add(constraint::y_bounds, yo, yo > 0.0);
  add(constraint::z_bounds, zo, zo > 0.0);
  add(constraint::link, link_short, link_bad);
  add(constraint::separation, sep_short, sep_bad);
  return ev;
}

// The decision vector as a plan: each FAP is assigned its ideal MCS at the
// candidate SNR, the model capacity, and queue size max(1, ceil(mean M/D/1 occupancy)).
inline GpqmPlan plan_from_vector(const OptProblem& pb, const DecisionVector& v) {
  const auto ev = evaluate(pb, v);
  GpqmPlan plan;
  plan.time_s = pb.snapshot.time_s;
  plan.tx_power_dbm = v.tx_power_dbm;
  plan.fgw_position = v.fgw;
  for (std::size_t i = 0; i < ev.faps.size(); ++i) {
    const auto& fe = ev.faps[i];
    FapPlan fp;
    fp.id = fe.id;
    fp.mcs_index = fe.mcs ? fe.mcs->index : -1;
    fp.target_snr_db = fe.mcs ? fe.mcs->min_snr_db : pb.config.mcs.front().min_snr_db;
    fp.capacity_bps = fe.capacity_bps;
    fp.rho = fe.rho;
    fp.queue_pkts = fe.rho < 1.0 ? configured_queue_size(fe.rho) : 1;
    fp.delay_s = fe.delay_s;
    fp.plr = mm1q_plr(std::isfinite(fe.rho) ? fe.rho : 1.0, fp.queue_pkts);
    plan.faps.push_back(fp);
  }
  return plan;
}

struct PsoParams {
  int swarm_size = 50;
  int iterations = 2000;
  double inertia = 0.72;
  double cognitive = 1.49;
  double social = 1.49;
  double penalty_weight = 1e4;
  double velocity_clamp = 0.2;  // fraction of each bound range
  std::uint64_t seed = 1;

  void validate() const {
    if (swarm_size < 2) fail(ErrorKind::domain, "swarm size must be >= 2");
    if (iterations < 1) fail(ErrorKind::domain, "iterations must be >= 1");
    if (!(penalty_weight > 0.0)) fail(ErrorKind::domain, "penalty weight must be > 0");
  }
};

struct SolverResult {
  DecisionVector best;
  double objective_bps = 0.0;
  double fitness = 0.0;
  std::vector<Violation> violations;
  std::vector<double> queue_pkts;  // real-valued
  std::vector<double> delay_s;
  std::uint64_t evaluations = 0;
  std::vector<double> fitness_history;  // global best after each iteration

  bool feasible() const { return violations.empty(); }
};

inline double penalized_fitness(const Evaluation& ev, double penalty_weight) {
  double pen = 0.0;
  for (const auto& v : ev.violations) {
    // A strict bound met with equality still costs a little.
    const double a = std::max(v.amount * violation_scale(v.name), 1e-6);
    pen += a * a;
  }
  return ev.objective_bps * 1e-6 + penalty_weight * pen;
}

struct SearchBox {
  std::array<double, 4> lo;
  std::array<double, 4> hi;
};

inline SearchBox search_box(const OptProblem& pb) {
  const auto& v = pb.config.venue;
  return {{0.0, 0.0, v.min_altitude_m, 0.0}, {v.x_max_m, v.y_max_m, v.z_max_m, pb.config.channel.max_tx_power_dbm}};
}

// Global-best PSO on the penalized fitness. The best feasible point seen is
// tracked alongside the swarm and returned when one exists; otherwise the
// global best (least penalized) point is returned.
inline SolverResult solve_pso(const OptProblem& pb, const PsoParams& params) {
  params.validate();
  const auto box = search_box(pb);
  std::mt19937_64 rng(params.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  struct Scored {
    std::array<double, 4> x{};
    double fitness = std::numeric_limits<double>::infinity();
    bool feasible = false;
  };

  SolverResult out;
  std::optional<Scored> best_feasible;
  const auto score = [&](const std::array<double, 4>& x) {
    const auto ev = evaluate(pb, DecisionVector::from_array(x));
    ++out.evaluations;
    Scored s{x, penalized_fitness(ev, params.penalty_weight), ev.feasible()};
    if (s.feasible && (!best_feasible || s.fitness < best_feasible->fitness)) best_feasible = s;
    return s;
  };
  const auto better = [](const Scored& a, const Scored& b) { return a.fitness < b.fitness; };

  std::array<double, 4> vmax{};
  for (int d = 0; d < 4; ++d) vmax[d] = params.velocity_clamp * (box.hi[d] - box.lo[d]);

  const auto n = static_cast<std::size_t>(params.swarm_size);
  std::vector<std::array<double, 4>> pos(n), vel(n);
  std::vector<Scored> personal(n);
  Scored global;
  for (std::size_t i = 0; i < n; ++i) {
    for (int d = 0; d < 4; ++d) {
      pos[i][d] = box.lo[d] + unit(rng) * (box.hi[d] - box.lo[d]);
      vel[i][d] = (2.0 * unit(rng) - 1.0) * vmax[d];
    }
    personal[i] = score(pos[i]);
    if (better(personal[i], global)) global = personal[i];
  }

  for (int it = 0; it < params.iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      for (int d = 0; d < 4; ++d) {
        const double r1 = unit(rng), r2 = unit(rng);
        double v = params.inertia * vel[i][d] + params.cognitive * r1 * (personal[i].x[d] - pos[i][d]) +
                   params.social * r2 * (global.x[d] - pos[i][d]);
        v = std::clamp(v, -vmax[d], vmax[d]);
        double x = pos[i][d] + v;
        if (x < box.lo[d] || x > box.hi[d]) {
          x = std::clamp(x, box.lo[d], box.hi[d]);
          v = 0.0;
        }
        vel[i][d] = v;
        pos[i][d] = x;
      }
      const auto s = score(pos[i]);
      if (better(s, personal[i])) personal[i] = s;
      if (better(personal[i], global)) global = personal[i];
    }
    out.fitness_history.push_back(global.fitness);
  }

  const Scored& chosen = best_feasible ? *best_feasible : global;
  out.best = DecisionVector::from_array(chosen.x);
  const auto ev = evaluate(pb, out.best);
  out.objective_bps = ev.objective_bps;
  out.fitness = chosen.fitness;
  out.violations = ev.violations;
  for (const auto& f : ev.faps) {
    out.queue_pkts.push_back(f.queue_pkts);
    out.delay_s.push_back(f.delay_s);
  }
  return out;
}

// Benchmark of planner and solver plans on static snapshots.

struct BenchmarkInstance {
  int instance = 0;
  std::uint64_t seed = 0;
  Snapshot snapshot;
};

struct BenchmarkRow {
  int instance = 0;
  std::uint64_t seed = 0;
  std::string method;
  double objective_bps = 0.0;
  bool feasible = false;
  std::optional<double> p90_throughput_bps;
  std::optional<double> p90_delay_s;
};

struct SimTemplate {
  QueuePolicy queue;  // kind gpqm_scheduled applies each plan's queue sizes
  TrafficModel traffic;
  ChannelMode channel_mode = ChannelMode::independent_fair_share;
  bool fading_enabled = true;
  double bootstrap_s = 30.0;
  double measure_s = 70.0;
};

inline SimMetrics simulate_static_plan(const Snapshot& s, const PlannerConfig& cfg, const GpqmPlan& plan,
                                       const SimTemplate& tpl, std::uint64_t seed) {
  SimConfig sc;
  sc.trace = static_trace(s, cfg.venue, cfg.channel, tpl.measure_s, tpl.measure_s);
  sc.mcs = cfg.mcs;
  PlanSeries series;
  series.planning_period_s = tpl.measure_s;
  GpqmPlan p = plan;
  p.time_s = 0.0;
  series.plans.push_back(p);
  sc.plan = series;
  sc.placement.kind = PlacementKind::plan;
  sc.queue = tpl.queue;
  sc.traffic = tpl.traffic;
  sc.channel_mode = tpl.channel_mode;
  sc.fading_enabled = tpl.fading_enabled;
  sc.seed = seed;
  sc.bootstrap_s = tpl.bootstrap_s;
  sc.measure_s = tpl.measure_s;
  sc.packet_size_bytes = cfg.packet_size_bytes;
  return run_sim(sc);
}

// Random static snapshots that the planner can serve, drawn deterministically
// from the seed; demands are the given fractions of the reference share.
inline std::vector<BenchmarkInstance> random_instances(int count, int n_faps, const PlannerConfig& cfg,
                                                       const std::vector<double>& fractions, std::uint64_t seed) {
  std::vector<BenchmarkInstance> out;
  const double reference = mcs::reference_fair_share(cfg.mcs);
  std::uint64_t draw = seed;
  for (int k = 1; static_cast<int>(out.size()) < count; ++draw) {
    if (draw - seed > 1000u * static_cast<std::uint64_t>(count))
      fail(ErrorKind::placement_infeasible, "could not draw enough plannable instances");
    std::mt19937_64 rng(draw);
    std::uniform_real_distribution<double> ux(0.0, cfg.venue.x_max_m), uy(0.0, cfg.venue.y_max_m),
        uz(cfg.venue.min_altitude_m, cfg.venue.z_max_m);
    Snapshot s;
    for (int i = 0; i < n_faps; ++i) {
      const double x = ux(rng), y = uy(rng), z = uz(rng);
      s.faps.push_back({i + 1, {x, y, z}, fractions[static_cast<std::size_t>(i) % fractions.size()] * reference});
    }
    try {
      (void)plan_snapshot(s, cfg);
    } catch (const Error&) {
      continue;
    }
    out.push_back({k++, draw, std::move(s)});
  }
  return out;
}

inline std::vector<BenchmarkRow> benchmark(const std::vector<BenchmarkInstance>& instances, const PlannerConfig& cfg,
                                           const PsoParams& pso, const SimTemplate& tpl,
                                           CapacityKind capacity = CapacityKind::regression) {
  std::vector<BenchmarkRow> rows;
  for (const auto& inst : instances) {
    const auto gpqm = plan_snapshot(inst.snapshot, cfg);
    const auto gm = summarize(simulate_static_plan(inst.snapshot, cfg, gpqm, tpl, inst.seed));
    rows.push_back({inst.instance, inst.seed, "gpqm", check_formulation(gpqm, inst.snapshot, cfg).objective_bps,
                    true, gm.throughput.percentile(90.0), gm.delay.percentile(90.0)});

    auto params = pso;
    params.seed = inst.seed;
    const auto pb = OptProblem::make(inst.snapshot, cfg, capacity);
    const auto sol = solve_pso(pb, params);
    const auto plan = plan_from_vector(pb, sol.best);
    const auto pm = summarize(simulate_static_plan(inst.snapshot, cfg, plan, tpl, inst.seed));
    rows.push_back({inst.instance, inst.seed, "pso", sol.objective_bps, sol.feasible(),
                    pm.throughput.percentile(90.0), pm.delay.percentile(90.0)});
  }
  return rows;
}

// Published local optimum for the reference snapshot, FGW (46.4, 12.3, 10) at
// 0 dBm, scored under the given capacity model. A comparison row only.
inline BenchmarkRow published_reference_row(const PlannerConfig& cfg, CapacityKind capacity) {
  const Snapshot s{0.0, {{1, {50, 75, 10}, 40e6}, {2, {75, 25, 10}, 125e6}, {3, {25, 25, 10}, 150e6}}};
  const auto ev = evaluate(OptProblem::make(s, cfg, capacity), DecisionVector{{46.4, 12.3, 10.0}, 0.0});
  return {0, 0, "published", ev.objective_bps, ev.feasible(), std::nullopt, std::nullopt};
}

inline void write_benchmark_csv(std::ostream& os, const std::vector<BenchmarkRow>& rows) {
  const auto num = [](const std::optional<double>& v) { return v ? nlohmann::json(*v).dump() : std::string(); };
  os << "instance,seed,method,objective_bps,feasible,p90_throughput_bps,p90_delay_s\n";
  for (const auto& r : rows)
    os << r.instance << ',' << r.seed << ',' << r.method << ',' << nlohmann::json(r.objective_bps).dump() << ','
       << (r.feasible ? 1 : 0) << ',' << num(r.p90_throughput_bps) << ',' << num(r.p90_delay_s) << '\n';
}

struct BenchmarkAggregate {
  std::string method;
  int rows = 0;  // feasible rows only
  double mean_objective_bps = 0.0;
  double mean_p90_delay_s = 0.0;
  double mean_p90_throughput_bps = 0.0;
};

// Per-method means over feasible rows; infeasible rows are excluded.
inline std::vector<BenchmarkAggregate> aggregate(const std::vector<BenchmarkRow>& rows) {
  std::vector<BenchmarkAggregate> out;
  for (const auto& r : rows) {
    if (!r.feasible) continue;
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& a) { return a.method == r.method; });
    if (it == out.end()) it = out.insert(out.end(), BenchmarkAggregate{r.method});
    ++it->rows;
    it->mean_objective_bps += r.objective_bps;
    it->mean_p90_delay_s += r.p90_delay_s.value_or(0.0);
    it->mean_p90_throughput_bps += r.p90_throughput_bps.value_or(0.0);
  }
  for (auto& a : out) {
    a.mean_objective_bps /= a.rows;
    a.mean_p90_delay_s /= a.rows;
    a.mean_p90_throughput_bps /= a.rows;
  }
  return out;
}

}  // namespace gpqm

#include <gtest/gtest.h>

#include <string>

#include "gpqm/planner.hpp"
#include "gpqm/scenario.hpp"
#include "oracles.hpp"

using namespace gpqm;

namespace {

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorKind::io;
}

TEST(PlanSnapshot, ReferenceSnapshot) {
  const PlannerConfig cfg;
  const auto s = oracle::reference_snapshot();
  const auto plan = plan_snapshot(s, cfg);
  EXPECT_DOUBLE_EQ(plan.tx_power_dbm, 20.0);
  ASSERT_EQ(plan.faps.size(), 3u);
  EXPECT_EQ(plan.find(1)->mcs_index, 2);
  EXPECT_EQ(plan.find(2)->mcs_index, 5);
  EXPECT_EQ(plan.find(3)->mcs_index, 7);
  EXPECT_EQ(plan.find(1)->queue_pkts, 2);
  EXPECT_EQ(plan.find(2)->queue_pkts, 8);
  EXPECT_EQ(plan.find(3)->queue_pkts, 5);
  EXPECT_NEAR(plan.find(3)->rho, 150.0 / 166.0, 1e-12);
  for (const auto& f : plan.faps) EXPECT_LT(f.delay_s, cfg.delay_threshold_s);
  EXPECT_DOUBLE_EQ(plan.find(2)->capacity_bps, 133e6);
  EXPECT_EQ(plan.find(99), nullptr);

  const auto report = check_formulation(plan, s, cfg);
  EXPECT_EQ(report.failures(), 0) << ::testing::PrintToString(report.failed_names());
  EXPECT_DOUBLE_EQ(report.objective_bps, 349e6);
}

double min_power_single_fap(const Venue& v, double threshold_db) {
  // Smallest power step at which a point just beyond M still reaches the
  // threshold: the link sphere must poke out of the separation ball.
  for (int p = 0; p <= 30; ++p)
    if (oracle::friis_snr(p, v.min_separation_m + 1e-3, 5250e6, -85.0) >= threshold_db) return p;
  return -1;
}

TEST(PlanSnapshot, SingleFapMinimalPower) {
  for (double m : {0.0, 3.0, 6.0}) {
    PlannerConfig cfg;
    cfg.venue.min_separation_m = m;
    const Snapshot s{0.0, {{1, {50, 50, 10}, 40e6}}};
    const auto plan = plan_snapshot(s, cfg);
    EXPECT_DOUBLE_EQ(plan.tx_power_dbm, min_power_single_fap(cfg.venue, 15.0)) << "M=" << m;
    EXPECT_GT(distance(plan.fgw_position, {50, 50, 10}), m);
    EXPECT_EQ(check_formulation(plan, s, cfg).failures(), 0);
  }
}

TEST(PlanSnapshot, OppositeCornersAreUnplaceable) {
  const PlannerConfig cfg;
  const Snapshot s{0.0, {{1, {0, 0, 1}, 150e6}, {2, {100, 100, 19}, 150e6}}};
  EXPECT_EQ(kind_of([&] { (void)plan_snapshot(s, cfg); }), ErrorKind::placement_infeasible);
  const auto targets = demand_targets(s, cfg);
  for (int p = 0; p <= 30; p += 5)
    EXPECT_FALSE(oracle::lattice_feasible(detail::spheres_for(s, cfg, targets, p), cfg.venue)) << "P=" << p;
  try {
    (void)plan_snapshot(s, cfg);
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("more FAPs or relays"), std::string::npos);
    ASSERT_TRUE(e.time_s());
    EXPECT_EQ(*e.time_s(), 0.0);
  }
}

TEST(PlanSnapshot, DemandAboveTopShareIsRejected) {
  const PlannerConfig cfg;
  const Snapshot s{3.0, {{1, {50, 50, 10}, 1e9}}};
  EXPECT_EQ(kind_of([&] { (void)plan_snapshot(s, cfg); }), ErrorKind::infeasible_demand);
}

TEST(PlanSnapshot, AggregateDemandAboveChannelCapacity) {
  const PlannerConfig cfg;
  const Snapshot s{0.0, {{1, {40, 50, 10}, 160e6}, {2, {50, 60, 10}, 160e6}, {3, {60, 50, 10}, 160e6}}};
  EXPECT_GT(480e6, aggregate_capacity_limit(cfg.mcs, 0.8, {7}));
  EXPECT_EQ(kind_of([&] { (void)plan_snapshot(s, cfg); }), ErrorKind::aggregate_capacity);
}

TEST(PlanSnapshot, TightDelayEscalatesMcs) {
  PlannerConfig cfg;
  cfg.delay_threshold_s = 0.5e-3;
  const auto s = oracle::reference_snapshot();
  PlanDiagnostics diag;
  const auto plan = plan_snapshot(s, cfg, &diag);
  EXPECT_GT(diag.mcs_escalations, 0);
  EXPECT_GT(plan.find(2)->mcs_index, 5);
  for (const auto& f : plan.faps) {
    EXPECT_LT(f.delay_s, cfg.delay_threshold_s);
    const auto& fap = *std::find_if(s.faps.begin(), s.faps.end(), [&](const FapState& x) { return x.id == f.id; });
    EXPECT_GE(f.capacity_bps, oracle::min_capacity_for_delay(fap.demand_bps, 1400, cfg.delay_threshold_s) - 1.0);
  }
  EXPECT_EQ(check_formulation(plan, s, cfg).failures(), 0);
}

TEST(PlanSnapshot, UnreachableDelay) {
  PlannerConfig cfg;
  cfg.delay_threshold_s = 1e-5;
  const Snapshot s{0.0, {{1, {50, 50, 10}, 1e6}}};
  EXPECT_EQ(kind_of([&] { (void)plan_snapshot(s, cfg); }), ErrorKind::delay_infeasible);
}

TEST(PlanSnapshot, InvalidSnapshots) {
  const PlannerConfig cfg;
  EXPECT_EQ(kind_of([&] { (void)plan_snapshot(Snapshot{}, cfg); }), ErrorKind::domain);
  EXPECT_EQ(kind_of([&] { (void)plan_snapshot(Snapshot{0, {{1, {50, 50, 10}, 0.0}}}, cfg); }), ErrorKind::domain);
  EXPECT_EQ(kind_of([&] { (void)plan_snapshot(Snapshot{0, {{1, {150, 50, 10}, 1e6}}}, cfg); }), ErrorKind::domain);
  EXPECT_EQ(kind_of([&] {
              (void)plan_snapshot(Snapshot{0, {{1, {50, 50, 10}, 1e6}, {1, {40, 50, 10}, 1e6}}}, cfg);
            }),
            ErrorKind::domain);
  PlannerConfig bad;
  bad.delay_threshold_s = 0.0;
  EXPECT_EQ(kind_of([&] { (void)plan_snapshot(oracle::reference_snapshot(), bad); }), ErrorKind::domain);
}

Snapshot random_snapshot(oracle::Gen& g, const Venue& v, int n, double lo = 5e6, double hi = 70e6) {
  Snapshot s;
  for (int i = 0; i < n; ++i) {
    const Vec3 p{g.uniform(30, v.x_max_m - 30), g.uniform(30, v.y_max_m - 30), g.uniform(2, v.z_max_m - 2)};
    s.faps.push_back({i + 1, p, g.uniform(lo, hi)});
  }
  return s;
}

TEST(PlanSnapshot, PowerIsMinimal) {
  oracle::Gen g(31);
  const PlannerConfig cfg;
  int planned = 0;
  for (int trial = 0; trial < 150; ++trial) {
    const auto s = random_snapshot(g, cfg.venue, g.integer(1, 4));
    PlanDiagnostics diag;
    GpqmPlan plan;
    try {
      plan = plan_snapshot(s, cfg, &diag);
    } catch (const Error&) {
      continue;
    }
    ++planned;
    EXPECT_EQ(check_formulation(plan, s, cfg).failures(), 0);
    if (plan.tx_power_dbm == 0.0 || diag.mcs_escalations > 0) continue;
    const auto lower = test_power_level(s, cfg, diag.final_targets, plan.tx_power_dbm - cfg.power_step_db);
    EXPECT_TRUE(lower.subspace_empty || !lower.delays_met);
    if (lower.subspace_empty) {
      const auto spheres = detail::spheres_for(s, cfg, diag.final_targets, plan.tx_power_dbm - cfg.power_step_db);
      EXPECT_FALSE(oracle::lattice_feasible(spheres, cfg.venue, 0.5)) << "trial " << trial;
    }
  }
  EXPECT_GT(planned, 50);
}

TEST(PlanSnapshot, TranslationInvariant) {
  oracle::Gen g(32);
  PlannerConfig cfg;
  cfg.venue = Venue{300, 300, 60, 3.0, 1.0};
  const Vec3 shift{25, -15, 7};
  for (int trial = 0; trial < 40; ++trial) {
    Snapshot s;
    for (int i = 0; i < 3; ++i)
      s.faps.push_back({i + 1, {g.uniform(120, 160), g.uniform(120, 160), g.uniform(20, 30)}, g.uniform(5e6, 60e6)});
    Snapshot moved = s;
    for (auto& f : moved.faps) f.position = f.position + shift;
    GpqmPlan a, b;
    try {
      a = plan_snapshot(s, cfg);
    } catch (const Error&) {
      EXPECT_ANY_THROW((void)plan_snapshot(moved, cfg));
      continue;
    }
    b = plan_snapshot(moved, cfg);
    EXPECT_DOUBLE_EQ(a.tx_power_dbm, b.tx_power_dbm);
    for (std::size_t i = 0; i < a.faps.size(); ++i) {
      EXPECT_EQ(a.faps[i].mcs_index, b.faps[i].mcs_index);
      EXPECT_EQ(a.faps[i].queue_pkts, b.faps[i].queue_pkts);
    }
    EXPECT_NEAR(distance(a.fgw_position + shift, b.fgw_position), 0.0, 1e-3) << "trial " << trial;
  }
}

TEST(PlanSnapshot, Deterministic) {
  oracle::Gen g(33);
  const PlannerConfig cfg;
  for (int trial = 0; trial < 30; ++trial) {
    const auto s = random_snapshot(g, cfg.venue, 3);
    try {
      const auto a = plan_snapshot(s, cfg), b = plan_snapshot(s, cfg);
      EXPECT_EQ(a.fgw_position, b.fgw_position);
      EXPECT_EQ(a.tx_power_dbm, b.tx_power_dbm);
    } catch (const Error&) {
    }
  }
}

TEST(CheckFormulation, FlagsBrokenPlans) {
  const PlannerConfig cfg;
  const auto s = oracle::reference_snapshot();
  auto plan = plan_snapshot(s, cfg);

  auto neg_queue = plan;
  neg_queue.faps[0].queue_pkts = -1;
  EXPECT_FALSE(check_formulation(neg_queue, s, cfg).find(constraint::queue)->passed);

  auto on_fap = plan;
  on_fap.fgw_position = s.faps[2].position;
  const auto r = check_formulation(on_fap, s, cfg);
  EXPECT_FALSE(r.find(constraint::separation)->passed);

  auto loud = plan;
  loud.tx_power_dbm = 31.0;
  EXPECT_FALSE(check_formulation(loud, s, cfg).find(constraint::power)->passed);

  auto quiet = plan;
  quiet.tx_power_dbm = 19.0;
  EXPECT_FALSE(check_formulation(quiet, s, cfg).find(constraint::link)->passed);

  auto starved = plan;
  starved.faps[2].capacity_bps = 140e6;
  EXPECT_FALSE(check_formulation(starved, s, cfg).find(constraint::demand)->passed);

  auto outside = plan;
  outside.fgw_position.z = 0.5;
  EXPECT_FALSE(check_formulation(outside, s, cfg).find(constraint::z_bounds)->passed);

  EXPECT_EQ(check_formulation(plan, s, cfg).checks.size(), 10u);
}

TEST(PlanSeries, StaticTraceHoldsOnePlan) {
  const auto s = oracle::reference_snapshot();
  const PlannerConfig cfg;
  const auto trace = static_trace(s, cfg.venue, cfg.channel, 70.0, 5.0);
  const auto series = plan_series(trace, planner_config_for(trace, mcs::default_table()));
  ASSERT_EQ(series.plans.size(), 15u);
  for (std::size_t k = 0; k < series.plans.size(); ++k) {
    EXPECT_DOUBLE_EQ(series.plans[k].time_s, 5.0 * k);
    EXPECT_EQ(series.plans[k].fgw_position, series.plans[0].fgw_position);
  }
}

TEST(PlanSeries, RandomWaypointTrace) {
  auto trace = generate_rwm(3, Venue{}, MobilityParams{}, 70.0, 7);
  assign_demand_fractions(trace, {0.5}, 50e6);
  const auto series = plan_series(trace, planner_config_for(trace, mcs::default_table()));
  ASSERT_EQ(series.plans.size(), 15u);
  const auto snaps = snapshots(trace);
  const auto cfg = planner_config_for(trace, mcs::default_table());
  for (std::size_t k = 0; k < snaps.size(); ++k)
    EXPECT_EQ(check_formulation(series.plans[k], snaps[k], cfg).failures(), 0) << "k=" << k;
}

TEST(PlanSeries, ErrorsCarryTheFailingInstant) {
  const PlannerConfig base;
  auto trace = static_trace(oracle::reference_snapshot(), base.venue, base.channel, 70.0, 5.0);
  trace.faps[0].demand.push_back({10.0, 1e9});
  try {
    (void)plan_series(trace, planner_config_for(trace, mcs::default_table()));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::infeasible_demand);
    ASSERT_TRUE(e.time_s());
    EXPECT_DOUBLE_EQ(*e.time_s(), 10.0);
  }
}

TEST(PlanSeries, ZeroOrderHoldAndResampling) {
  PlanSeries series;
  series.planning_period_s = 5.0;
  for (int k = 0; k < 3; ++k) {
    GpqmPlan p;
    p.time_s = 5.0 * k;
    p.tx_power_dbm = k;
    series.plans.push_back(p);
  }
  EXPECT_EQ(series.at(0.0).tx_power_dbm, 0.0);
  EXPECT_EQ(series.at(4.999).tx_power_dbm, 0.0);
  EXPECT_EQ(series.at(5.0).tx_power_dbm, 1.0);
  EXPECT_EQ(series.at(100.0).tx_power_dbm, 2.0);
  EXPECT_EQ(kind_of([&] { (void)series.at(-1.0); }), ErrorKind::configuration);

  const auto r = series.resampled(12.0);
  ASSERT_EQ(r.plans.size(), 13u);
  EXPECT_EQ(r.plans[7].tx_power_dbm, 1.0);
  EXPECT_DOUBLE_EQ(r.plans[7].time_s, 7.0);
  EXPECT_EQ(r.plans[12].tx_power_dbm, 2.0);
}

}  // namespace

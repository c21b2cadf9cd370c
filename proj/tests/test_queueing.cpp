#include <gtest/gtest.h>

#include "gpqm/queueing.hpp"
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

TEST(Md1QueueSize, KnownValues) {
  EXPECT_NEAR(md1_queue_size(0.9036), 4.235, 0.001);
  EXPECT_EQ(configured_queue_size(0.9036), 5);
  EXPECT_EQ(md1_queue_size(0.0), 0.0);
  EXPECT_DOUBLE_EQ(md1_queue_size(0.5), 0.25);
}

TEST(Md1QueueSize, SaturationAndDomain) {
  EXPECT_EQ(kind_of([] { (void)md1_queue_size(1.0); }), ErrorKind::saturation);
  EXPECT_EQ(kind_of([] { (void)md1_queue_size(1.5); }), ErrorKind::saturation);
  EXPECT_EQ(kind_of([] { (void)md1_queue_size(-0.1); }), ErrorKind::domain);
}

TEST(Md1Delay, KnownValues) {
  EXPECT_NEAR(md1_delay(1e-12, 1000.0), 1e-3, 1e-12);
  EXPECT_NEAR(md1_delay(0.9036, 14821.0), 0.384e-3, 0.001e-3);
  EXPECT_DOUBLE_EQ(md1_delay(0.5, 1000.0), 1.5e-3);
  EXPECT_EQ(kind_of([] { (void)md1_delay(1.0, 1000.0); }), ErrorKind::saturation);
  EXPECT_EQ(kind_of([] { (void)md1_delay(0.5, 0.0); }), ErrorKind::domain);
}

TEST(Md1Delay, MatchesWaitingPlusService) {
  for (double rho = 0.0; rho < 0.99; rho += 0.01)
    EXPECT_NEAR(md1_delay(rho, 5000.0), oracle::md1_sojourn(rho, 5000.0), 1e-15);
}

TEST(Md1, StrictlyIncreasingInLoad) {
  for (double rho = 0.01; rho < 0.99; rho += 0.01) {
    EXPECT_LT(md1_queue_size(rho), md1_queue_size(rho + 0.005));
    EXPECT_LT(md1_delay(rho, 1000.0), md1_delay(rho + 0.005, 1000.0));
  }
}

TEST(Mm1qPlr, KnownValues) {
  EXPECT_NEAR(mm1q_plr(0.7, 1), 0.4118, 0.0005);
  EXPECT_EQ(mm1q_plr(0.0, 3), 0.0);
  EXPECT_NEAR(mm1q_plr(0.9, 4), 0.1602, 0.0005);
  EXPECT_NEAR(mm1q_plr(0.8, 2), 0.2623, 0.0005);
  EXPECT_DOUBLE_EQ(mm1q_plr(1.0, 4), 0.2);
  EXPECT_EQ(kind_of([] { (void)mm1q_plr(0.5, 0); }), ErrorKind::domain);
}

TEST(Mm1qPlr, MatchesMarkovChainStationarySolve) {
  for (int q = 1; q <= 10; ++q)
    for (double rho = 0.05; rho <= 2.0; rho += 0.05) {
      if (std::abs(rho - 1.0) < 1e-9) continue;
      EXPECT_NEAR(mm1q_plr(rho, q), oracle::mm1q_blocking(rho, q), 1e-12) << "rho=" << rho << " Q=" << q;
    }
}

TEST(Mm1qPlr, NearUnitLoadApproachesLimit) {
  for (int q = 1; q <= 10; ++q) EXPECT_NEAR(mm1q_plr(1.0 - 1e-7, q), 1.0 / (q + 1.0), 1e-6);
}

TEST(Mm1qPlr, StrictlyDecreasingInQueueSize) {
  for (double rho = 0.1; rho < 1.5; rho += 0.1)
    for (int q = 1; q < 20; ++q) EXPECT_GT(mm1q_plr(rho, q), mm1q_plr(rho, q + 1));
}

TEST(PlrCurve, ShapeWithQueueSizedFromLoad) {
  // Reported curve: queue size is the M/D/1 mean rounded to the nearest packet.
  std::vector<double> plr;
  std::vector<int> qs;
  for (int k = 1; k <= 9; ++k) {
    const double rho = k / 10.0;
    qs.push_back(configured_queue_size(rho, QueueRounding::nearest));
    plr.push_back(mm1q_plr(rho, qs.back()));
  }
  for (int k = 0; k < 6; ++k) EXPECT_LE(plr[k], plr[k + 1]);
  EXPECT_EQ(qs[6], 1);
  EXPECT_EQ(qs[7], 2);
  EXPECT_EQ(qs[8], 4);
  EXPECT_LT(plr[7], plr[6]);
  EXPECT_LT(plr[8], plr[7]);
  EXPECT_NEAR(plr[6], 0.4118, 0.0005);
  EXPECT_NEAR(plr[7], 0.2623, 0.0005);
  EXPECT_NEAR(plr[8], 0.1602, 0.0005);
}

TEST(ConfiguredQueueSize, CeilingWithFloorOfOne) {
  EXPECT_EQ(configured_queue_size(0.0), 1);
  EXPECT_EQ(configured_queue_size(0.1), 1);
  EXPECT_EQ(configured_queue_size(0.8), 2);
  EXPECT_EQ(configured_queue_size(0.9), 5);
  EXPECT_EQ(configured_queue_size(125.0 / 133.0), 8);
}

TEST(RatesFromTraffic, ReferenceFlows) {
  const auto f3 = rates_from_traffic(150e6, 166e6, 1400);
  EXPECT_NEAR(f3.arrival_rate_pps, 13393, 1);
  EXPECT_NEAR(f3.service_rate_pps, 14821, 1);
  EXPECT_NEAR(f3.load, 0.9036, 0.0001);
  const auto f1 = rates_from_traffic(40e6, 50e6, 1400);
  EXPECT_NEAR(f1.arrival_rate_pps, 3571, 1);
  EXPECT_NEAR(f1.service_rate_pps, 4464, 1);
  EXPECT_DOUBLE_EQ(f1.load, 0.8);
  EXPECT_DOUBLE_EQ(rates_from_traffic(50e6, 100e6, 1400).load, 0.5);
}

TEST(RatesFromTraffic, Errors) {
  EXPECT_EQ(kind_of([] { (void)rates_from_traffic(100e6, 100e6, 1400); }), ErrorKind::saturation);
  EXPECT_EQ(kind_of([] { (void)rates_from_traffic(0.0, 100e6, 1400); }), ErrorKind::domain);
  EXPECT_EQ(kind_of([] { (void)rates_from_traffic(1e6, 100e6, 0.0); }), ErrorKind::domain);
}

TEST(SizeQueue, Invariants) {
  oracle::Gen g(12);
  for (int i = 0; i < 1000; ++i) {
    const double c = g.uniform(1e6, 500e6), t = c * g.uniform(0.01, 0.99);
    const auto flow = rates_from_traffic(t, c, 1400);
    const auto q = size_queue(flow);
    EXPECT_GE(q.size_packets, 1);
    EXPECT_GE(q.predicted_delay_s, 1.0 / flow.service_rate_pps);
    EXPECT_GE(q.predicted_plr, 0.0);
    EXPECT_LE(q.predicted_plr, 1.0);
  }
}

}  // namespace

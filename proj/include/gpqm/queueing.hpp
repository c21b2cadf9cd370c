#pragma once

// Analytic M/D/1 sizing and delay, plus the M/M/1/Q blocking probability that
// is used as the packet loss ratio of a Drop-Tail queue of size Q.

#include <algorithm>
#include <cmath>
#include <string>

#include "gpqm/error.hpp"

namespace gpqm {

struct FlowLoad {
  double arrival_rate_pps = 0.0;
  double service_rate_pps = 0.0;
  double load = 0.0;
  double packet_size_bytes = 0.0;
};

struct QueueSpec {
  int size_packets = 1;
  double predicted_delay_s = 0.0;
  double predicted_plr = 0.0;
};

inline void require_unsaturated(double rho) {
  if (!(rho >= 0.0)) fail(ErrorKind::domain, "load must be >= 0");
  if (rho >= 1.0) fail(ErrorKind::saturation, "load " + std::to_string(rho) + " >= 1");
}

// Mean number of packets of an M/D/1 queue, used as the configured size.
inline double md1_queue_size(double rho) {
  require_unsaturated(rho);
  return 0.5 * rho * rho / (1.0 - rho);
}

// Mean sojourn (waiting + service) of an M/D/1 queue.
inline double md1_delay(double rho, double service_rate_pps) {
  require_unsaturated(rho);
  if (!(service_rate_pps > 0.0)) fail(ErrorKind::domain, "service rate must be > 0");
  return (2.0 - rho) / (2.0 * service_rate_pps * (1.0 - rho));
}

inline double mm1q_plr(double rho, int queue_size) {
  if (queue_size < 1) fail(ErrorKind::domain, "queue size must be >= 1");
  if (!(rho >= 0.0)) fail(ErrorKind::domain, "load must be >= 0");
  if (rho == 0.0) return 0.0;
  const double q = static_cast<double>(queue_size);
  if (std::abs(rho - 1.0) < 1e-12) return 1.0 / (q + 1.0);
  return (1.0 - rho) / (1.0 - std::pow(rho, q + 1.0)) * std::pow(rho, q);
}

enum class QueueRounding {
  ceiling,  // planner sizing
  nearest,  // reported PLR-vs-load curve
};

inline int configured_queue_size(double rho, QueueRounding rounding = QueueRounding::ceiling) {
  const double q = md1_queue_size(rho);
  const double r = rounding == QueueRounding::ceiling ? std::ceil(q) : std::round(q);
  return std::max(1, static_cast<int>(r));
}

inline FlowLoad rates_from_traffic(double demand_bps, double capacity_bps, double packet_size_bytes) {
  if (!(demand_bps > 0.0 && capacity_bps > 0.0 && packet_size_bytes > 0.0))
    fail(ErrorKind::domain, "demand, capacity and packet size must be > 0");
  FlowLoad f;
  f.packet_size_bytes = packet_size_bytes;
  f.arrival_rate_pps = demand_bps / (packet_size_bytes * 8.0);
  f.service_rate_pps = capacity_bps / (packet_size_bytes * 8.0);
  f.load = f.arrival_rate_pps / f.service_rate_pps;
  if (f.load >= 1.0)
    fail(ErrorKind::saturation, "demand " + std::to_string(demand_bps) +
                                    " bit/s saturates capacity " + std::to_string(capacity_bps));
  return f;
}

inline QueueSpec size_queue(const FlowLoad& flow) {
  QueueSpec q;
  q.size_packets = configured_queue_size(flow.load);
  q.predicted_delay_s = md1_delay(flow.load, flow.service_rate_pps);
  q.predicted_plr = mm1q_plr(flow.load, q.size_packets);
  return q;
}

}  // namespace gpqm

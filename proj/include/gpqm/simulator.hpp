#pragma once

// Discrete-event simulation of the FAP-to-FGW uplink star. Each FAP runs one
// source into one queue; its server drains the queue at the fair share of the
// MCS that its current SNR supports. Channel state, positions and scheduled
// queue sizes are refreshed once per simulated second.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include "gpqm/aqm.hpp"
#include "gpqm/channel.hpp"
#include "gpqm/error.hpp"
#include "gpqm/metrics.hpp"
#include "gpqm/planner.hpp"
#include "gpqm/scenario.hpp"
#include "gpqm/vec3.hpp"

namespace gpqm {

enum class PlacementKind { plan, fap_centroid, venue_center, fixed_point };

struct PlacementPolicy {
  PlacementKind kind = PlacementKind::plan;
  Vec3 fixed_point;
};

enum class QueueKind { gpqm_scheduled, droptail, red, codel, unbounded };

struct QueuePolicy {
  QueueKind kind = QueueKind::gpqm_scheduled;
  int droptail_size = 100;  // packets in the system, including the one in service
  RedParams red;
  CodelParams codel;
};

enum class TrafficKind { poisson, onoff, aimd };

struct TrafficModel {
  TrafficKind kind = TrafficKind::poisson;
  std::optional<double> rate_bps;  // overrides the trace demand
  double on_mean_s = 0.5;
  double off_mean_s = 0.5;
  std::optional<double> aimd_max_bps;  // defaults to the top fair share
};

enum class ChannelMode { independent_fair_share, shared_cap };
enum class ServiceMode { deterministic, exponential };

struct SimConfig {
  ScenarioTrace trace;
  McsTable mcs = mcs::default_table();
  std::optional<PlanSeries> plan;
  PlacementPolicy placement;
  QueuePolicy queue;
  TrafficModel traffic;
  ChannelMode channel_mode = ChannelMode::independent_fair_share;
  bool fading_enabled = true;
  ServiceMode service = ServiceMode::deterministic;
  std::uint64_t seed = 1;
  double bootstrap_s = 30.0;
  double measure_s = 70.0;
  double packet_size_bytes = 1400.0;
  double default_tx_power_dbm = 20.0;  // used when no plan is supplied
  bool record_packets = false;

  void validate() const {
    trace.validate();
    if (!(measure_s > 0.0)) fail(ErrorKind::configuration, "measure window must be > 0");
    if (!(bootstrap_s >= 0.0)) fail(ErrorKind::configuration, "bootstrap must be >= 0");
    if (!(packet_size_bytes > 0.0)) fail(ErrorKind::configuration, "packet size must be > 0");
    const bool needs_plan = placement.kind == PlacementKind::plan || queue.kind == QueueKind::gpqm_scheduled;
    if (needs_plan && !plan) fail(ErrorKind::configuration, "policy requires a plan series");
    if (queue.kind == QueueKind::droptail && queue.droptail_size < 1)
      fail(ErrorKind::configuration, "Drop-Tail size must be >= 1");
    if (queue.kind == QueueKind::red) queue.red.validate();
    if (queue.kind == QueueKind::codel) queue.codel.validate();
    if (plan) check_plan_coverage();
  }

  // Trace time of simulated time t: the bootstrap holds the t=0 state.
  double trace_time(double t_s) const { return std::clamp(t_s - bootstrap_s, 0.0, trace.duration_s); }

 private:
  void check_plan_coverage() const {
    if (plan->plans.empty()) fail(ErrorKind::configuration, "plan series is empty");
    const double end = std::min(trace.duration_s, measure_s);
    const auto covered = [&](double tau) {
      const auto& p = plan->at(tau);
      return tau - p.time_s <= plan->planning_period_s + 1e-9;
    };
    for (double tau = 0.0; tau <= end + 1e-9; tau += 1.0)
      if (!covered(tau)) fail(ErrorKind::configuration, "plan gap at t=" + std::to_string(tau));
    for (const auto& p : plan->plans)
      for (const auto& f : trace.faps)
        if (queue.kind == QueueKind::gpqm_scheduled && !p.find(f.id))
          fail(ErrorKind::configuration, "plan at t=" + std::to_string(p.time_s) + " lacks FAP " + std::to_string(f.id));
  }
};

namespace detail {

struct SimPacket {
  double created_s = 0.0;
  double enqueued_s = 0.0;
  double dequeued_s = 0.0;
  std::int64_t record = -1;
};

enum class EventType { tick, arrival, departure, toggle };

struct SimEvent {
  double t_s;
  std::uint64_t seq;
  EventType type;
  std::size_t fap;
  std::uint64_t token;
};

struct LaterEvent {
  bool operator()(const SimEvent& a, const SimEvent& b) const {
    return a.t_s != b.t_s ? a.t_s > b.t_s : a.seq > b.seq;
  }
};

// Independent reproducible stream per (seed, purpose, FAP).
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t purpose, std::uint64_t fap) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(purpose), static_cast<std::uint32_t>(fap)};
  return std::mt19937_64(seq);
}

// Friis is not meaningful in the near field; distances are floored at 1 m.
inline constexpr double kMinLinkDistanceM = 1.0;

}  // namespace detail

class Simulator {
 public:
  explicit Simulator(SimConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    end_s_ = cfg_.bootstrap_s + cfg_.measure_s;
    bits_per_packet_ = 8.0 * cfg_.packet_size_bytes;
    const std::size_t n = cfg_.trace.faps.size();
    faps_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto& f = faps_[i];
      f.counters.id = cfg_.trace.faps[i].id;
      f.source_rng = detail::make_stream(cfg_.seed, 1, i);
      f.service_rng = detail::make_stream(cfg_.seed, 2, i);
      f.fading_rng = detail::make_stream(cfg_.seed, 3, i);
      f.aqm_rng = detail::make_stream(cfg_.seed, 4, i);
      f.red = RedQueue(cfg_.queue.red);
      f.codel = CodelQueue(cfg_.queue.codel);
    }
    metrics_.window_start_s = cfg_.bootstrap_s;
    metrics_.window_length_s = cfg_.measure_s;
    metrics_.throughput_bps.assign(static_cast<std::size_t>(std::ceil(cfg_.measure_s - 1e-9)), 0.0);
  }

  SimMetrics run() {
    push(0.0, detail::EventType::tick, 0, 0);
    while (!events_.empty()) {
      const auto e = events_.top();
      if (e.t_s >= end_s_) break;
      events_.pop();
      switch (e.type) {
        case detail::EventType::tick: on_tick(e.t_s); break;
        case detail::EventType::arrival: on_arrival(e.t_s, e.fap, e.token); break;
        case detail::EventType::departure: on_departure(e.t_s, e.fap); break;
        case detail::EventType::toggle: on_toggle(e.t_s, e.fap); break;
      }
    }
    for (auto& f : faps_) {
      f.counters.in_system_end = f.queue.size() + (f.in_service ? 1 : 0);
      metrics_.faps.push_back(f.counters);
    }
    if (cfg_.record_packets) {
      for (const auto& r : records_)
        if (r.dropped || r.delivered_s > 0.0) metrics_.packets.push_back(r);
    }
    return std::move(metrics_);
  }

 private:
  struct FapRuntime {
    FapCounters counters;
    std::deque<detail::SimPacket> queue;
    std::optional<detail::SimPacket> in_service;
    std::optional<double> idle_since_s = 0.0;
    double capacity_bps = 0.0;
    double distance_m = 1.0;
    int limit_pkts = std::numeric_limits<int>::max();
    double source_rate_bps = 0.0;
    bool on = true;
    bool started = false;
    std::uint64_t token = 0;
    double smoothed_delay_s = 0.0;
    double last_decrease_s = -std::numeric_limits<double>::infinity();
    std::mt19937_64 source_rng, service_rng, fading_rng, aqm_rng;
    RedQueue red;
    CodelQueue codel;
  };

  void push(double t, detail::EventType type, std::size_t fap, std::uint64_t token) {
    events_.push({t, seq_++, type, fap, token});
  }

  bool in_window(double t) const { return t >= cfg_.bootstrap_s && t < end_s_; }

  double exp_draw(std::mt19937_64& rng, double mean) { return std::exponential_distribution<double>(1.0 / mean)(rng); }

  const GpqmPlan* current_plan(double tau) const { return cfg_.plan ? &cfg_.plan->at(tau) : nullptr; }

  Vec3 fgw_position(double tau, const GpqmPlan* plan) const {
    switch (cfg_.placement.kind) {
      case PlacementKind::plan: return plan->fgw_position;
      case PlacementKind::venue_center: return cfg_.trace.venue.center();
      case PlacementKind::fixed_point: return cfg_.placement.fixed_point;
      case PlacementKind::fap_centroid: {
        // Recomputed at planning instants and held in between.
        const double dt = cfg_.trace.planning_period_s;
        const double t_k = std::floor(tau / dt + 1e-9) * dt;
        Vec3 c;
        for (const auto& f : cfg_.trace.faps) c += position_at(f, t_k);
        return c * (1.0 / static_cast<double>(cfg_.trace.faps.size()));
      }
    }
    return {};
  }

  double offered_rate(double tau, std::size_t i) const {
    if (cfg_.traffic.rate_bps) return *cfg_.traffic.rate_bps;
    return cfg_.trace.faps[i].demand_at(tau);
  }

  void on_tick(double t) {
    const double tau = cfg_.trace_time(t);
    const GpqmPlan* plan = current_plan(tau);
    const Vec3 fgw = fgw_position(tau, plan);
    const double p_tx = plan ? plan->tx_power_dbm : cfg_.default_tx_power_dbm;

    double top_phy = 0.0, sum = 0.0;
    std::vector<double> caps(faps_.size(), 0.0);
    for (std::size_t i = 0; i < faps_.size(); ++i) {
      auto& f = faps_[i];
      f.distance_m = distance(position_at(cfg_.trace.faps[i], tau), fgw);
      double snr = friis_snr(cfg_.trace.channel, p_tx, std::max(f.distance_m, detail::kMinLinkDistanceM));
      if (cfg_.fading_enabled) snr = rician_snr_sample(snr, cfg_.trace.channel.rician_k_db, f.fading_rng);
      if (auto e = cfg_.mcs.best_for_snr(snr)) {
        caps[i] = e->fair_share_bps;
        top_phy = std::max(top_phy, e->phy_rate_bps);
      }
      sum += caps[i];
    }
    const double cap = cfg_.trace.channel.mac_efficiency * top_phy;
    const double scale = cfg_.channel_mode == ChannelMode::shared_cap && sum > cap ? cap / sum : 1.0;

    for (std::size_t i = 0; i < faps_.size(); ++i) {
      auto& f = faps_[i];
      f.capacity_bps = caps[i] * scale;
      switch (cfg_.queue.kind) {
        case QueueKind::gpqm_scheduled: f.limit_pkts = plan->find(f.counters.id)->queue_pkts; break;
        case QueueKind::droptail: f.limit_pkts = cfg_.queue.droptail_size; break;
        default: f.limit_pkts = std::numeric_limits<int>::max(); break;
      }
      update_source(t, tau, i);
      try_start_service(t, i);
    }
    if (t + 1.0 < end_s_) push(t + 1.0, detail::EventType::tick, 0, 0);
  }

  void update_source(double t, double tau, std::size_t i) {
    auto& f = faps_[i];
    const double rate = offered_rate(tau, i);
    switch (cfg_.traffic.kind) {
      case TrafficKind::poisson:
        if (!f.started || rate != f.source_rate_bps) {
          // Memoryless: redrawing the next arrival at a rate change is exact.
          f.source_rate_bps = rate;
          ++f.token;
          if (rate > 0.0) push(t + exp_draw(f.source_rng, bits_per_packet_ / rate), detail::EventType::arrival, i, f.token);
        }
        break;
      case TrafficKind::onoff:
        if (!f.started) {
          f.on = true;
          push(t + exp_draw(f.source_rng, cfg_.traffic.on_mean_s), detail::EventType::toggle, i, 0);
          push(t, detail::EventType::arrival, i, f.token);
        } else if (f.on && f.source_rate_bps <= 0.0 && rate > 0.0) {
          push(t, detail::EventType::arrival, i, f.token);
        }
        f.source_rate_bps = rate;
        break;
      case TrafficKind::aimd:
        if (!f.started) {
          f.source_rate_bps = rate;
          if (rate > 0.0) push(t, detail::EventType::arrival, i, f.token);
        }
        break;
    }
    f.started = true;
  }

  void on_toggle(double t, std::size_t i) {
    auto& f = faps_[i];
    f.on = !f.on;
    ++f.token;
    if (f.on) {
      push(t, detail::EventType::arrival, i, f.token);
      push(t + exp_draw(f.source_rng, cfg_.traffic.on_mean_s), detail::EventType::toggle, i, 0);
    } else {
      push(t + exp_draw(f.source_rng, cfg_.traffic.off_mean_s), detail::EventType::toggle, i, 0);
    }
  }

  void on_arrival(double t, std::size_t i, std::uint64_t token) {
    auto& f = faps_[i];
    if (token != f.token) return;
    if (f.source_rate_bps <= 0.0) return;  // resumed by the next tick
    admit(t, i);
    double gap = bits_per_packet_ / f.source_rate_bps;
    if (cfg_.traffic.kind == TrafficKind::poisson) gap = exp_draw(f.source_rng, gap);
    push(t + gap, detail::EventType::arrival, i, f.token);
  }

  void admit(double t, std::size_t i) {
    auto& f = faps_[i];
    detail::SimPacket p{t, t, 0.0, -1};
    ++f.counters.generated;
    const bool counted = in_window(t);
    if (counted) ++f.counters.window_generated;
    if (cfg_.record_packets && counted) {
      p.record = static_cast<std::int64_t>(records_.size());
      records_.push_back({f.counters.id, t, t, 0.0, 0.0, false, cfg_.packet_size_bytes, 0.0});
    }

    const std::size_t in_system = f.queue.size() + (f.in_service ? 1 : 0);
    bool accept = true;
    switch (cfg_.queue.kind) {
      case QueueKind::gpqm_scheduled:
      case QueueKind::droptail: accept = static_cast<int>(in_system) < f.limit_pkts; break;
      case QueueKind::unbounded: break;
      case QueueKind::codel: accept = f.codel.admits(f.queue.size()); break;
      case QueueKind::red: {
        const double mu = f.capacity_bps / bits_per_packet_;
        const auto v = f.red.on_arrival(t, f.queue.size(), f.idle_since_s, mu, f.aqm_rng);
        if (v == RedVerdict::early_drop) ++f.counters.early_drops;
        if (v == RedVerdict::forced_drop) ++f.counters.forced_drops;
        accept = v == RedVerdict::enqueue;
        break;
      }
    }
    if (!accept) {
      drop(t, p, i);
      return;
    }
    f.idle_since_s.reset();
    f.queue.push_back(p);
    f.counters.max_occupancy = std::max<std::uint64_t>(f.counters.max_occupancy, in_system + 1);
    try_start_service(t, i);
  }

  void drop(double t, const detail::SimPacket& p, std::size_t i) {
    auto& f = faps_[i];
    ++f.counters.dropped;
    if (in_window(p.created_s)) ++f.counters.window_dropped;
    if (p.record >= 0) records_[static_cast<std::size_t>(p.record)].dropped = true;
    if (cfg_.traffic.kind == TrafficKind::aimd) {
      // Halve at most once per smoothed delay, like one loss event per RTT.
      const double guard = std::max(f.smoothed_delay_s, bits_per_packet_ / f.source_rate_bps);
      if (t - f.last_decrease_s >= guard) {
        f.source_rate_bps = std::max(bits_per_packet_, 0.5 * f.source_rate_bps);
        f.last_decrease_s = t;
      }
    }
  }

  void try_start_service(double t, std::size_t i) {
    auto& f = faps_[i];
    if (f.in_service || f.queue.empty() || !(f.capacity_bps > 0.0)) return;
    std::optional<detail::SimPacket> next;
    if (cfg_.queue.kind == QueueKind::codel) {
      next = f.codel.dequeue(t, f.queue, [&](const detail::SimPacket& p) {
        ++f.counters.aqm_drops;
        drop(t, p, i);
      });
    } else {
      next = f.queue.front();
      f.queue.pop_front();
    }
    if (!next) {
      f.idle_since_s = t;
      return;
    }
    next->dequeued_s = t;
    f.in_service = next;
    const double mean = bits_per_packet_ / f.capacity_bps;
    const double service = cfg_.service == ServiceMode::deterministic ? mean : exp_draw(f.service_rng, mean);
    push(t + service, detail::EventType::departure, i, 0);
  }

  void on_departure(double t, std::size_t i) {
    auto& f = faps_[i];
    const detail::SimPacket p = *f.in_service;
    f.in_service.reset();
    ++f.counters.delivered;
    const double delay = t - p.created_s + f.distance_m / kSpeedOfLight;
    if (in_window(t)) {
      metrics_.delay_s.push_back(delay);
      const auto k = static_cast<std::size_t>(std::floor(t - cfg_.bootstrap_s));
      if (k < metrics_.throughput_bps.size()) metrics_.throughput_bps[k] += bits_per_packet_;
      f.counters.window_delivered_bits += static_cast<std::uint64_t>(bits_per_packet_);
    }
    if (p.record >= 0) {
      auto& r = records_[static_cast<std::size_t>(p.record)];
      r.enqueued_s = p.enqueued_s;
      r.dequeued_s = p.dequeued_s;
      r.delivered_s = t;
      r.delay_s = delay;
    }
    if (cfg_.traffic.kind == TrafficKind::aimd) {
      f.smoothed_delay_s = f.smoothed_delay_s == 0.0 ? delay : 0.875 * f.smoothed_delay_s + 0.125 * delay;
      const double ceiling = cfg_.traffic.aimd_max_bps.value_or(cfg_.mcs.back().fair_share_bps);
      f.source_rate_bps = std::min(ceiling, f.source_rate_bps + bits_per_packet_);
    }
    if (f.queue.empty()) f.idle_since_s = t;
    try_start_service(t, i);
  }

  SimConfig cfg_;
  double end_s_ = 0.0;
  double bits_per_packet_ = 0.0;
  std::vector<FapRuntime> faps_;
  std::priority_queue<detail::SimEvent, std::vector<detail::SimEvent>, detail::LaterEvent> events_;
  std::uint64_t seq_ = 0;
  std::vector<PacketRecord> records_;
  SimMetrics metrics_;
};

inline SimMetrics run_sim(const SimConfig& config) { return Simulator(config).run(); }

}  // namespace gpqm

#pragma once

// Active queue management disciplines used as baselines: RED (Floyd and
// Jacobson, non-gentle) and CoDel (RFC 8289).

#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <random>

#include "gpqm/error.hpp"

namespace gpqm {

struct RedParams {
  double min_th_pkts = 25.0;
  double max_th_pkts = 75.0;
  double max_p = 0.1;
  double weight = 0.002;
  int limit_pkts = 100;

  void validate() const {
    if (!(min_th_pkts >= 0.0 && min_th_pkts < max_th_pkts)) fail(ErrorKind::domain, "RED needs 0 <= min_th < max_th");
    if (!(max_p > 0.0 && max_p <= 1.0)) fail(ErrorKind::domain, "RED max_p must lie in (0, 1]");
    if (!(weight > 0.0 && weight <= 1.0)) fail(ErrorKind::domain, "RED weight must lie in (0, 1]");
    if (limit_pkts < 1) fail(ErrorKind::domain, "RED limit must be >= 1");
  }
};

enum class RedVerdict { enqueue, early_drop, forced_drop, overflow };

class RedQueue {
 public:
  explicit RedQueue(RedParams p = {}) : p_(p) { p_.validate(); }

  // Decision for an arrival that finds queue_len packets waiting. When the
  // link has been idle since idle_since_s, the average decays as if
  // (now - idle_since) * service_rate packets had been sent meanwhile.
  template <class Urbg>
  RedVerdict on_arrival(double now_s, std::size_t queue_len, std::optional<double> idle_since_s,
                        double service_rate_pps, Urbg& rng) {
    if (idle_since_s) {
      const double m = std::max(0.0, (now_s - *idle_since_s) * service_rate_pps);
      avg_ *= std::pow(1.0 - p_.weight, m);
    } else {
      avg_ = (1.0 - p_.weight) * avg_ + p_.weight * static_cast<double>(queue_len);
    }
    if (static_cast<int>(queue_len) >= p_.limit_pkts) return RedVerdict::overflow;
    if (avg_ < p_.min_th_pkts) {
      count_ = -1;
      return RedVerdict::enqueue;
    }
    if (avg_ >= p_.max_th_pkts) {
      count_ = 0;
      return RedVerdict::forced_drop;
    }
    ++count_;
    const double pb = p_.max_p * (avg_ - p_.min_th_pkts) / (p_.max_th_pkts - p_.min_th_pkts);
    const double denom = 1.0 - static_cast<double>(count_) * pb;
    const double pa = denom <= 0.0 ? 1.0 : std::min(1.0, pb / denom);
    if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) < pa) {
      count_ = 0;
      return RedVerdict::early_drop;
    }
    return RedVerdict::enqueue;
  }

  double average() const { return avg_; }
  const RedParams& params() const { return p_; }

 private:
  RedParams p_;
  double avg_ = 0.0;
  int count_ = -1;
};

struct CodelParams {
  double target_s = 0.005;
  double interval_s = 0.100;
  int limit_pkts = 1500;

  void validate() const {
    if (!(target_s > 0.0 && interval_s > 0.0)) fail(ErrorKind::domain, "CoDel target and interval must be > 0");
    if (limit_pkts < 1) fail(ErrorKind::domain, "CoDel limit must be >= 1");
  }
};

// Queue entries need an enqueue timestamp; Pkt must expose enqueued_s.
class CodelQueue {
 public:
  explicit CodelQueue(CodelParams p = {}) : p_(p) { p_.validate(); }

  bool admits(std::size_t queue_len) const { return static_cast<int>(queue_len) < p_.limit_pkts; }

  // Pops the next packet to send, dropping head packets per the control law;
  // dropped packets are passed to on_drop.
  template <class Pkt, class OnDrop>
  std::optional<Pkt> dequeue(double now_s, std::deque<Pkt>& q, OnDrop&& on_drop) {
    auto r = do_dequeue(now_s, q);
    if (dropping_) {
      if (!r.ok_to_drop) {
        dropping_ = false;
      } else {
        while (dropping_ && now_s >= drop_next_) {
          on_drop(*r.pkt);
          ++count_;
          r = do_dequeue(now_s, q);
          if (!r.ok_to_drop) dropping_ = false;
          else drop_next_ = control_law(drop_next_);
        }
      }
    } else if (r.ok_to_drop) {
      on_drop(*r.pkt);
      r = do_dequeue(now_s, q);
      dropping_ = true;
      const std::uint32_t delta = count_ - last_count_;
      count_ = (delta > 1 && now_s - drop_next_ < 16.0 * p_.interval_s) ? delta : 1;
      drop_next_ = control_law(now_s);
      last_count_ = count_;
    }
    return r.pkt;
  }

  bool dropping() const { return dropping_; }

 private:
  template <class Pkt>
  struct Dq {
    std::optional<Pkt> pkt;
    bool ok_to_drop = false;
  };

  template <class Pkt>
  Dq<Pkt> do_dequeue(double now_s, std::deque<Pkt>& q) {
    Dq<Pkt> r;
    if (q.empty()) {
      first_above_ = 0.0;
      return r;
    }
    r.pkt = q.front();
    q.pop_front();
    const double sojourn = now_s - r.pkt->enqueued_s;
    // Fixed-size packets: "at most one MTU left" is "at most one packet left".
    if (sojourn < p_.target_s || q.size() <= 1) {
      first_above_ = 0.0;
    } else if (first_above_ == 0.0) {
      first_above_ = now_s + p_.interval_s;
    } else if (now_s >= first_above_) {
      r.ok_to_drop = true;
    }
    return r;
  }

  double control_law(double t) const { return t + p_.interval_s / std::sqrt(static_cast<double>(count_)); }

  CodelParams p_;
  double first_above_ = 0.0;
  double drop_next_ = 0.0;
  std::uint32_t count_ = 0;
  std::uint32_t last_count_ = 0;
  bool dropping_ = false;
};

}  // namespace gpqm

#pragma once

// Link-budget math: free-space SNR and its inversion, the MCS ladder with
// per-FAP fair shares, the linear SNR->fair-share model, Shannon capacity and
// Rician fast fading.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "gpqm/error.hpp"

namespace gpqm {

// Value used for c inside the link-budget constant and for propagation delay.
inline constexpr double kSpeedOfLight = 3.0e8;

struct ChannelParams {
  double carrier_frequency_hz = 5250e6;
  double noise_power_dbm = -85.0;
  double bandwidth_hz = 160e6;
  double mac_efficiency = 0.80;
  double max_tx_power_dbm = 30.0;
  double rician_k_db = 13.0;

  void validate() const {
    if (!(carrier_frequency_hz > 0.0)) fail(ErrorKind::domain, "carrier frequency must be > 0");
    if (!(bandwidth_hz > 0.0)) fail(ErrorKind::domain, "bandwidth must be > 0");
    if (!(mac_efficiency > 0.0 && mac_efficiency <= 1.0))
      fail(ErrorKind::domain, "MAC efficiency must lie in (0, 1]");
    if (!(max_tx_power_dbm >= 0.0)) fail(ErrorKind::domain, "max TX power must be >= 0 dBm");
  }
};

// K = -20 log10(f) - 20 log10(4 pi / c) - P_N, the SNR at 1 m for 0 dBm.
inline double link_constant_db(const ChannelParams& p) {
  return -20.0 * std::log10(p.carrier_frequency_hz) -
         20.0 * std::log10(4.0 * std::numbers::pi / kSpeedOfLight) - p.noise_power_dbm;
}

struct LinkBudget {
  double k_constant_db = 0.0;
  double tx_power_dbm = 0.0;

  static LinkBudget make(const ChannelParams& p, double tx_power_dbm) {
    return LinkBudget{link_constant_db(p), tx_power_dbm};
  }
};

inline double friis_snr(const ChannelParams& p, double tx_power_dbm, double distance_m) {
  if (!(distance_m > 0.0)) fail(ErrorKind::domain, "distance must be > 0");
  return tx_power_dbm + link_constant_db(p) - 20.0 * std::log10(distance_m);
}

// Largest distance at which target_snr_db is still met.
inline double max_distance(const ChannelParams& p, double tx_power_dbm, double target_snr_db) {
  return std::pow(10.0, (link_constant_db(p) + tx_power_dbm - target_snr_db) / 20.0);
}

inline double fair_share(double phy_rate_bps, double efficiency, int contender_count) {
  if (contender_count < 1) fail(ErrorKind::domain, "contender count must be >= 1");
  return efficiency * phy_rate_bps / static_cast<double>(contender_count);
}

inline double shannon_capacity(double bandwidth_hz, double snr_db) {
  if (bandwidth_hz < 0.0) fail(ErrorKind::domain, "bandwidth must be >= 0");
  return bandwidth_hz * std::log2(1.0 + std::pow(10.0, snr_db / 10.0));
}

struct McsEntry {
  int index = 0;
  double min_snr_db = 0.0;
  double phy_rate_bps = 0.0;
  double fair_share_bps = 0.0;
};

class McsTable {
 public:
  McsTable(std::vector<McsEntry> entries, int contender_count)
      : entries_(std::move(entries)), contender_count_(contender_count) {
    if (entries_.empty()) fail(ErrorKind::domain, "MCS table must not be empty");
    if (contender_count_ < 1) fail(ErrorKind::domain, "contender count must be >= 1");
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const auto& e = entries_[i];
      if (e.fair_share_bps > e.phy_rate_bps)
        fail(ErrorKind::domain, "MCS " + std::to_string(e.index) + ": fair share exceeds PHY rate");
      if (i == 0) continue;
      const auto& prev = entries_[i - 1];
      if (!(e.index > prev.index && e.min_snr_db > prev.min_snr_db &&
            e.phy_rate_bps > prev.phy_rate_bps))
        fail(ErrorKind::domain, "MCS table must be strictly increasing in index, SNR and rate");
    }
  }

  std::span<const McsEntry> entries() const { return entries_; }
  int contender_count() const { return contender_count_; }
  std::size_t size() const { return entries_.size(); }
  const McsEntry& front() const { return entries_.front(); }
  const McsEntry& back() const { return entries_.back(); }

  // Position of an entry by MCS index, if present.
  std::optional<std::size_t> position_of(int mcs_index) const {
    for (std::size_t i = 0; i < entries_.size(); ++i)
      if (entries_[i].index == mcs_index) return i;
    return std::nullopt;
  }

  // Highest entry whose threshold is met by snr_db (ideal rate selection).
  std::optional<McsEntry> best_for_snr(double snr_db) const {
    std::optional<McsEntry> best;
    for (const auto& e : entries_) {
      if (e.min_snr_db <= snr_db) best = e;
      else break;
    }
    return best;
  }

 private:
  std::vector<McsEntry> entries_;
  int contender_count_;
};

// Lowest-index entry whose fair share carries demand_bps.
inline McsEntry select_mcs(const McsTable& table, double demand_bps) {
  if (!(demand_bps > 0.0)) fail(ErrorKind::domain, "demand must be > 0");
  for (const auto& e : table.entries())
    if (e.fair_share_bps >= demand_bps) return e;
  fail(ErrorKind::infeasible_demand,
       "demand " + std::to_string(demand_bps) + " bit/s exceeds the largest fair share");
}

struct LinearCapacityModel {
  double slope_bps_per_db = 0.0;
  double intercept_bps = 0.0;

  double operator()(double snr_db) const {
    return std::max(0.0, slope_bps_per_db * snr_db + intercept_bps);
  }
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};

// Ordinary least-squares line through (x, y).
inline LinearFit fit_line(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) fail(ErrorKind::domain, "line fit needs >= 2 points");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0.0) fail(ErrorKind::domain, "line fit needs distinct abscissae");
  const double slope = sxy / sxx;
  return LinearFit{slope, my - slope * mx};
}

inline LinearCapacityModel regression_capacity(const McsTable& table) {
  if (table.size() < 2) fail(ErrorKind::domain, "regression needs >= 2 MCS entries");
  std::vector<double> snr, share;
  for (const auto& e : table.entries()) {
    snr.push_back(e.min_snr_db);
    share.push_back(e.fair_share_bps);
  }
  const auto line = fit_line(snr, share);
  return LinearCapacityModel{line.slope, line.intercept};
}

namespace mcs {

// IEEE 802.11ac, one spatial stream, 160 MHz, 800 ns guard interval.
inline constexpr double kVhtRatesMbps[] = {58.5, 117.0, 175.5, 234.0, 351.0,
                                           468.0, 526.5, 585.0, 702.0, 780.0};

struct Anchor {
  int index;
  double min_snr_db;
  double printed_fair_share_mbps;  // 3 contenders, efficiency 0.80
};

// Simulation-calibrated thresholds for MCS 2, 5 and 7.
inline constexpr Anchor kAnchors[] = {{2, 15.0, 50.0}, {5, 27.0, 133.0}, {7, 35.0, 166.0}};

inline bool uses_printed_shares(int contenders, double efficiency) {
  return contenders == 3 && efficiency == 0.80;
}

inline double anchor_share_bps(const Anchor& a, int contenders, double efficiency) {
  if (uses_printed_shares(contenders, efficiency)) return a.printed_fair_share_mbps * 1e6;
  return fair_share(kVhtRatesMbps[a.index] * 1e6, efficiency, contenders);
}

// The three calibrated rows only.
inline McsTable anchor_table(int contenders = 3, double efficiency = 0.80) {
  std::vector<McsEntry> rows;
  for (const auto& a : kAnchors)
    rows.push_back({a.index, a.min_snr_db, kVhtRatesMbps[a.index] * 1e6,
                    anchor_share_bps(a, contenders, efficiency)});
  return McsTable(std::move(rows), contenders);
}

// Full MCS 0-9 ladder. Thresholds other than the anchors come from a
// least-squares line of SNR against PHY rate through the anchors, rounded to
// 0.1 dB.
inline McsTable default_table(int contenders = 3, double efficiency = 0.80) {
  std::vector<double> rate, snr;
  for (const auto& a : kAnchors) {
    rate.push_back(kVhtRatesMbps[a.index]);
    snr.push_back(a.min_snr_db);
  }
  const auto line = fit_line(rate, snr);
  std::vector<McsEntry> rows;
  for (int i = 0; i < 10; ++i) {
    const double phy = kVhtRatesMbps[i] * 1e6;
    McsEntry e{i, std::round((line.slope * kVhtRatesMbps[i] + line.intercept) * 10.0) / 10.0,
               phy, fair_share(phy, efficiency, contenders)};
    for (const auto& a : kAnchors) {
      if (a.index == i) {
        e.min_snr_db = a.min_snr_db;
        e.fair_share_bps = anchor_share_bps(a, contenders, efficiency);
      }
    }
    rows.push_back(e);
  }
  return McsTable(std::move(rows), contenders);
}

// Fair share of the MCS 7 row, the reference share used to express demands.
inline double reference_fair_share(const McsTable& table) {
  if (auto pos = table.position_of(7)) return table.entries()[*pos].fair_share_bps;
  return table.back().fair_share_bps;
}

}  // namespace mcs

// Mean SNR perturbed by a unit-mean Rician power fade with factor K.
template <class Urbg>
double rician_snr_sample(double mean_snr_db, double k_db, Urbg& rng) {
  if (std::isinf(k_db) && k_db > 0.0) return mean_snr_db;
  const double k = std::pow(10.0, k_db / 10.0);
  const double los = std::sqrt(k / (k + 1.0));
  const double sigma = std::sqrt(1.0 / (2.0 * (k + 1.0)));
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double i = los + sigma * gauss(rng);
  const double q = sigma * gauss(rng);
  const double power = std::max(i * i + q * q, std::numeric_limits<double>::min());
  return mean_snr_db + 10.0 * std::log10(power);
}

}  // namespace gpqm

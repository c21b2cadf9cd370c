#pragma once

// Simulation metrics and their empirical-distribution reductions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpqm/error.hpp"

namespace gpqm {

struct PacketRecord {
  int source_id = 0;
  double created_s = 0.0;
  double enqueued_s = 0.0;
  double dequeued_s = 0.0;
  double delivered_s = 0.0;
  bool dropped = false;
  double size_bytes = 0.0;
  double delay_s = 0.0;  // delivered - created plus propagation, when delivered
};

struct FapCounters {
  int id = 0;
  std::uint64_t generated = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
  std::uint64_t in_system_end = 0;
  std::uint64_t window_generated = 0;  // created inside the measure window
  std::uint64_t window_dropped = 0;    // of those, dropped
  std::uint64_t window_delivered_bits = 0;
  std::uint64_t max_occupancy = 0;
  std::uint64_t early_drops = 0;   // RED probabilistic drops
  std::uint64_t forced_drops = 0;  // RED drops with the average above max_th
  std::uint64_t aqm_drops = 0;     // CoDel head drops

  double goodput_bps(double measure_s) const { return static_cast<double>(window_delivered_bits) / measure_s; }
};

struct SimMetrics {
  double window_start_s = 0.0;
  double window_length_s = 0.0;
  std::vector<double> throughput_bps;  // one sample per second of the window
  std::vector<double> delay_s;         // one sample per packet delivered in the window
  std::vector<FapCounters> faps;
  std::vector<PacketRecord> packets;  // only when recording is enabled

  double plr() const {
    std::uint64_t gen = 0, drop = 0;
    for (const auto& f : faps) {
      gen += f.window_generated;
      drop += f.window_dropped;
    }
    return gen == 0 ? 0.0 : static_cast<double>(drop) / static_cast<double>(gen);
  }
};

class DistributionSummary {
 public:
  explicit DistributionSummary(std::vector<double> samples) : sorted_(std::move(samples)) {
    std::sort(sorted_.begin(), sorted_.end());
  }

  bool empty() const { return sorted_.empty(); }
  std::size_t size() const { return sorted_.size(); }
  const std::vector<double>& sorted() const { return sorted_; }

  // Fraction of samples <= x.
  double cdf(double x) const {
    if (sorted_.empty()) return 0.0;
    const auto n = std::upper_bound(sorted_.begin(), sorted_.end(), x) - sorted_.begin();
    return static_cast<double>(n) / static_cast<double>(sorted_.size());
  }

  // Fraction of samples > x.
  double ccdf(double x) const { return 1.0 - cdf(x); }

  // Nearest-rank percentile, p in (0, 100].
  std::optional<double> percentile(double p) const {
    if (sorted_.empty()) return std::nullopt;
    if (!(p > 0.0 && p <= 100.0)) fail(ErrorKind::domain, "percentile must lie in (0, 100]");
    const auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(sorted_.size()) - 1e-9));
    return sorted_[std::clamp<std::size_t>(rank, 1, sorted_.size()) - 1];
  }

  std::optional<double> mean() const {
    if (sorted_.empty()) return std::nullopt;
    double s = 0.0;
    for (double v : sorted_) s += v;
    return s / static_cast<double>(sorted_.size());
  }

 private:
  std::vector<double> sorted_;
};

struct MetricsSummary {
  DistributionSummary throughput;
  DistributionSummary delay;
};

inline MetricsSummary summarize(const SimMetrics& m) {
  return {DistributionSummary(m.throughput_bps), DistributionSummary(m.delay_s)};
}

struct LabeledMetrics {
  std::string label;
  const SimMetrics* metrics = nullptr;
};

struct ComparisonRow {
  std::string label;
  std::optional<double> throughput_bps;
  std::optional<double> delay_s;
  double plr = 0.0;
  std::optional<double> throughput_delta;  // relative to the baseline row
  std::optional<double> delay_delta;
};

inline std::optional<double> relative_delta(const std::optional<double>& v, const std::optional<double>& base) {
  if (!v || !base || *base == 0.0) return std::nullopt;
  return (*v - *base) / *base;
}

inline std::vector<ComparisonRow> compare(const std::vector<LabeledMetrics>& runs, double percentile,
                                          const std::string& baseline) {
  if (runs.size() < 2) fail(ErrorKind::domain, "comparison needs at least two runs");
  const LabeledMetrics* base = nullptr;
  for (const auto& r : runs) {
    if (r.metrics->window_start_s != runs.front().metrics->window_start_s ||
        r.metrics->window_length_s != runs.front().metrics->window_length_s)
      fail(ErrorKind::domain, "run '" + r.label + "' uses a different measurement window");
    if (r.label == baseline) base = &r;
  }
  if (!base) fail(ErrorKind::domain, "baseline '" + baseline + "' is not among the runs");
  const auto base_sum = summarize(*base->metrics);
  const auto base_t = base_sum.throughput.percentile(percentile);
  const auto base_d = base_sum.delay.percentile(percentile);
  std::vector<ComparisonRow> rows;
  for (const auto& r : runs) {
    const auto s = summarize(*r.metrics);
    ComparisonRow row{r.label, s.throughput.percentile(percentile), s.delay.percentile(percentile),
                      r.metrics->plr(), {}, {}};
    row.throughput_delta = relative_delta(row.throughput_bps, base_t);
    row.delay_delta = relative_delta(row.delay_s, base_d);
    rows.push_back(row);
  }
  return rows;
}

namespace io {

inline void write_throughput_csv(std::ostream& os, const SimMetrics& m) {
  os << "t_s,throughput_bps\n";
  for (std::size_t k = 0; k < m.throughput_bps.size(); ++k)
    os << k << ',' << nlohmann::json(m.throughput_bps[k]).dump() << '\n';
}

inline void write_packets_csv(std::ostream& os, const SimMetrics& m) {
  os << "source_id,created_s,delay_s,dropped\n";
  for (const auto& p : m.packets)
    os << p.source_id << ',' << nlohmann::json(p.created_s).dump() << ','
       << (p.dropped ? std::string() : nlohmann::json(p.delay_s).dump()) << ',' << (p.dropped ? 1 : 0) << '\n';
}

inline nlohmann::json summary_json(const std::string& label, const SimMetrics& m, double percentile = 90.0) {
  const auto s = summarize(m);
  const auto or_null = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); };
  return {{"label", label},
          {"p90_throughput_bps", or_null(s.throughput.percentile(percentile))},
          {"p90_delay_s", or_null(s.delay.percentile(percentile))},
          {"plr", m.plr()}};
}

// Rows of (x, CDF, CCDF) at each distinct sample value. With max_rows > 0 the
// table keeps at most that many rows, taken at evenly spaced ranks.
inline void write_cdf_table(std::ostream& os, const DistributionSummary& d, const std::string& column,
                            std::size_t max_rows = 0) {
  os << column << ",cdf,ccdf\n";
  const auto& v = d.sorted();
  const std::size_t n = v.size();
  const auto emit = [&](std::size_t i) {
    const double c = static_cast<double>(i + 1) / static_cast<double>(n);
    os << nlohmann::json(v[i]).dump() << ',' << nlohmann::json(c).dump() << ','
       << nlohmann::json(1.0 - c).dump() << '\n';
  };
  // Last index of the run of equal values containing i.
  const auto run_end = [&](std::size_t i) {
    return static_cast<std::size_t>(std::upper_bound(v.begin(), v.end(), v[i]) - v.begin()) - 1;
  };
  if (max_rows == 0 || n <= max_rows) {
    for (std::size_t i = 0; i < n; i = run_end(i) + 1) emit(run_end(i));
    return;
  }
  std::size_t last = n;
  for (std::size_t k = 1; k <= max_rows; ++k) {
    const std::size_t i = run_end((k * n + max_rows - 1) / max_rows - 1);
    if (i == last) continue;
    emit(i);
    last = i;
  }
}

}  // namespace io

}  // namespace gpqm

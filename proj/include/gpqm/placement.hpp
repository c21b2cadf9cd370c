#pragma once

// Gateway-placement geometry. Each FAP contributes a ball of admissible FGW
// positions; the gateway placement subspace is their intersection clipped to
// the venue and kept M meters away from every FAP.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "gpqm/channel.hpp"
#include "gpqm/error.hpp"
#include "gpqm/vec3.hpp"

namespace gpqm {

struct Venue {
  double x_max_m = 100.0;
  double y_max_m = 100.0;
  double z_max_m = 20.0;
  double min_separation_m = 3.0;
  double min_altitude_m = 1.0;

  void validate() const {
    if (!(x_max_m > 0.0 && y_max_m > 0.0 && z_max_m > 0.0))
      fail(ErrorKind::domain, "venue bounds must be > 0");
    if (!(min_altitude_m >= 0.0 && min_altitude_m < z_max_m))
      fail(ErrorKind::domain, "minimum altitude must lie in [0, z_max)");
    if (!(min_separation_m >= 0.0)) fail(ErrorKind::domain, "minimum separation must be >= 0");
  }

  bool contains(const Vec3& p) const {
    return p.x >= 0.0 && p.x <= x_max_m && p.y >= 0.0 && p.y <= y_max_m && p.z >= 0.0 &&
           p.z <= z_max_m;
  }

  // Clamp into the region where the FGW may fly (altitude floor applied).
  Vec3 clamp(const Vec3& p) const {
    return Vec3{std::clamp(p.x, 0.0, x_max_m), std::clamp(p.y, 0.0, y_max_m),
                std::clamp(p.z, min_altitude_m, z_max_m)};
  }

  Vec3 center() const { return Vec3{x_max_m / 2.0, y_max_m / 2.0, z_max_m / 2.0}; }
};

struct SphereConstraint {
  Vec3 center;
  double radius_m = 0.0;
};

struct PlacementResult {
  std::optional<Vec3> position;
  std::vector<double> slack_m;  // radius - distance, per sphere

  bool empty() const { return !position.has_value(); }
};

struct FeasibilityMargins {
  std::vector<double> sphere_m;      // radius - distance
  std::array<double, 6> bounds_m{};  // x-0, xmax-x, y-0, ymax-y, z-zmin, zmax-z
  std::vector<double> separation_m;  // distance - M, must be > 0

  double worst_sphere() const {
    return sphere_m.empty() ? 0.0 : *std::min_element(sphere_m.begin(), sphere_m.end());
  }
  double worst_bound() const { return *std::min_element(bounds_m.begin(), bounds_m.end()); }
  double worst_separation() const {
    return separation_m.empty() ? std::numeric_limits<double>::infinity()
                                : *std::min_element(separation_m.begin(), separation_m.end());
  }

  bool feasible(double tol = 0.0) const {
    return worst_sphere() >= -tol && worst_bound() >= -tol && worst_separation() > -tol;
  }
};

inline FeasibilityMargins feasibility_margin(const Vec3& point, std::span<const SphereConstraint> spheres,
                                             const Venue& venue) {
  FeasibilityMargins m;
  for (const auto& s : spheres) {
    const double d = distance(point, s.center);
    m.sphere_m.push_back(s.radius_m - d);
    m.separation_m.push_back(d - venue.min_separation_m);
  }
  m.bounds_m = {point.x, venue.x_max_m - point.x, point.y, venue.y_max_m - point.y,
                point.z - venue.min_altitude_m, venue.z_max_m - point.z};
  return m;
}

namespace detail {

// Never return a point closer than M plus this to a FAP.
inline constexpr double kSeparationGuard = 1e-6;

inline double sphere_excess(const Vec3& p, std::span<const SphereConstraint> spheres) {
  double g = -std::numeric_limits<double>::infinity();
  for (const auto& s : spheres) g = std::max(g, distance(p, s.center) - s.radius_m);
  return g;
}

inline double separation_excess(const Vec3& p, std::span<const SphereConstraint> spheres, double m) {
  double h = -std::numeric_limits<double>::infinity();
  for (const auto& s : spheres) h = std::max(h, m + kSeparationGuard - distance(p, s.center));
  return h;
}

inline double combined_excess(const Vec3& p, std::span<const SphereConstraint> spheres, double m) {
  return std::max(sphere_excess(p, spheres), separation_excess(p, spheres, m));
}

inline const std::array<Vec3, 26>& pattern_directions() {
  static const std::array<Vec3, 26> dirs = [] {
    std::array<Vec3, 26> d{};
    std::size_t k = 0;
    for (int i = -1; i <= 1; ++i)
      for (int j = -1; j <= 1; ++j)
        for (int l = -1; l <= 1; ++l)
          if (i != 0 || j != 0 || l != 0) d[k++] = Vec3(i, j, l);
    return d;
  }();
  return dirs;
}

// Derivative-free descent over the venue box: poll 26 neighbours, move to the
// best improving one, halve the step when none improves.
template <class F>
Vec3 pattern_search(F&& f, Vec3 start, const Venue& venue, double first_step, double last_step) {
  Vec3 p = venue.clamp(start);
  double fp = f(p);
  for (double step = first_step; step >= last_step;) {
    Vec3 best = p;
    double fbest = fp;
    for (const auto& d : pattern_directions()) {
      const Vec3 q = venue.clamp(p + d * step);
      const double fq = f(q);
      if (fq < fbest) {
        fbest = fq;
        best = q;
      }
    }
    if (fbest < fp) {
      p = best;
      fp = fbest;
    } else {
      step /= 2.0;
    }
  }
  return p;
}

// Integer-meter lattice points of the venue that lie inside every sphere's
// bounding box; visit(p) is called in a fixed x-y-z order.
template <class Visit>
void for_each_grid_point(std::span<const SphereConstraint> spheres, const Venue& venue, double spacing,
                         Visit&& visit) {
  double lo[3] = {0.0, 0.0, venue.min_altitude_m};
  double hi[3] = {venue.x_max_m, venue.y_max_m, venue.z_max_m};
  for (const auto& s : spheres) {
    const double c[3] = {s.center.x, s.center.y, s.center.z};
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::max(lo[a], c[a] - s.radius_m);
      hi[a] = std::min(hi[a], c[a] + s.radius_m);
    }
  }
  for (int a = 0; a < 3; ++a)
    if (lo[a] > hi[a]) return;
  const auto first = [&](double v) { return std::ceil(v / spacing - 1e-9) * spacing; };
  for (double x = first(lo[0]); x <= hi[0] + 1e-9; x += spacing)
    for (double y = first(lo[1]); y <= hi[1] + 1e-9; y += spacing)
      for (double z = first(lo[2]); z <= hi[2] + 1e-9; z += spacing) visit(Vec3{x, y, z});
}

inline PlacementResult make_result(const Vec3& p, std::span<const SphereConstraint> spheres) {
  PlacementResult r;
  r.position = p;
  for (const auto& s : spheres) r.slack_m.push_back(s.radius_m - distance(p, s.center));
  return r;
}

}  // namespace detail

inline Vec3 radius_weighted_centroid(std::span<const SphereConstraint> spheres) {
  Vec3 acc;
  double wsum = 0.0;
  for (const auto& s : spheres) {
    const double w = 1.0 / (s.radius_m * s.radius_m);
    acc += s.center * w;
    wsum += w;
  }
  return acc * (1.0 / wsum);
}

// Finds a point of the gateway placement subspace, or reports it empty.
//
// The sphere part g(P) = max_i(|P - P_i| - r_i) is convex, so a pattern search
// from the radius-weighted centroid reaches its minimiser; the returned point is
// the deepest one found. M-separation is enforced afterwards as an exclusion
// penalty, and a 1 m lattice scan backs both stages so that any lattice-feasible
// configuration is reported non-empty.
inline PlacementResult compute_fgw_pos(std::span<const SphereConstraint> spheres, const Venue& venue) {
  if (spheres.empty()) fail(ErrorKind::domain, "placement needs at least one sphere");
  for (const auto& s : spheres)
    if (!(s.radius_m > 0.0)) fail(ErrorKind::domain, "sphere radius must be > 0");

  const double m = venue.min_separation_m;
  const auto g = [&](const Vec3& p) { return detail::sphere_excess(p, spheres); };
  const auto h = [&](const Vec3& p) { return detail::combined_excess(p, spheres, m); };

  const Vec3 convex_min = detail::pattern_search(g, radius_weighted_centroid(spheres), venue, 8.0, 0.01);
  if (g(convex_min) <= 0.0) {
    if (h(convex_min) <= 0.0) return detail::make_result(convex_min, spheres);

    Vec3 best = detail::pattern_search(h, convex_min, venue, 8.0, 0.01);
    double hbest = h(best);
    const double kick = m + 1.0;
    const Vec3 offsets[] = {{kick, 0, 0}, {-kick, 0, 0}, {0, kick, 0},
                            {0, -kick, 0}, {0, 0, kick}, {0, 0, -kick}};
    for (const auto& off : offsets) {
      if (hbest <= 0.0) break;
      const Vec3 cand = detail::pattern_search(h, convex_min + off, venue, 8.0, 0.01);
      const double hc = h(cand);
      if (hc < hbest) {
        hbest = hc;
        best = cand;
      }
    }
    if (hbest <= 0.0) return detail::make_result(best, spheres);
  }

  std::optional<Vec3> seed;
  double hseed = 0.0;
  detail::for_each_grid_point(spheres, venue, 1.0, [&](const Vec3& p) {
    const double hp = h(p);
    if (hp <= 0.0 && (!seed || hp < hseed)) {
      seed = p;
      hseed = hp;
    }
  });
  if (!seed) return PlacementResult{};
  const Vec3 refined = detail::pattern_search(h, *seed, venue, 0.5, 0.01);
  return detail::make_result(h(refined) <= hseed ? refined : *seed, spheres);
}

enum class OverlapClass { disjoint, partial, full };

inline const char* to_string(OverlapClass c) {
  switch (c) {
    case OverlapClass::disjoint: return "disjoint";
    case OverlapClass::partial: return "partial";
    case OverlapClass::full: return "full";
  }
  return "unknown";
}

struct CapacityExtremes {
  OverlapClass overlap_class = OverlapClass::disjoint;
  std::optional<Vec3> min_c_point;
  std::optional<Vec3> max_c_point;
  double min_c_value = 0.0;
  double max_c_value = 0.0;
};

using CapacityFn = std::function<double(double snr_db)>;

inline OverlapClass classify_overlap(const SphereConstraint& a, const SphereConstraint& b) {
  const double d = distance(a.center, b.center);
  if (d > a.radius_m + b.radius_m) return OverlapClass::disjoint;
  if (d + std::min(a.radius_m, b.radius_m) <= std::max(a.radius_m, b.radius_m)) return OverlapClass::full;
  return OverlapClass::partial;
}

inline double total_capacity(const Vec3& p, std::span<const SphereConstraint> spheres,
                             const ChannelParams& channel, double tx_power_dbm, const CapacityFn& capacity) {
  double c = 0.0;
  for (const auto& s : spheres) c += capacity(friis_snr(channel, tx_power_dbm, distance(p, s.center)));
  return c;
}

// Admissible FGW points minimising and maximising the summed link capacity for
// a pair of FAPs: a 1 m lattice over the placement subspace, then a feasible-only
// pattern refinement around each extreme.
inline CapacityExtremes appendix_a_analysis(std::span<const SphereConstraint> spheres, const Venue& venue,
                                            const ChannelParams& channel, double tx_power_dbm,
                                            const CapacityFn& capacity, double grid_m = 1.0) {
  if (spheres.size() != 2) fail(ErrorKind::domain, "capacity-extremes analysis needs exactly two spheres");
  CapacityExtremes out;
  out.overlap_class = classify_overlap(spheres[0], spheres[1]);
  if (out.overlap_class == OverlapClass::disjoint) return out;

  const auto admissible = [&](const Vec3& p) { return feasibility_margin(p, spheres, venue).feasible(); };
  const auto value = [&](const Vec3& p) { return total_capacity(p, spheres, channel, tx_power_dbm, capacity); };

  detail::for_each_grid_point(spheres, venue, grid_m, [&](const Vec3& p) {
    if (!admissible(p)) return;
    const double c = value(p);
    if (!out.min_c_point || c < out.min_c_value) {
      out.min_c_point = p;
      out.min_c_value = c;
    }
    if (!out.max_c_point || c > out.max_c_value) {
      out.max_c_point = p;
      out.max_c_value = c;
    }
  });
  if (!out.min_c_point) return out;

  const auto refine = [&](Vec3 start, double sign) {
    const auto f = [&](const Vec3& p) {
      return admissible(p) ? sign * value(p) : std::numeric_limits<double>::infinity();
    };
    return detail::pattern_search(f, start, venue, grid_m / 2.0, 0.01);
  };
  out.min_c_point = refine(*out.min_c_point, 1.0);
  out.min_c_value = value(*out.min_c_point);
  out.max_c_point = refine(*out.max_c_point, -1.0);
  out.max_c_value = value(*out.max_c_point);
  return out;
}

}  // namespace gpqm

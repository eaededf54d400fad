#pragma once

// Brute-force planning oracle. Costs are minimised over zooming grids using only
// the per-subcarrier service maps; the required power for a rate at a given K
// is found by bisection.

#include "predalloc/linkmodel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace grid {

// Service per subcarrier f(P_S): VoD average rate or RT effective capacity.
struct Service {
  predalloc::link::LinkParams link;
  bool rt = false;
  double beta = 0.0;
  double theta = 0.0;
  double slot_s = 0.005;

  double per_subcarrier(double ps) const {
    if (ps <= 0.0) return 0.0;
    return rt ? predalloc::link::effective_capacity(ps, 1.0, beta, theta, slot_s, link)
              : predalloc::link::vod_F(ps, link);
  }
  // Smallest P_S with f(P_S) >= r (bisection in log space).
  double power_for(double r) const {
    double lo = 1e-30, hi = 1e3;
    if (per_subcarrier(hi) < r) return std::numeric_limits<double>::infinity();
    for (int it = 0; it < 200; ++it) {
      const double mid = std::sqrt(lo * hi);
      (per_subcarrier(mid) >= r ? hi : lo) = mid;
      if (hi / lo - 1.0 < 1e-12) break;
    }
    return hi;
  }
};

// Minimum of a 1-D function over [lo, hi] by repeated 41-point grids, each
// zooming 10x around the best point.
inline double zoom_min(const std::function<double(double)>& f, double lo, double hi,
                       double* argmin = nullptr, int levels = 12) {
  double best_x = lo, best = std::numeric_limits<double>::infinity();
  for (int level = 0; level < levels; ++level) {
    const double step = (hi - lo) / 40.0;
    for (int k = 0; k <= 40; ++k) {
      const double x = lo + step * k;
      const double v = f(x);
      if (v < best) {
        best = v;
        best_x = x;
      }
    }
    lo = std::max(lo, best_x - 2.0 * step);
    hi = std::min(hi, best_x + 2.0 * step);
  }
  if (argmin) *argmin = best_x;
  return best;
}

struct Costs {
  double rho = 0.388;
  double p_c = 1.08e-3;
  double p_ave = 40.0;
  double k_max = 512.0;
};

// Power P/rho + P_c K needed to carry rate r on K subcarriers.
inline double cost_at(const Service& s, const Costs& c, double r, double k) {
  if (r <= 0.0) return 0.0;
  if (k <= 0.0) return std::numeric_limits<double>::infinity();
  const double p = k * s.power_for(r / k);
  if (p > c.p_ave) return std::numeric_limits<double>::infinity();
  return p / c.rho + c.p_c * k;
}

// Cheapest way to carry rate r in one frame, caps slack.
inline double frame_cost(const Service& s, const Costs& c, double r, double k_hi = -1.0,
                         int levels = 7) {
  if (r <= 0.0) return 0.0;
  if (k_hi < 0.0) k_hi = c.k_max;
  return zoom_min([&](double k) { return cost_at(s, c, r, k); }, 1e-9, k_hi, nullptr, levels);
}

}  // namespace grid

#include "predalloc/linkmodel.hpp"

#include "predalloc/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace predalloc::link {

using numerics::DomainError;
using numerics::exp_integral_e1;
using numerics::exp_integral_e1_scaled;
using numerics::upper_incomplete_gamma;
using numerics::upper_incomplete_gamma_scaled;

namespace {

constexpr double kRateScale = 1.0 / std::numbers::ln2;
// e^{nu} factors in second derivatives are capped here to keep Hessians finite.
constexpr double kMaxExp = 600.0;

// ln W(nu) and d ln W / d ln nu for the normalised average-power function
// W = P_S / c. `a` = 1 gives the VoD law.
struct LogWater {
  double log_w;
  double slope;
};

LogWater log_water(double nu, double a) {
  if (nu <= 1.0) {
    const double e1 = exp_integral_e1(nu);
    const double g = (a == 1.0) ? std::exp(-nu) / nu
                                : std::pow(nu, -a) * upper_incomplete_gamma(a, nu);
    const double w = g - e1;
    return {std::log(w), -a * g / w};
  }
  const double e1s = exp_integral_e1_scaled(nu);
  const double gs = (a == 1.0) ? 1.0 / nu : upper_incomplete_gamma_scaled(a, nu);
  const double r = gs - e1s;
  return {-nu + std::log(r), -a * gs / r};
}

double water_level(double ps, double a, const LinkParams& p) {
  if (!(ps > 0.0)) throw DomainError("water level: average power must be positive");
  const double log_t = std::log(ps) - std::log(p.c());
  double lo = -745.0;
  double hi = std::log(kMaxWaterLevel);
  if (log_water(kMaxWaterLevel, a).log_w >= log_t) return kMaxWaterLevel;

  // Initial guess from the small-nu (W ~ 1/nu) or large-nu (W ~ e^{-nu}/nu^2) asymptote.
  double y;
  if (log_t > 0.0) {
    y = std::max(-log_t, lo + 1.0);
  } else {
    const double nu0 = std::max(1.0, -log_t - 2.0 * std::log(std::max(1.0, -log_t)));
    y = std::log(std::min(nu0, kMaxWaterLevel));
  }
  for (int it = 0; it < 200; ++it) {
    const LogWater lw = log_water(std::exp(y), a);
    const double phi = lw.log_w - log_t;
    if (phi > 0.0) lo = y; else hi = y;
    if (std::abs(phi) <= 1e-15) break;
    double next = y - phi / lw.slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = next - y;
    y = next;
    if (std::abs(step) <= 4e-16 * std::max(1.0, std::abs(y))) break;
  }
  return std::exp(y);
}

double shape_a(double beta) {
  if (!(beta > 0.0)) throw DomainError("RT shape beta must be positive");
  return 1.0 / (beta + 1.0);
}

// 1 - F_R and F_R at water level nu, each computed where it has no cancellation.
struct RtF {
  double one_minus;
  double value;
};

RtF rt_F_at(double nu, double a) {
  const double b = 1.0 - a;
  if (nu <= 1.0) {
    const double tail = std::pow(nu, b) * upper_incomplete_gamma(a, nu);
    return {std::exp(-nu) - tail, -std::expm1(-nu) + tail};
  }
  const double x = std::exp(-nu) * (1.0 - nu * upper_incomplete_gamma_scaled(a, nu));
  return {x, 1.0 - x};
}

double log_F(const RtF& F) {
  return F.value < 0.5 ? std::log(F.value) : std::log1p(-F.one_minus);
}

// d^2 F_R / dP_S^2 = beta nu^{a+1} / (a c^2 Gamma(a, nu)).
double rt_F_second(double nu, double a, double beta, double c) {
  if (nu <= 1.0) {
    return beta * std::pow(nu, a + 1.0) / (a * c * c * upper_incomplete_gamma(a, nu));
  }
  const double gs = upper_incomplete_gamma_scaled(a, nu);
  return beta * nu * std::exp(std::min(nu, kMaxExp)) / (a * c * c * gs);
}

}  // namespace

double noise_power_w(double n0_dbm_per_hz, double subcarrier_hz) {
  return std::pow(10.0, (n0_dbm_per_hz - 30.0) / 10.0) * subcarrier_hz;
}

void LinkParams::validate() const {
  if (!(alpha > 0.0)) throw std::invalid_argument("link alpha must be positive");
  if (!(phi >= 1.0)) throw std::invalid_argument("link phi must be at least 1");
  if (!(noise_w > 0.0)) throw std::invalid_argument("link noise power must be positive");
  if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("link bandwidth must be positive");
}

double vod_slot_power(double nu, double g, const LinkParams& p) {
  if (g < nu) return 0.0;
  return p.c() * (1.0 / nu - 1.0 / g);
}

double vod_avg_power(double nu, const LinkParams& p) {
  if (!(nu > 0.0)) throw DomainError("vod_avg_power: nu must be positive");
  return p.c() * std::exp(log_water(nu, 1.0).log_w);
}

double vod_water_level(double ps, const LinkParams& p) { return water_level(ps, 1.0, p); }

double vod_F(double ps, const LinkParams& p) {
  if (ps <= 0.0) return 0.0;
  return p.bandwidth_hz * kRateScale * exp_integral_e1(vod_water_level(ps, p));
}

double vod_F_derivative(double ps, const LinkParams& p) {
  if (!(ps > 0.0)) throw DomainError("vod_F_derivative: P_S must be positive");
  return p.bandwidth_hz * kRateScale * vod_water_level(ps, p) / p.c();
}

double vod_avg_rate(double power_w, double subcarriers, const LinkParams& p) {
  if (power_w <= 0.0 || subcarriers <= 0.0) return 0.0;
  return subcarriers * vod_F(power_w / subcarriers, p);
}

double rt_slot_power(double nu, double g, double beta, const LinkParams& p) {
  if (g < nu) return 0.0;
  const double a = shape_a(beta);
  return p.c() * (std::pow(nu, -a) * std::pow(g, a - 1.0) - 1.0 / g);
}

double rt_avg_power(double nu, double beta, const LinkParams& p) {
  if (!(nu > 0.0)) throw DomainError("rt_avg_power: nu must be positive");
  return p.c() * std::exp(log_water(nu, shape_a(beta)).log_w);
}

double rt_water_level(double ps, double beta, const LinkParams& p) {
  return water_level(ps, shape_a(beta), p);
}

double rt_F(double ps, double beta, const LinkParams& p) {
  if (ps <= 0.0) return 1.0;
  const double a = shape_a(beta);
  return rt_F_at(water_level(ps, a, p), a).value;
}

double rt_one_minus_F(double ps, double beta, const LinkParams& p) {
  if (ps <= 0.0) return 0.0;
  const double a = shape_a(beta);
  return rt_F_at(water_level(ps, a, p), a).one_minus;
}

double rt_F_derivative(double ps, double beta, const LinkParams& p) {
  if (!(ps > 0.0)) throw DomainError("rt_F_derivative: P_S must be positive");
  return -beta * rt_water_level(ps, beta, p) / p.c();
}

double effective_capacity(double power_w, double subcarriers, double beta, double theta,
                          double slot_s, const LinkParams& p) {
  if (power_w <= 0.0 || subcarriers <= 0.0) return 0.0;
  const double a = shape_a(beta);
  const RtF F = rt_F_at(water_level(power_w / subcarriers, a, p), a);
  return -subcarriers * log_F(F) / (theta * slot_s);
}

ScalarDerivs vod_rate_derivs(double ps, const LinkParams& p) {
  if (!(ps > 0.0)) throw DomainError("vod_rate_derivs: P_S must be positive");
  const double c = p.c();
  const double scale = p.bandwidth_hz * kRateScale;
  const double nu = vod_water_level(ps, p);
  ScalarDerivs d;
  d.f = scale * exp_integral_e1(nu);
  d.df = scale * nu / c;
  d.d2f = -scale * (nu / c) * (nu / c) * std::exp(std::min(nu, kMaxExp));
  return d;
}

ScalarDerivs rt_capacity_derivs(double ps, double beta, double theta, double slot_s,
                                const LinkParams& p) {
  if (!(ps > 0.0)) throw DomainError("rt_capacity_derivs: P_S must be positive");
  const double a = shape_a(beta);
  const double c = p.c();
  const double nu = water_level(ps, a, p);
  const RtF F = rt_F_at(nu, a);
  const double d1 = -beta * nu / c;
  const double d2 = rt_F_second(nu, a, beta, c);
  const double tt = theta * slot_s;
  ScalarDerivs d;
  d.f = -log_F(F) / tt;
  d.df = -d1 / (F.value * tt);
  d.d2f = -(d2 * F.value - d1 * d1) / (F.value * F.value * tt);
  return d;
}

PerspectiveEval perspective(const ScalarDerivs& d, double power_w, double subcarriers) {
  if (!(subcarriers > 0.0)) throw DomainError("perspective: K must be positive");
  const double s = power_w / subcarriers;
  PerspectiveEval e;
  e.value = subcarriers * d.f;
  e.grad = {d.df, d.f - s * d.df};
  const double h = d.d2f / subcarriers;
  e.hess = {{{h, -s * h}, {-s * h, s * s * h}}};
  return e;
}

SlotAllocation allocate_slot_power(ServiceKind kind, double nu, double beta, const LinkParams& p,
                                   std::span<const double> gains, std::span<double> powers) {
  if (!powers.empty() && powers.size() != gains.size()) {
    throw std::invalid_argument("allocate_slot_power: power buffer size mismatch");
  }
  SlotAllocation out;
  const double c = p.c();
  const double a = (kind == ServiceKind::RT) ? shape_a(beta) : 1.0;
  const double nu_a = std::pow(nu, -a);
  for (std::size_t k = 0; k < gains.size(); ++k) {
    const double g = gains[k];
    double pk = 0.0;
    if (g >= nu) {
      pk = (kind == ServiceKind::VoD) ? c * (1.0 / nu - 1.0 / g)
                                      : c * (nu_a * std::pow(g, a - 1.0) - 1.0 / g);
      if (pk > 0.0) {
        ++out.active;
        out.power_w += pk;
        out.rate_bps += p.bandwidth_hz * std::log2(1.0 + pk * g / c);
      }
    }
    if (!powers.empty()) powers[k] = pk;
  }
  return out;
}

}  // namespace predalloc::link

#pragma once

#include <array>
#include <span>

namespace predalloc::link {

/// Noise power per subcarrier N0 * B with N0 in dBm/Hz.
double noise_power_w(double n0_dbm_per_hz, double subcarrier_hz);

struct LinkParams {
  double alpha = 1.0;             ///< large-scale gain (linear)
  double phi = 1.0;               ///< capacity gap factor
  double noise_w = 7.5178e-17;    ///< sigma_0^2 per subcarrier
  double bandwidth_hz = 15e3;     ///< subcarrier spacing

  /// phi * sigma_0^2 / alpha, the power scale of every water-filling law.
  double c() const { return phi * noise_w / alpha; }
  void validate() const;
};

enum class ServiceKind { VoD, RT };

/// Water levels beyond this carry no usable power; evaluations clamp here.
inline constexpr double kMaxWaterLevel = 700.0;

// ---------------------------------------------------------------------------
// VoD: per-slot water-filling, average power and average rate per subcarrier
// ---------------------------------------------------------------------------

/// c (1/nu - 1/g) for g >= nu, else 0.
double vod_slot_power(double nu, double g, const LinkParams& p);

/// Average power per subcarrier at water level nu: c (e^{-nu}/nu - E1(nu)).
double vod_avg_power(double nu, const LinkParams& p);

/// Inverse of vod_avg_power. Throws DomainError for P_S <= 0.
double vod_water_level(double ps, const LinkParams& p);

/// Average rate per subcarrier (B / ln 2) E1(nu(P_S)) in bits/s; 0 at P_S = 0.
double vod_F(double ps, const LinkParams& p);

/// dF_D/dP_S = (B / ln 2) nu / c.
double vod_F_derivative(double ps, const LinkParams& p);

/// K F_D(P / K); 0 when either argument is 0.
double vod_avg_rate(double power_w, double subcarriers, const LinkParams& p);

// ---------------------------------------------------------------------------
// RT: effective-capacity water-filling with shape beta
// ---------------------------------------------------------------------------

/// c (nu^{-1/(beta+1)} g^{-beta/(beta+1)} - 1/g) for g >= nu, else 0.
double rt_slot_power(double nu, double g, double beta, const LinkParams& p);

/// c (nu^{-a} Gamma(a, nu) - E1(nu)) with a = 1/(beta+1).
double rt_avg_power(double nu, double beta, const LinkParams& p);

double rt_water_level(double ps, double beta, const LinkParams& p);

/// 1 - e^{-nu} + nu^{beta/(beta+1)} Gamma(1/(beta+1), nu); 1 at P_S = 0.
double rt_F(double ps, double beta, const LinkParams& p);

/// 1 - F_R, accurate when F_R is close to 1.
double rt_one_minus_F(double ps, double beta, const LinkParams& p);

/// dF_R/dP_S = -beta nu / c.
double rt_F_derivative(double ps, double beta, const LinkParams& p);

/// -(K / (theta tau)) ln F_R(P / K) in bits/s.
double effective_capacity(double power_w, double subcarriers, double beta, double theta,
                          double slot_s, const LinkParams& p);

// ---------------------------------------------------------------------------
// Perspective maps h(P, K) = K f(P / K) with gradient and Hessian, used as
// concave constraint functions by the planner.
// ---------------------------------------------------------------------------

struct ScalarDerivs {
  double f = 0.0;
  double df = 0.0;
  double d2f = 0.0;
};

struct PerspectiveEval {
  double value = 0.0;
  std::array<double, 2> grad{};                ///< d/dP, d/dK
  std::array<std::array<double, 2>, 2> hess{};
};

/// f = F_D and its first two derivatives at P_S.
ScalarDerivs vod_rate_derivs(double ps, const LinkParams& p);

/// f = -ln F_R / (theta tau) and its first two derivatives at P_S.
ScalarDerivs rt_capacity_derivs(double ps, double beta, double theta, double slot_s,
                                const LinkParams& p);

/// Lifts per-subcarrier derivatives at P_S = P/K to the perspective. K must be
/// positive.
PerspectiveEval perspective(const ScalarDerivs& d, double power_w, double subcarriers);

// ---------------------------------------------------------------------------
// Slot-level allocation
// ---------------------------------------------------------------------------

struct SlotAllocation {
  double power_w = 0.0;   ///< sum over subcarriers
  double rate_bps = 0.0;  ///< sum of B log2(1 + p g / c)
  int active = 0;         ///< subcarriers above the water level
};

/// Applies the water-filling law of `kind` at level nu to each fading gain.
/// Writes per-subcarrier powers to `powers` when it is non-empty.
SlotAllocation allocate_slot_power(ServiceKind kind, double nu, double beta, const LinkParams& p,
                                   std::span<const double> gains, std::span<double> powers = {});

}  // namespace predalloc::link

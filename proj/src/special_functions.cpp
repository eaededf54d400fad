#include "predalloc/numerics.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace predalloc::numerics {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;
constexpr int kMaxTerms = 1000;

// Power series of E1 for 0 < x <= 1.
double e1_series(double x) {
  double sum = 0.0;
  double term = 1.0;
  for (int k = 1; k < kMaxTerms; ++k) {
    term *= -x / k;
    const double contrib = term / k;
    sum += contrib;
    if (std::abs(contrib) < kEps * std::abs(sum)) break;
  }
  return -std::numbers::egamma - std::log(x) - sum;
}

// Modified Lentz evaluation of e^{x} E1(x) for x > 1. Returns NaN when the
// fraction fails to converge.
double e1_scaled_fraction(double x) {
  double b = x + 1.0;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxTerms; ++i) {
    const double an = -static_cast<double>(i) * i;
    b += 2.0;
    d = 1.0 / (an * d + b);
    c = b + an / c;
    const double del = c * d;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

// e^{x} x^{-s} Gamma(s, x) by continued fraction; NaN when not converged.
double gamma_scaled_fraction(double s, double x) {
  double b = x + 1.0 - s;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxTerms; ++i) {
    const double an = -i * (i - s);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

// Lower incomplete gamma by series.
double lower_gamma_series(double s, double x) {
  double ap = s;
  double del = 1.0 / s;
  double sum = del;
  for (int n = 1; n < kMaxTerms; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * kEps) break;
  }
  return sum * std::exp(-x + s * std::log(x));
}

}  // namespace

double exp_integral_e1(double x) {
  if (!(x > 0.0)) throw DomainError("exp_integral_e1: x must be positive");
  if (std::isinf(x)) return 0.0;
  if (x <= 1.0) return e1_series(x);
  const double scaled = e1_scaled_fraction(x);
  if (std::isnan(scaled)) {
    return integrate_to_infinity([](double t) { return std::exp(-t) / t; }, x);
  }
  return scaled * std::exp(-x);
}

double exp_integral_e1_scaled(double x) {
  if (!(x > 0.0)) throw DomainError("exp_integral_e1_scaled: x must be positive");
  if (x <= 1.0) return std::exp(x) * e1_series(x);
  const double scaled = e1_scaled_fraction(x);
  if (std::isnan(scaled)) return std::exp(x) * exp_integral_e1(x);
  return scaled;
}

double upper_incomplete_gamma(double s, double x) {
  if (!(s > 0.0 && s <= 1.0)) {
    throw DomainError("upper_incomplete_gamma: s must lie in (0, 1]");
  }
  if (!(x >= 0.0)) throw DomainError("upper_incomplete_gamma: x must be nonnegative");
  if (x == 0.0) return std::tgamma(s);
  if (s == 1.0) return std::exp(-x);
  if (std::isinf(x)) return 0.0;
  if (x < s + 1.0) return std::tgamma(s) - lower_gamma_series(s, x);
  const double scaled = gamma_scaled_fraction(s, x);
  if (std::isnan(scaled)) {
    return integrate_to_infinity(
        [s](double t) { return std::exp((s - 1.0) * std::log(t) - t); }, x);
  }
  return scaled * std::exp(-x + s * std::log(x));
}

double upper_incomplete_gamma_scaled(double s, double x) {
  if (!(s > 0.0 && s <= 1.0)) {
    throw DomainError("upper_incomplete_gamma_scaled: s must lie in (0, 1]");
  }
  if (!(x > 0.0)) throw DomainError("upper_incomplete_gamma_scaled: x must be positive");
  if (x < s + 1.0) return upper_incomplete_gamma(s, x) * std::exp(x - s * std::log(x));
  if (s == 1.0) return 1.0 / x;
  const double scaled = gamma_scaled_fraction(s, x);
  if (std::isnan(scaled)) return upper_incomplete_gamma(s, x) * std::exp(x - s * std::log(x));
  return scaled;
}

}  // namespace predalloc::numerics

#include "predalloc/numerics.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace predalloc::numerics {
namespace {

constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double kronrod;
  double error;
};

Panel gauss_kronrod(const std::function<double(double)>& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    const double sum = f(center - dx) + f(center + dx);
    kronrod += kKronrodWeights[j] * sum;
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * sum;
  }
  return {kronrod * half, std::abs((kronrod - gauss) * half)};
}

double adapt(const std::function<double(double)>& f, double a, double b, const Panel& whole,
             double abs_tol, int depth) {
  if (whole.error <= abs_tol || depth >= 60 || b - a <= 1e-15 * std::abs(a)) {
    return whole.kronrod;
  }
  const double mid = 0.5 * (a + b);
  const Panel left = gauss_kronrod(f, a, mid);
  const Panel right = gauss_kronrod(f, mid, b);
  if (std::abs(left.kronrod + right.kronrod - whole.kronrod) <= 0.1 * abs_tol &&
      left.error + right.error <= abs_tol) {
    return left.kronrod + right.kronrod;
  }
  return adapt(f, a, mid, left, 0.5 * abs_tol, depth + 1) +
         adapt(f, mid, b, right, 0.5 * abs_tol, depth + 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol) {
  if (a == b) return 0.0;
  const Panel whole = gauss_kronrod(f, a, b);
  const double abs_tol = std::max(rel_tol * std::abs(whole.kronrod), 1e-300);
  return adapt(f, a, b, whole, abs_tol, 0);
}

double integrate_to_infinity(const std::function<double(double)>& f, double a, double rel_tol) {
  auto mapped = [&](double u) {
    if (u >= 1.0) return 0.0;
    const double w = 1.0 - u;
    const double value = f(a + u / w);
    return std::isfinite(value) ? value / (w * w) : 0.0;
  };
  return integrate(mapped, 0.0, 1.0, rel_tol);
}

double find_root(const BracketedFunction& fn, double tol) {
  if (!(fn.lo < fn.hi)) throw BracketError("find_root: requires lo < hi");
  const auto& f = fn.evaluator;
  const double flo = f(fn.lo);
  const double fhi = f(fn.hi);
  if (flo == 0.0) return fn.lo;
  if (fhi == 0.0) return fn.hi;
  if (!(flo * fhi < 0.0)) throw BracketError("find_root: no sign change across bracket");

  constexpr double eps = std::numeric_limits<double>::epsilon();
  auto done = [tol](double a, double b) {
    return std::abs(b - a) <= tol ||
           std::abs(b - a) <= 4.0 * eps * std::max(std::abs(a), std::abs(b));
  };
  std::uintmax_t max_iter = 200;
  auto [a, b] = boost::math::tools::toms748_solve(f, fn.lo, fn.hi, flo, fhi, done, max_iter);
  if (a == b) return a;
  double fa = f(a);
  // Bisection tail in case the iteration budget ran out first.
  for (int i = 0; i < 200 && !done(a, b); ++i) {
    const double mid = 0.5 * (a + b);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (fa < 0.0)) {
      a = mid;
      fa = fm;
    } else {
      b = mid;
    }
  }
  return std::clamp(0.5 * (a + b), fn.lo, fn.hi);
}

double ridders_derivative(const std::function<double(double)>& f, double x, double h0) {
  constexpr int kTable = 10;
  constexpr double kShrink = 1.4;
  constexpr double kShrink2 = kShrink * kShrink;
  constexpr double kSafe = 2.0;
  std::array<std::array<double, kTable>, kTable> a{};
  double hh = h0;
  a[0][0] = (f(x + hh) - f(x - hh)) / (2.0 * hh);
  double err = std::numeric_limits<double>::max();
  double ans = a[0][0];
  for (int i = 1; i < kTable; ++i) {
    hh /= kShrink;
    a[0][i] = (f(x + hh) - f(x - hh)) / (2.0 * hh);
    double fac = kShrink2;
    for (int j = 1; j <= i; ++j) {
      a[j][i] = (a[j - 1][i] * fac - a[j - 1][i - 1]) / (fac - 1.0);
      fac *= kShrink2;
      const double errt =
          std::max(std::abs(a[j][i] - a[j - 1][i]), std::abs(a[j][i] - a[j - 1][i - 1]));
      if (errt <= err) {
        err = errt;
        ans = a[j][i];
      }
    }
    if (std::abs(a[i][i] - a[i - 1][i - 1]) >= kSafe * err) break;
  }
  return ans;
}

double check_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                      const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& g,
                      const Eigen::VectorXd& x) {
  const Eigen::VectorXd analytic = g(x);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    auto slice = [&](double xi) {
      Eigen::VectorXd y = x;
      y[i] = xi;
      return f(y);
    };
    const double h0 = x[i] != 0.0 ? 0.1 * std::abs(x[i]) : 1e-3;
    const double numeric = ridders_derivative(slice, x[i], h0);
    const double diff = std::abs(analytic[i] - numeric);
    if (diff == 0.0) continue;
    const double denom = std::abs(numeric);
    worst = std::max(worst, denom > 0.0 ? diff / denom : std::numeric_limits<double>::infinity());
  }
  return worst;
}

double check_gradient(const std::function<double(double)>& f, const std::function<double(double)>& g,
                      double x) {
  Eigen::VectorXd point(1);
  point[0] = x;
  return check_gradient([&](const Eigen::VectorXd& y) { return f(y[0]); },
                        [&](const Eigen::VectorXd& y) {
                          Eigen::VectorXd out(1);
                          out[0] = g(y[0]);
                          return out;
                        },
                        point);
}

}  // namespace predalloc::numerics

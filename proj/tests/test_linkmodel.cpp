#include "doctest.h"
#include "oracles.hpp"

#include "predalloc/linkmodel.hpp"
#include "predalloc/numerics.hpp"
#include "predalloc/random.hpp"

#include <cmath>
#include <numbers>
#include <vector>

using namespace predalloc;
using namespace predalloc::link;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

LinkParams typical(double alpha = 1e-11) {
  LinkParams p;
  p.alpha = alpha;
  p.noise_w = noise_power_w(-173.0, 15e3);
  return p;
}

LinkParams unit() {
  LinkParams p;
  p.alpha = 1.0;
  p.noise_w = 1.0;
  return p;
}

}  // namespace

TEST_CASE("noise power per subcarrier") {
  CHECK(rel(noise_power_w(-173.0, 15e3), 7.5178e-17) <= 1e-4);
}

TEST_CASE("VoD slot power law") {
  const LinkParams p = unit();
  CHECK(vod_slot_power(0.5, 0.3, p) == 0.0);
  CHECK(vod_slot_power(0.5, 0.5, p) == 0.0);
  CHECK(vod_slot_power(0.5, 1.0, p) == doctest::Approx(1.0));
}

TEST_CASE("VoD average power closed form against quadrature") {
  const LinkParams p = unit();
  for (double nu : {0.1, 1.0, 3.0, 0.003, 12.0}) {
    CAPTURE(nu);
    CHECK(rel(vod_avg_power(nu, p), oracle::vod_power(nu, 1.0)) <= 1e-9);
  }
}

TEST_CASE("VoD water level inverts the average power") {
  const LinkParams p = typical();
  for (double ps : {1e-9, 1e-6, 1e-4, 0.01, 0.3, 5.0, 40.0}) {
    CAPTURE(ps);
    const double nu = vod_water_level(ps, p);
    CHECK(rel(vod_avg_power(nu, p), ps) <= 1e-10);
  }
  CHECK(vod_water_level(1e3, p) < vod_water_level(1.0, p));
  CHECK(vod_water_level(1e-12, p) > 10.0);
  CHECK_THROWS_AS(vod_water_level(0.0, p), numerics::DomainError);
}

TEST_CASE("VoD average rate") {
  const LinkParams p = typical(2e-12);
  CHECK(vod_avg_rate(0.0, 3.0, p) == 0.0);
  CHECK(vod_avg_rate(1.0, 0.0, p) == 0.0);
  CounterStream rng(21, StreamTag::Test, 1);
  for (int k = 0; k < 20; ++k) {
    const double P = 0.01 + 5.0 * rng.uniform();
    const double K = 1.0 + 60.0 * rng.uniform();
    const double nu = vod_water_level(P / K, p);
    const double want = K * oracle::vod_rate(nu, p.c(), p.bandwidth_hz);
    CHECK(rel(vod_avg_rate(P, K, p), want) <= 1e-8);
    CHECK(rel(vod_avg_rate(2.0 * P, 2.0 * K, p), 2.0 * vod_avg_rate(P, K, p)) <= 1e-12);
  }
}

TEST_CASE("RT slot power law") {
  const LinkParams p = unit();
  CHECK(rt_slot_power(0.5, 0.4, 2.0, p) == 0.0);
  CHECK(rt_slot_power(0.5, 0.5, 2.0, p) == doctest::Approx(0.0).epsilon(1e-15));
  for (double g : {0.6, 1.0, 3.0}) {
    CHECK(rel(rt_slot_power(0.5, g, 1e-6, p), vod_slot_power(0.5, g, p)) <= 1e-5);
  }
}

TEST_CASE("RT average power and F_R closed forms against quadrature") {
  const LinkParams p = unit();
  for (double beta : {0.3, 3.66, 12.0}) {
    for (double nu : {0.1, 1.0, 3.0}) {
      CAPTURE(beta);
      CAPTURE(nu);
      CHECK(rel(rt_avg_power(nu, beta, p), oracle::rt_power(nu, beta, 1.0)) <= 1e-9);
      const double ps = rt_avg_power(nu, beta, p);
      CHECK(rel(rt_F(ps, beta, p), oracle::rt_laplace(nu, beta, 1.0)) <= 1e-8);
    }
  }
}

TEST_CASE("RT water level") {
  const LinkParams p = typical();
  for (double beta : {0.5, 3.66}) {
    double prev = 0.0;
    for (double ps : {40.0, 1.0, 1e-3, 1e-6, 1e-9}) {
      const double nu = rt_water_level(ps, beta, p);
      CHECK(rel(rt_avg_power(nu, beta, p), ps) <= 1e-10);
      CHECK(nu > prev);
      prev = nu;
    }
  }
  for (double ps : {1e-6, 1e-3}) {
    CHECK(rel(rt_water_level(ps, 1e-7, p), vod_water_level(ps, p)) <= 1e-5);
  }
}

TEST_CASE("F_R limits and monotonicity") {
  const LinkParams p = typical();
  CHECK(rt_F(0.0, 3.0, p) == 1.0);
  double prev = 1.0;
  for (double ps : {1e-10, 1e-8, 1e-6, 1e-4, 1e-2, 1.0}) {
    const double f = rt_F(ps, 3.0, p);
    CHECK(f < prev);
    CHECK(f > 0.0);
    prev = f;
  }
}

TEST_CASE("F_R derivative matches finite differences") {
  CounterStream rng(22, StreamTag::Test, 2);
  const LinkParams p = typical();
  for (int k = 0; k < 20; ++k) {
    const double beta = 0.2 + 8.0 * rng.uniform();
    const double ps = std::exp(std::log(1e-8) + rng.uniform() * std::log(1e8));
    auto f = [&](double x) { return rt_F(x, beta, p); };
    auto g = [&](double x) { return rt_F_derivative(x, beta, p); };
    CAPTURE(beta);
    CAPTURE(ps);
    CHECK(numerics::check_gradient(f, g, ps) <= 1e-5);
    CHECK(g(ps) < 0.0);
    CHECK(std::abs(g(2.0 * ps)) < std::abs(g(ps)));
  }
}

TEST_CASE("perspective derivatives match finite differences") {
  CounterStream rng(23, StreamTag::Test, 3);
  const LinkParams p = typical(3e-12);
  const double theta = 3.383e-5, tau = 0.005;
  for (int k = 0; k < 20; ++k) {
    const double P = 0.05 + 4.0 * rng.uniform();
    const double K = 2.0 + 80.0 * rng.uniform();
    // Alternate between the shape implied by theta and a much larger one.
    const double beta = (k % 2 == 0) ? theta * tau * 15e3 / std::numbers::ln2 : 3.66;
    Eigen::Vector2d x(P, K);
    auto fv = [&](const Eigen::VectorXd& v) { return vod_avg_rate(v[0], v[1], p); };
    auto gv = [&](const Eigen::VectorXd& v) {
      const auto e = perspective(vod_rate_derivs(v[0] / v[1], p), v[0], v[1]);
      return Eigen::Vector2d(e.grad[0], e.grad[1]).eval();
    };
    CHECK(numerics::check_gradient(fv, gv, x) <= 1e-6);
    auto fr = [&](const Eigen::VectorXd& v) {
      return effective_capacity(v[0], v[1], beta, theta, tau, p);
    };
    auto gr = [&](const Eigen::VectorXd& v) {
      const auto e = perspective(rt_capacity_derivs(v[0] / v[1], beta, theta, tau, p), v[0], v[1]);
      return Eigen::Vector2d(e.grad[0], e.grad[1]).eval();
    };
    CHECK(numerics::check_gradient(fr, gr, x) <= 1e-6);

    // Second derivatives along P against differences of the analytic gradient.
    const double h = 1e-4 * P;
    const auto ep = perspective(vod_rate_derivs((P + h) / K, p), P + h, K);
    const auto em = perspective(vod_rate_derivs((P - h) / K, p), P - h, K);
    const auto e0 = perspective(vod_rate_derivs(P / K, p), P, K);
    CHECK(rel(e0.hess[0][0], (ep.grad[0] - em.grad[0]) / (2.0 * h)) <= 1e-5);
    const auto rp = perspective(rt_capacity_derivs((P + h) / K, beta, theta, tau, p), P + h, K);
    const auto rm = perspective(rt_capacity_derivs((P - h) / K, beta, theta, tau, p), P - h, K);
    const auto r0 = perspective(rt_capacity_derivs(P / K, beta, theta, tau, p), P, K);
    CHECK(rel(r0.hess[0][0], (rp.grad[0] - rm.grad[0]) / (2.0 * h)) <= 1e-5);
  }
}

TEST_CASE("effective capacity limits") {
  const LinkParams p = typical(3e-12);
  const double tau = 0.005, B = p.bandwidth_hz;
  CHECK(effective_capacity(0.0, 10.0, 3.0, 1e-5, tau, p) == 0.0);
  const double ec = effective_capacity(2.0, 30.0, 3.0, 1e-5, tau, p);
  CHECK(rel(effective_capacity(4.0, 60.0, 3.0, 1e-5, tau, p), 2.0 * ec) <= 1e-12);
  // Small exponent: effective capacity tends to the ergodic rate.
  const double theta = 1e-12;
  const double beta = theta * tau * B / std::numbers::ln2;
  CHECK(rel(effective_capacity(2.0, 30.0, beta, theta, tau, p), vod_avg_rate(2.0, 30.0, p)) <= 1e-4);
}

TEST_CASE("slot allocation averages to the planned power") {
  // Moderate water levels: at very high SNR the RT law has per-slot power with
  // infinite variance and the sample mean converges too slowly for 1e5 slots.
  const LinkParams p = typical(1e-13);
  const double K = 16.0;
  for (ServiceKind kind : {ServiceKind::VoD, ServiceKind::RT}) {
    const double beta = 3.66;
    const double P = K * (kind == ServiceKind::VoD ? vod_avg_power(0.3, p)
                                                   : rt_avg_power(0.3, beta, p));
    const double nu = kind == ServiceKind::VoD ? vod_water_level(P / K, p)
                                               : rt_water_level(P / K, beta, p);
    CounterStream rng(24, StreamTag::Test, kind == ServiceKind::VoD ? 5 : 6);
    std::vector<double> g(16), pw(16);
    double total = 0.0;
    const int slots = 100000;
    for (int s = 0; s < slots; ++s) {
      for (auto& x : g) x = rng.exponential(1.0);
      const SlotAllocation a = allocate_slot_power(kind, nu, beta, p, g, pw);
      total += a.power_w;
      if (s < 50) {
        double alt = 0.0;
        for (std::size_t k = 0; k < g.size(); ++k) {
          if (g[k] >= nu) {
            alt += p.bandwidth_hz * (kind == ServiceKind::VoD ? 1.0 : 1.0 / (1.0 + beta)) *
                   std::log2(g[k] / nu);
          }
        }
        CHECK(rel(a.rate_bps + 1e-300, alt + 1e-300) <= 1e-9);
      }
    }
    CHECK(rel(total / slots, P) <= 0.01);
  }
  std::vector<double> low(8, 1e-3);
  const SlotAllocation silent = allocate_slot_power(ServiceKind::VoD, 0.5, 0.0, p, low);
  CHECK(silent.power_w == 0.0);
  CHECK(silent.rate_bps == 0.0);
}

TEST_CASE("perspective maps are jointly concave") {
  const LinkParams p = typical(5e-12);
  const double theta = 3.383e-5, tau = 0.005;
  const double beta = theta * tau * 15e3 / std::numbers::ln2;
  CounterStream rng(25, StreamTag::Test, 7);
  for (int k = 0; k < 1000; ++k) {
    const double p1 = 5.0 * rng.uniform(), k1 = 0.1 + 50.0 * rng.uniform();
    const double p2 = 5.0 * rng.uniform(), k2 = 0.1 + 50.0 * rng.uniform();
    const double mp = 0.5 * (p1 + p2), mk = 0.5 * (k1 + k2);
    const double d = vod_avg_rate(mp, mk, p) -
                     0.5 * (vod_avg_rate(p1, k1, p) + vod_avg_rate(p2, k2, p));
    CHECK(d >= -1e-9 * std::max(1.0, vod_avg_rate(mp, mk, p)));
    const double e = effective_capacity(mp, mk, beta, theta, tau, p) -
                     0.5 * (effective_capacity(p1, k1, beta, theta, tau, p) +
                            effective_capacity(p2, k2, beta, theta, tau, p));
    CHECK(e >= -1e-9 * std::max(1.0, effective_capacity(mp, mk, beta, theta, tau, p)));
  }
}

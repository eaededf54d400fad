#include "doctest.h"

#include "predalloc/numerics.hpp"
#include "predalloc/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

using namespace predalloc;
using namespace predalloc::traffic;

namespace {

// ln E[exp(theta A)] for the arrivals A in a window, estimated by sampling.
// Plain sampling of e^{theta A} has infinite variance once theta >= lambda_u / 2,
// so batches are drawn from the exponentially tilted law (tilt eta) and
// reweighted by exp(-eta A + lambda_a t (M(eta) - 1)).
double mc_log_mgf(const RTArrivalSpec& spec, double theta, double window_s, int runs,
                  std::uint32_t id) {
  const double eta = std::max(0.0, (4.0 * theta - spec.lambda_u) / 3.0);
  const double m_eta = spec.lambda_u / (spec.lambda_u - eta);
  RTArrivalSpec tilted;
  tilted.lambda_a = spec.lambda_a * m_eta;
  tilted.lambda_u = spec.lambda_u - eta;
  CounterStream rng(77, StreamTag::Test, id);
  double acc = 0.0;
  for (int r = 0; r < runs; ++r) {
    acc += std::exp((theta - eta) * sample_arrivals(tilted, window_s, rng).bits);
  }
  return std::log(acc / runs) + spec.lambda_a * window_s * (m_eta - 1.0);
}

}  // namespace

TEST_CASE("effective bandwidth closed form") {
  const RTArrivalSpec spec;
  CHECK(effective_bandwidth(spec, 1e-15) == doctest::Approx(2e6).epsilon(1e-9));
  CHECK(effective_bandwidth(spec, 1.25e-4) == doctest::Approx(4e6).epsilon(1e-12));
  double prev = 0.0;
  for (double f : {0.05, 0.2, 0.5, 0.8, 0.99}) {
    const double eb = effective_bandwidth(spec, f * spec.lambda_u);
    CHECK(eb > prev);
    prev = eb;
  }
  CHECK_THROWS_AS(effective_bandwidth(spec, spec.lambda_u), numerics::DomainError);
}

TEST_CASE("effective bandwidth agrees with the sampled log-MGF") {
  // (1/(theta t)) ln E[e^{theta A(t)}] is exact for any horizon t under compound
  // Poisson arrivals; a short horizon keeps the estimator variance small.
  const RTArrivalSpec spec;
  const double t = 0.005;
  std::uint32_t id = 10;
  for (double f : {0.25, 0.5, 0.75}) {
    const double theta = f * spec.lambda_u;
    const double est = mc_log_mgf(spec, theta, t, 2000000, id++) / (theta * t);
    CHECK(std::abs(est / effective_bandwidth(spec, theta) - 1.0) <= 0.01);
  }
}

TEST_CASE("QoS exponent") {
  const RTArrivalSpec spec;
  const QoSSpec qos;
  const QoSExponent e = solve_qos_exponent(spec, qos, 0.005, 15e3);
  const double target = std::log(1.0 / qos.eps_d);
  CHECK(std::abs(e.theta * effective_bandwidth(spec, e.theta) * qos.d_max - target) <= 1e-10);
  // theta * lambda_a * D = L (lambda_u - theta) solved for theta.
  const double closed = target * spec.lambda_u / (spec.lambda_a * qos.d_max + target);
  CHECK(e.theta == doctest::Approx(closed).epsilon(1e-12));
  CHECK(e.beta == doctest::Approx(e.theta * 0.005 * 15e3 / std::numbers::ln2).epsilon(1e-15));
  CHECK(e.beta == doctest::Approx(3.66e-3).epsilon(1e-3));

  QoSSpec loose = qos;
  loose.eps_d = 0.999999;
  CHECK(solve_qos_exponent(spec, loose, 0.005, 15e3).theta < 1e-9);
  QoSSpec tight = qos;
  tight.eps_d = 0.001;
  CHECK(solve_qos_exponent(spec, tight, 0.005, 15e3).theta > e.theta);
  CHECK(timescale_separation_ok(qos, 0.005, 1.0));
  CHECK_FALSE(timescale_separation_ok(qos, 0.02, 1.0));
}

TEST_CASE("arrival sampling statistics") {
  const RTArrivalSpec spec;
  const double tau = 0.005;
  CounterStream rng(5, StreamTag::Arrivals, 0);
  const int n = 1000000;
  double sum = 0.0, sq = 0.0, packets = 0.0;
  for (int i = 0; i < n; ++i) {
    const SlotArrivals a = sample_arrivals(spec, tau, rng);
    sum += a.bits;
    sq += a.bits * a.bits;
    packets += static_cast<double>(a.packets.size());
    if (i < 1000) {
      double check = 0.0;
      for (const auto& p : a.packets) {
        check += p.bits;
        CHECK(p.arrival_s >= 0.0);
        CHECK(p.arrival_s < tau);
      }
      CHECK(check == a.bits);
    }
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(std::abs(mean / (spec.lambda_a * tau / spec.lambda_u) - 1.0) <= 0.005);
  CHECK(std::abs(packets / n - 2.5) <= 0.01);
  const double want_var = spec.lambda_a * tau * 2.0 / (spec.lambda_u * spec.lambda_u);
  CHECK(std::abs(var / want_var - 1.0) <= 0.02);
}

TEST_CASE("video traces and quality reduction") {
  CounterStream rng(6, StreamTag::Video, 0);
  const VideoTrace full = generate_video({}, 4000, rng);
  CHECK(std::abs(full.total_bits() / full.count() / 2e6 - 1.0) <= 0.01);
  CHECK(reduce_quality(full, 5).total_bits() == full.total_bits());
  const VideoTrace base = reduce_quality(full, 0);
  for (int i = 1; i <= 50; ++i) {
    CHECK(base.size(i) == full.segments[i - 1].base_bits);
    for (int l = 1; l <= 5; ++l) {
      const double up = reduce_quality(full, l).size(i);
      const double down = reduce_quality(full, l - 1).size(i);
      CHECK(up > down);
      CHECK(up - down == full.segments[i - 1].enh_bits[l - 1]);
    }
  }
  CHECK_THROWS(reduce_quality(full, 6));

  std::stringstream ss;
  VideoTrace small = full;
  small.segments.resize(6);
  write_video(ss, small);
  const VideoTrace back = read_video(ss);
  REQUIRE(back.count() == 6);
  for (int i = 1; i <= 6; ++i) CHECK(back.size(i) == small.size(i));
}

#include "doctest.h"
#include "oracles.hpp"

#include "predalloc/numerics.hpp"
#include "predalloc/random.hpp"

#include <cmath>
#include <numbers>

using namespace predalloc;
using namespace predalloc::numerics;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("E1 against frozen high-precision values") {
  // 30-digit reference values, rounded to double.
  const std::pair<double, double> table[] = {
      {1.0, 0.21938393439552027},      {0.5, 0.5597735947761608},
      {0.01, 4.037929576538114},       {0.3, 0.9056766516758467},
      {1.7, 0.07465464440125305},      {5.0, 0.0011482955912753258},
      {20.0, 9.83552529064988e-11},    {80.0, 2.2285432586884729e-37},
  };
  for (auto [x, want] : table) {
    CAPTURE(x);
    CHECK(rel(exp_integral_e1(x), want) <= 1e-12);
  }
}

TEST_CASE("E1 matches quadrature and decreases") {
  for (double x : {1e-6, 0.05, 0.7, 1.0, 1.3, 2.5, 9.0, 33.0}) {
    CAPTURE(x);
    CHECK(rel(exp_integral_e1(x), oracle::e1(x)) <= 1e-10);
    CHECK(rel(exp_integral_e1_scaled(x), std::exp(x) * oracle::e1(x)) <= 1e-10);
  }
  CHECK(exp_integral_e1(800.0) == doctest::Approx(0.0));
  CounterStream rng(11, StreamTag::Test, 1);
  for (int k = 0; k < 400; ++k) {
    const double x = std::exp(-8.0 + 12.0 * rng.uniform());
    const double y = x * (1.0 + 1e-3 + rng.uniform());
    CHECK(exp_integral_e1(y) < exp_integral_e1(x));
  }
}

TEST_CASE("E1 domain") {
  CHECK_THROWS_AS(exp_integral_e1(0.0), DomainError);
  CHECK_THROWS_AS(exp_integral_e1(-1.0), DomainError);
}

TEST_CASE("upper incomplete gamma") {
  CHECK(upper_incomplete_gamma(1.0, 2.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-15));
  CHECK(upper_incomplete_gamma(0.5, 0.0) ==
        doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-15));
  CHECK(rel(upper_incomplete_gamma(0.5, 1.0), 0.27880558528066198) <= 1e-12);

  const std::tuple<double, double, double> table[] = {
      {0.2, 0.001, 3.335109763038058},     {0.2, 1.5, 0.11654706525565213},
      {0.2, 3.0, 0.017000683162040364},    {0.7, 10.0, 2.21443812043421e-05},
      {0.05, 0.5, 0.5584532288271979},     {0.95, 2.2, 0.1047564725855764},
      {0.214, 40.0, 2.2948086038123017e-19},
  };
  for (auto [s, x, want] : table) {
    CAPTURE(s);
    CAPTURE(x);
    CHECK(rel(upper_incomplete_gamma(s, x), want) <= 1e-11);
  }
  for (double s : {0.1, 0.33, 0.8}) {
    for (double x : {0.0, 0.02, 0.9, 1.5, 4.0, 17.0}) {
      CAPTURE(s);
      CAPTURE(x);
      CHECK(rel(upper_incomplete_gamma(s, x), oracle::upper_gamma(s, x)) <= 1e-10);
      if (x > 0.0) {
        const double scaled = std::exp(x) * std::pow(x, -s) * oracle::upper_gamma(s, x);
        CHECK(rel(upper_incomplete_gamma_scaled(s, x), scaled) <= 1e-10);
      }
    }
  }
  CounterStream rng(12, StreamTag::Test, 2);
  for (int k = 0; k < 400; ++k) {
    const double s = 0.01 + 0.99 * rng.uniform();
    const double x = 20.0 * rng.uniform();
    const double y = x + 1e-3 + rng.uniform();
    CHECK(upper_incomplete_gamma(s, y) < upper_incomplete_gamma(s, x));
  }
  CHECK_THROWS_AS(upper_incomplete_gamma(1.5, 1.0), DomainError);
  CHECK_THROWS_AS(upper_incomplete_gamma(0.0, 1.0), DomainError);
  CHECK_THROWS_AS(upper_incomplete_gamma(0.5, -1.0), DomainError);
}

TEST_CASE("find_root examples") {
  const double r2 = find_root({[](double x) { return x * x - 2.0; }, 1.0, 2.0}, 1e-12);
  CHECK(r2 == doctest::Approx(std::sqrt(2.0)).epsilon(1e-11));
  const double ln2 = find_root({[](double x) { return std::exp(-x) - 0.5; }, 0.0, 2.0}, 1e-12);
  CHECK(ln2 == doctest::Approx(std::numbers::ln2).epsilon(1e-11));
  const double one =
      find_root({[](double x) { return exp_integral_e1(x) - 0.21938393; }, 0.5, 2.0}, 1e-12);
  CHECK(one == doctest::Approx(1.0).epsilon(1e-7));
  CHECK_THROWS_AS(find_root({[](double x) { return x * x + 1.0; }, -1.0, 1.0}, 1e-12),
                  BracketError);
  CHECK_THROWS_AS(find_root({[](double x) { return x; }, 1.0, -1.0}, 1e-12), BracketError);
}

TEST_CASE("find_root stays in bracket and is deterministic") {
  CounterStream rng(13, StreamTag::Test, 3);
  for (int k = 0; k < 200; ++k) {
    const double root = -5.0 + 10.0 * rng.uniform();
    const double lo = root - 0.01 - 3.0 * rng.uniform();
    const double hi = root + 0.01 + 3.0 * rng.uniform();
    auto f = [root](double x) { return std::tanh(x - root) + 0.1 * (x - root); };
    const double a = find_root({f, lo, hi}, 1e-12);
    const double b = find_root({f, lo, hi}, 1e-12);
    CHECK(a == b);
    CHECK(a >= lo);
    CHECK(a <= hi);
    CHECK(std::abs(a - root) <= 1e-10);
  }
}

TEST_CASE("minimize_convex: box LP") {
  ConvexProgram p = ConvexProgram::with_dimension(2);
  p.objective << 1.0, 1.0;
  p.box_lower = Eigen::VectorXd::Constant(2, -std::numeric_limits<double>::infinity());
  p.constraints.push_back(linear_constraint({0}, {1.0}, -1.0));
  p.constraints.push_back(linear_constraint({1}, {1.0}, -2.0));
  const SolverResult r = minimize_convex(p);
  REQUIRE(r.status == SolverStatus::Optimal);
  CHECK(r.objective == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(r.point[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.point[1] == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("minimize_convex: log constraint active") {
  ConvexProgram p = ConvexProgram::with_dimension(1);
  p.objective << 1.0;
  Constraint c;
  c.support = {0};
  c.value = [](const Eigen::VectorXd& x) { return std::log(x[0]); };
  c.derivatives = [](const Eigen::VectorXd& x, Eigen::VectorXd& g, Eigen::MatrixXd& h) {
    g.resize(1);
    g[0] = 1.0 / x[0];
    h.resize(1, 1);
    h(0, 0) = -1.0 / (x[0] * x[0]);
  };
  p.constraints.push_back(c);
  const SolverResult r = minimize_convex(p);
  REQUIRE(r.status == SolverStatus::Optimal);
  CHECK(r.point[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.kkt_residual <= 1e-6);
}

TEST_CASE("minimize_convex: known optimum of a disc problem") {
  // min x + 2y s.t. 1 - (x-1)^2 - (y-1)^2 >= 0 ; optimum 3 - sqrt(5).
  ConvexProgram p = ConvexProgram::with_dimension(2);
  p.objective << 1.0, 2.0;
  p.box_lower = Eigen::VectorXd::Constant(2, -std::numeric_limits<double>::infinity());
  Constraint c;
  c.support = {0, 1};
  c.value = [](const Eigen::VectorXd& x) {
    return 1.0 - (x[0] - 1.0) * (x[0] - 1.0) - (x[1] - 1.0) * (x[1] - 1.0);
  };
  c.derivatives = [](const Eigen::VectorXd& x, Eigen::VectorXd& g, Eigen::MatrixXd& h) {
    g.resize(2);
    g << -2.0 * (x[0] - 1.0), -2.0 * (x[1] - 1.0);
    h = -2.0 * Eigen::MatrixXd::Identity(2, 2);
  };
  p.constraints.push_back(c);
  const SolverResult r = minimize_convex(p);
  REQUIRE(r.status == SolverStatus::Optimal);
  CHECK(rel(r.objective, 3.0 - std::sqrt(5.0)) <= 1e-6);
  CHECK(max_violation(p, r.point) <= 1e-9);

  // Random-midpoint concavity of the accepted constraint.
  CounterStream rng(14, StreamTag::Test, 4);
  for (int k = 0; k < 1000; ++k) {
    Eigen::VectorXd x(2), y(2);
    x << 4.0 * rng.uniform() - 1.0, 4.0 * rng.uniform() - 1.0;
    y << 4.0 * rng.uniform() - 1.0, 4.0 * rng.uniform() - 1.0;
    CHECK(c.evaluate(0.5 * (x + y)) >= 0.5 * (c.evaluate(x) + c.evaluate(y)) - 1e-9);
  }
}

TEST_CASE("minimize_convex: finite-difference Hessian fallback") {
  ConvexProgram p = ConvexProgram::with_dimension(1);
  p.objective << 1.0;
  Constraint c;
  c.support = {0};
  c.value = [](const Eigen::VectorXd& x) { return std::sqrt(x[0]) - 2.0; };
  c.derivatives = [](const Eigen::VectorXd& x, Eigen::VectorXd& g, Eigen::MatrixXd& h) {
    g.resize(1);
    g[0] = 0.5 / std::sqrt(x[0]);
    h.resize(0, 0);
  };
  p.constraints.push_back(c);
  const SolverResult r = minimize_convex(p);
  REQUIRE(r.status == SolverStatus::Optimal);
  CHECK(r.objective == doctest::Approx(4.0).epsilon(1e-6));
}

TEST_CASE("minimize_convex: infeasible program is certified") {
  ConvexProgram p = ConvexProgram::with_dimension(1);
  p.objective << 1.0;
  p.box_lower << -std::numeric_limits<double>::infinity();
  p.constraints.push_back(linear_constraint({0}, {1.0}, -2.0));   // x >= 2
  p.constraints.push_back(linear_constraint({0}, {-1.0}, 1.0));   // x <= 1
  const SolverResult r = minimize_convex(p);
  CHECK(r.status == SolverStatus::Infeasible);
  CHECK(r.phase1_bound > 0.0);
}

TEST_CASE("minimize_convex: feasible start skips phase I and is deterministic") {
  ConvexProgram p = ConvexProgram::with_dimension(2);
  p.objective << 2.0, 1.0;
  p.constraints.push_back(linear_constraint({0, 1}, {1.0, 1.0}, -3.0));
  SolverOptions o;
  o.start = Eigen::Vector2d(5.0, 5.0);
  const SolverResult a = minimize_convex(p, o);
  const SolverResult b = minimize_convex(p, o);
  REQUIRE(a.status == SolverStatus::Optimal);
  CHECK(a.objective == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(a.point == b.point);
  CHECK(a.objective == b.objective);
}

TEST_CASE("check_gradient") {
  auto f = [](double x) { return x * x; };
  CHECK(check_gradient(f, [](double x) { return 2.0 * x; }, 3.0) <= 1e-6);
  CHECK(check_gradient(f, [](double x) { return 3.0 * x; }, 3.0) == doctest::Approx(0.5).epsilon(1e-6));
  auto fv = [](const Eigen::VectorXd& x) { return std::sin(x[0]) * std::exp(x[1]); };
  auto gv = [](const Eigen::VectorXd& x) {
    Eigen::VectorXd g(2);
    g << std::cos(x[0]) * std::exp(x[1]), std::sin(x[0]) * std::exp(x[1]);
    return g;
  };
  CHECK(check_gradient(fv, gv, Eigen::Vector2d(0.4, -0.3)) <= 1e-8);
}

TEST_CASE("quadrature helpers") {
  CHECK(integrate([](double x) { return std::sin(x); }, 0.0, std::numbers::pi) ==
        doctest::Approx(2.0).epsilon(1e-12));
  CHECK(integrate_to_infinity([](double x) { return std::exp(-x); }, 0.0) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

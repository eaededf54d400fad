#pragma once

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace predalloc::numerics {

/// Argument outside the mathematical domain of a function.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Root-finding bracket without a sign change.
class BracketError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Special functions
// ---------------------------------------------------------------------------

/// Exponential integral E1(x) = int_x^inf e^{-t}/t dt, x > 0.
double exp_integral_e1(double x);

/// e^{x} E1(x). Stays finite for large x where E1 itself underflows.
double exp_integral_e1_scaled(double x);

/// Non-normalised upper incomplete gamma Gamma(s, x) for 0 < s <= 1, x >= 0.
double upper_incomplete_gamma(double s, double x);

/// e^{x} x^{-s} Gamma(s, x) for x > 0; finite where Gamma(s, x) underflows.
double upper_incomplete_gamma_scaled(double s, double x);

/// Adaptive Gauss-Kronrod (7/15) quadrature on a finite interval.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-12);

/// Adaptive quadrature on [a, inf) through t = a + u / (1 - u).
double integrate_to_infinity(const std::function<double(double)>& f, double a,
                             double rel_tol = 1e-12);

// ---------------------------------------------------------------------------
// Root finding
// ---------------------------------------------------------------------------

struct BracketedFunction {
  std::function<double(double)> evaluator;
  double lo = 0.0;
  double hi = 1.0;
};

/// Bracketed root of f. The result lies in [lo, hi] and either |f(x)| <= tol
/// or the final bracket is no wider than tol.
double find_root(const BracketedFunction& f, double tol);

// ---------------------------------------------------------------------------
// Convex programs: minimise c'x s.t. concave g_j(x) >= 0, x >= box_lower
// ---------------------------------------------------------------------------

/// One concave inequality g(x) >= 0 that touches only the variables listed in
/// `support`. Both callbacks receive the gathered local vector x[support].
struct Constraint {
  std::vector<Eigen::Index> support;
  std::function<double(const Eigen::VectorXd&)> value;
  /// Fills the local gradient and, when available, the local Hessian. A
  /// Hessian left empty is replaced by finite differences of the gradient.
  std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&, Eigen::MatrixXd&)>
      derivatives;
  /// Typical magnitude of `value`; phase I and feasibility checks work on
  /// value / scale so that constraints in different units are comparable.
  double scale = 1.0;
  std::string label;

  double evaluate(const Eigen::VectorXd& x) const;
  Eigen::VectorXd gather(const Eigen::VectorXd& x) const;
};

/// Affine constraint offset + sum coeffs[k] * x[support[k]] >= 0.
Constraint linear_constraint(std::vector<Eigen::Index> support, std::vector<double> coeffs,
                             double offset, double scale = 1.0, std::string label = {});

struct ConvexProgram {
  Eigen::Index dimension = 0;
  Eigen::VectorXd objective;   ///< linear objective coefficients
  std::vector<Constraint> constraints;
  Eigen::VectorXd box_lower;   ///< -infinity disables the bound

  static ConvexProgram with_dimension(Eigen::Index n);
};

enum class SolverStatus { Optimal, Infeasible, MaxIterations };

const char* to_string(SolverStatus s);

struct SolverOptions {
  double gap_rel_tol = 1e-10;     ///< stop when m/t <= gap_rel_tol * max(|f|, gap_abs_floor)
  double gap_abs_floor = 1e-9;
  double kkt_tol = 1e-6;
  double barrier_growth = 20.0;
  int max_newton_steps = 3000;
  int max_centering_steps = 200;
  std::optional<Eigen::VectorXd> start;  ///< strictly feasible start, skips phase I when valid
};

struct SolverResult {
  SolverStatus status = SolverStatus::MaxIterations;
  Eigen::VectorXd point;
  double objective = std::numeric_limits<double>::quiet_NaN();
  double kkt_residual = std::numeric_limits<double>::infinity();
  double duality_gap = std::numeric_limits<double>::infinity();
  double phase1_bound = std::numeric_limits<double>::quiet_NaN();  ///< infeasibility certificate
  int newton_steps = 0;
};

/// Barrier interior-point method with a phase-I feasibility search.
SolverResult minimize_convex(const ConvexProgram& p, const SolverOptions& opts = {});

/// Largest violation max_j(-g_j(x)/scale_j, lb_i - x_i), clipped below at 0.
double max_violation(const ConvexProgram& p, const Eigen::VectorXd& x);

// ---------------------------------------------------------------------------
// Derivative checks
// ---------------------------------------------------------------------------

/// Max over coordinates of |g_i - d_i| / |d_i| where d is a Ridders-extrapolated
/// central difference of f at x.
double check_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                      const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& g,
                      const Eigen::VectorXd& x);

/// Scalar convenience overload.
double check_gradient(const std::function<double(double)>& f,
                      const std::function<double(double)>& g, double x);

/// Ridders central difference of a scalar function.
double ridders_derivative(const std::function<double(double)>& f, double x, double h0);

}  // namespace predalloc::numerics

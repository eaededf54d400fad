#include "predalloc/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace predalloc::numerics {

Eigen::VectorXd Constraint::gather(const Eigen::VectorXd& x) const {
  Eigen::VectorXd local(static_cast<Eigen::Index>(support.size()));
  for (std::size_t k = 0; k < support.size(); ++k) local[static_cast<Eigen::Index>(k)] = x[support[k]];
  return local;
}

double Constraint::evaluate(const Eigen::VectorXd& x) const { return value(gather(x)); }

Constraint linear_constraint(std::vector<Eigen::Index> support, std::vector<double> coeffs,
                             double offset, double scale, std::string label) {
  Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(coeffs.data(),
                                                        static_cast<Eigen::Index>(coeffs.size()));
  Constraint c;
  c.support = std::move(support);
  c.value = [a, offset](const Eigen::VectorXd& x) { return offset + a.dot(x); };
  c.derivatives = [a](const Eigen::VectorXd&, Eigen::VectorXd& g, Eigen::MatrixXd& h) {
    g = a;
    h = Eigen::MatrixXd::Zero(a.size(), a.size());
  };
  c.scale = scale;
  c.label = std::move(label);
  return c;
}

ConvexProgram ConvexProgram::with_dimension(Eigen::Index n) {
  ConvexProgram p;
  p.dimension = n;
  p.objective = Eigen::VectorXd::Zero(n);
  p.box_lower = Eigen::VectorXd::Zero(n);
  return p;
}

const char* to_string(SolverStatus s) {
  switch (s) {
    case SolverStatus::Optimal: return "Optimal";
    case SolverStatus::Infeasible: return "Infeasible";
    case SolverStatus::MaxIterations: return "MaxIterations";
  }
  return "?";
}

double max_violation(const ConvexProgram& p, const Eigen::VectorXd& x) {
  double worst = 0.0;
  for (const auto& c : p.constraints) worst = std::max(worst, -c.evaluate(x) / c.scale);
  for (Eigen::Index i = 0; i < p.dimension; ++i) {
    if (std::isfinite(p.box_lower[i])) worst = std::max(worst, p.box_lower[i] - x[i]);
  }
  return worst;
}

namespace {

void finite_difference_hessian(const Constraint& c, const Eigen::VectorXd& local,
                               Eigen::MatrixXd& hess) {
  const Eigen::Index d = local.size();
  hess.resize(d, d);
  Eigen::VectorXd gp, gm;
  Eigen::MatrixXd unused;
  for (Eigen::Index k = 0; k < d; ++k) {
    const double h = 1e-6 * std::max(std::abs(local[k]), 1e-6);
    Eigen::VectorXd xp = local, xm = local;
    xp[k] += h;
    xm[k] -= h;
    c.derivatives(xp, gp, unused);
    c.derivatives(xm, gm, unused);
    hess.col(k) = (gp - gm) / (2.0 * h);
  }
  hess = 0.5 * (hess + hess.transpose()).eval();
}

/// Log-barrier machinery for one program. Works on the potential
///   phi_t(x) = t c'x - sum log g_j(x) - sum log(x_i - lb_i).
class Barrier {
 public:
  explicit Barrier(const ConvexProgram& p) : p_(p) {
    for (Eigen::Index i = 0; i < p.dimension; ++i) {
      if (std::isfinite(p.box_lower[i])) ++boxed_;
    }
    terms_ = static_cast<int>(p.constraints.size()) + boxed_;
  }

  int terms() const { return terms_; }

  /// Constraint values, or false when x is not strictly interior.
  bool interior(const Eigen::VectorXd& x, std::vector<double>& values) const {
    for (Eigen::Index i = 0; i < p_.dimension; ++i) {
      if (std::isfinite(p_.box_lower[i]) && !(x[i] > p_.box_lower[i])) return false;
    }
    values.resize(p_.constraints.size());
    for (std::size_t j = 0; j < p_.constraints.size(); ++j) {
      const double v = p_.constraints[j].evaluate(x);
      if (!(v > 0.0) || !std::isfinite(v)) return false;
      values[j] = v;
    }
    return true;
  }

  /// phi_t(y) - phi_t(x) computed from ratios to avoid cancellation at large t.
  double potential_change(double t, const Eigen::VectorXd& x, const std::vector<double>& gx,
                          const Eigen::VectorXd& y, const std::vector<double>& gy) const {
    double delta = t * p_.objective.dot(y - x);
    for (std::size_t j = 0; j < gx.size(); ++j) delta -= std::log(gy[j] / gx[j]);
    for (Eigen::Index i = 0; i < p_.dimension; ++i) {
      const double lb = p_.box_lower[i];
      if (std::isfinite(lb)) delta -= std::log((y[i] - lb) / (x[i] - lb));
    }
    return delta;
  }

  void assemble(double t, const Eigen::VectorXd& x, const std::vector<double>& values,
                Eigen::VectorXd& grad, Eigen::MatrixXd& hess) const {
    const Eigen::Index n = p_.dimension;
    grad = t * p_.objective;
    hess.setZero(n, n);
    Eigen::VectorXd g;
    Eigen::MatrixXd h;
    for (std::size_t j = 0; j < p_.constraints.size(); ++j) {
      const auto& c = p_.constraints[j];
      const Eigen::VectorXd local = c.gather(x);
      g.resize(0);
      h.resize(0, 0);
      c.derivatives(local, g, h);
      if (h.size() == 0) finite_difference_hessian(c, local, h);
      const double v = values[j];
      const auto d = static_cast<Eigen::Index>(c.support.size());
      for (Eigen::Index a = 0; a < d; ++a) {
        const Eigen::Index ia = c.support[static_cast<std::size_t>(a)];
        grad[ia] -= g[a] / v;
        for (Eigen::Index b = 0; b < d; ++b) {
          const Eigen::Index ib = c.support[static_cast<std::size_t>(b)];
          hess(ia, ib) += g[a] * g[b] / (v * v) - h(a, b) / v;
        }
      }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      const double lb = p_.box_lower[i];
      if (!std::isfinite(lb)) continue;
      const double d = x[i] - lb;
      grad[i] -= 1.0 / d;
      hess(i, i) += 1.0 / (d * d);
    }
  }

 private:
  const ConvexProgram& p_;
  int boxed_ = 0;
  int terms_ = 0;
};

enum class CenterOutcome { Converged, EarlyStop, Stalled, Budget };

struct PathState {
  Eigen::VectorXd x;
  std::vector<double> values;
  double t = 1.0;
  int newton_steps = 0;
  double last_decrement = std::numeric_limits<double>::infinity();
};

template <typename Stop>
CenterOutcome center(const Barrier& barrier, PathState& s, const SolverOptions& opts, Stop&& stop) {
  Eigen::VectorXd grad, dx, trial;
  Eigen::MatrixXd hess;
  std::vector<double> trial_values;
  for (int k = 0; k < opts.max_centering_steps; ++k) {
    if (s.newton_steps >= opts.max_newton_steps) return CenterOutcome::Budget;
    barrier.assemble(s.t, s.x, s.values, grad, hess);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
    dx = ldlt.solve(-grad);
    double decrement = -grad.dot(dx);
    if (ldlt.info() != Eigen::Success || !dx.allFinite() || !(decrement > 0.0) ||
        !ldlt.isPositive()) {
      const double shift = 1e-10 * std::max(hess.diagonal().cwiseAbs().maxCoeff(), 1e-300);
      hess.diagonal().array() += shift;
      Eigen::LDLT<Eigen::MatrixXd> regular(hess);
      dx = regular.solve(-grad);
      decrement = -grad.dot(dx);
      if (!dx.allFinite() || !(decrement > 0.0)) return CenterOutcome::Stalled;
    }
    s.last_decrement = decrement;
    if (0.5 * decrement <= 1e-11) return CenterOutcome::Converged;

    double step = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 80; ++ls) {
      trial = s.x + step * dx;
      if (barrier.interior(trial, trial_values)) {
        const double change = barrier.potential_change(s.t, s.x, s.values, trial, trial_values);
        if (change <= -0.25 * step * decrement) {
          accepted = true;
          break;
        }
      }
      step *= 0.5;
    }
    // Near the centre the potential change drowns in rounding of the constraint
    // values; a small decrement there means the point is already centred.
    if (!accepted) return 0.5 * decrement <= 1e-6 ? CenterOutcome::Converged : CenterOutcome::Stalled;
    s.x = trial;
    s.values = trial_values;
    ++s.newton_steps;
    if (stop(s)) return CenterOutcome::EarlyStop;
  }
  return CenterOutcome::Converged;
}

// Newton decrement lambda^2 at the last centring step over t: bounds how far the
// barrier minimiser sits from the iterate in objective units.
double centring_error(const PathState& s) { return s.last_decrement / s.t; }

Eigen::VectorXd default_start(const ConvexProgram& p) {
  Eigen::VectorXd x(p.dimension);
  for (Eigen::Index i = 0; i < p.dimension; ++i) {
    x[i] = std::isfinite(p.box_lower[i]) ? p.box_lower[i] + 1.0 : 0.0;
  }
  return x;
}

bool strictly_inside_box(const ConvexProgram& p, const Eigen::VectorXd& x) {
  for (Eigen::Index i = 0; i < p.dimension; ++i) {
    if (std::isfinite(p.box_lower[i]) && !(x[i] > p.box_lower[i])) return false;
  }
  return true;
}

// Phase I: minimise s subject to g_j(x)/scale_j + s >= 0 inside the box.
struct PhaseOne {
  SolverStatus status = SolverStatus::MaxIterations;
  Eigen::VectorXd x;
  double bound = std::numeric_limits<double>::quiet_NaN();
  int newton_steps = 0;
};

PhaseOne phase_one(const ConvexProgram& p, Eigen::VectorXd x0, const SolverOptions& opts) {
  const Eigen::Index n = p.dimension;
  ConvexProgram aux = ConvexProgram::with_dimension(n + 1);
  aux.objective[n] = 1.0;
  aux.box_lower.head(n) = p.box_lower;
  aux.box_lower[n] = -std::numeric_limits<double>::infinity();

  double s0 = 0.0;
  for (const auto& c : p.constraints) {
    Constraint lifted;
    lifted.support = c.support;
    lifted.support.push_back(n);
    const double scale = c.scale;
    const auto d = static_cast<Eigen::Index>(c.support.size());
    lifted.value = [&c, scale, d](const Eigen::VectorXd& local) {
      return c.value(local.head(d)) / scale + local[d];
    };
    lifted.derivatives = [&c, scale, d](const Eigen::VectorXd& local, Eigen::VectorXd& g,
                                        Eigen::MatrixXd& h) {
      Eigen::VectorXd inner_g;
      Eigen::MatrixXd inner_h;
      c.derivatives(local.head(d), inner_g, inner_h);
      g.resize(d + 1);
      g.head(d) = inner_g / scale;
      g[d] = 1.0;
      if (inner_h.size() == 0) {
        h.resize(0, 0);
        return;
      }
      h = Eigen::MatrixXd::Zero(d + 1, d + 1);
      h.topLeftCorner(d, d) = inner_h / scale;
    };
    lifted.scale = 1.0;
    aux.constraints.push_back(std::move(lifted));
    const double v = c.evaluate(x0) / c.scale;
    s0 = std::max(s0, std::isfinite(v) ? -v : 1e6);
  }

  PathState s;
  s.x.resize(n + 1);
  s.x.head(n) = x0;
  s.x[n] = s0 + 1.0;
  Barrier barrier(aux);
  PhaseOne out;
  if (!barrier.interior(s.x, s.values)) {
    out.status = SolverStatus::MaxIterations;
    return out;
  }
  s.t = barrier.terms() / std::max(std::abs(s.x[n]), 1e-3);

  std::vector<double> scratch;
  auto feasible_now = [&](const PathState& st) {
    if (!(st.x[n] < 0.0)) return false;
    for (const auto& c : p.constraints) {
      if (!(c.evaluate(st.x.head(n)) > 0.0)) return false;
    }
    return true;
  };

  for (int outer = 0; outer < 200; ++outer) {
    const CenterOutcome oc = center(barrier, s, opts, feasible_now);
    out.newton_steps = s.newton_steps;
    if (oc == CenterOutcome::EarlyStop || feasible_now(s)) {
      out.status = SolverStatus::Optimal;
      out.x = s.x.head(n);
      out.bound = s.x[n];
      return out;
    }
    const double gap = barrier.terms() / s.t;
    out.bound = s.x[n] - gap;
    if (out.bound > 0.0) {
      out.status = SolverStatus::Infeasible;
      return out;
    }
    if (gap < 1e-13 || oc == CenterOutcome::Budget) {
      // Optimum of phase I sits at ~0: the feasible set has no interior.
      out.status = s.x[n] >= 0.0 && oc != CenterOutcome::Budget ? SolverStatus::Infeasible
                                                                 : SolverStatus::MaxIterations;
      return out;
    }
    s.t *= opts.barrier_growth;
  }
  return out;
}

}  // namespace

SolverResult minimize_convex(const ConvexProgram& p, const SolverOptions& opts) {
  SolverResult result;
  Barrier barrier(p);
  PathState s;

  std::vector<double> values;
  bool have_start = false;
  if (opts.start && opts.start->size() == p.dimension && barrier.interior(*opts.start, values)) {
    s.x = *opts.start;
    have_start = true;
  }
  if (!have_start) {
    Eigen::VectorXd x0 = (opts.start && opts.start->size() == p.dimension &&
                          strictly_inside_box(p, *opts.start))
                             ? *opts.start
                             : default_start(p);
    const PhaseOne ph = phase_one(p, x0, opts);
    result.phase1_bound = ph.bound;
    result.newton_steps = ph.newton_steps;
    if (ph.status != SolverStatus::Optimal) {
      result.status = ph.status;
      return result;
    }
    s.x = ph.x;
  }
  if (!barrier.interior(s.x, s.values)) {
    result.status = SolverStatus::MaxIterations;
    return result;
  }
  s.newton_steps = result.newton_steps;

  const double f0 = p.objective.dot(s.x);
  s.t = barrier.terms() > 0 ? barrier.terms() / std::max(std::abs(f0), 1e-6) : 1.0;
  auto never = [](const PathState&) { return false; };

  // Iterates whose KKT residual is within tolerance are kept; at very large t the
  // constraint values lose relative precision and later iterates can be worse.
  std::optional<SolverResult> best;
  for (int outer = 0; outer < 200; ++outer) {
    const CenterOutcome oc = center(barrier, s, opts, never);
    SolverResult cur;
    cur.point = s.x;
    cur.objective = p.objective.dot(s.x);
    cur.duality_gap = barrier.terms() / s.t;
    cur.newton_steps = s.newton_steps;
    cur.phase1_bound = result.phase1_bound;
    const double complementarity =
        cur.duality_gap / std::max(std::abs(cur.objective), opts.gap_abs_floor);
    cur.kkt_residual = std::max(
        centring_error(s) / std::max(std::abs(cur.objective), opts.gap_abs_floor), complementarity);
    const double target =
        opts.gap_rel_tol * std::max(std::abs(cur.objective), opts.gap_abs_floor);
    if (barrier.terms() == 0 || cur.kkt_residual <= opts.kkt_tol) {
      cur.status = SolverStatus::Optimal;
      best = cur;
      if (barrier.terms() == 0 || cur.duality_gap <= target) return cur;
    } else if (best && (cur.duality_gap <= target || oc == CenterOutcome::Stalled)) {
      return *best;
    }
    result = cur;
    if (oc == CenterOutcome::Budget) break;
    s.t *= opts.barrier_growth;
  }
  if (best) return *best;
  result.status = SolverStatus::MaxIterations;
  return result;
}

}  // namespace predalloc::numerics

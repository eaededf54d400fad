#include "predalloc/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

namespace predalloc::planner {

using numerics::Constraint;
using numerics::ConvexProgram;
using numerics::SolverStatus;

const char* to_string(Policy p) {
  switch (p) {
    case Policy::Optimal: return "optimal";
    case Policy::OptimalAdjusted: return "optimal-adjusted";
    case Policy::Heuristic: return "heuristic";
    case Policy::Baseline1: return "baseline1";
    case Policy::Baseline2: return "baseline2";
    case Policy::Baseline3: return "baseline3";
  }
  return "?";
}

std::optional<Policy> parse_policy(std::string_view name) {
  for (Policy p : {Policy::Optimal, Policy::OptimalAdjusted, Policy::Heuristic,
                   Policy::Baseline1, Policy::Baseline2, Policy::Baseline3}) {
    if (name == to_string(p)) return p;
  }
  return std::nullopt;
}

void Limits::validate() const {
  if (!(p_ave_w > 0.0)) throw std::invalid_argument("radio.p_max must be positive");
  if (!(k_max >= 1.0)) throw std::invalid_argument("radio.k_max must be at least 1");
  if (!(p_c_w >= 0.0)) throw std::invalid_argument("radio.p_c must be nonnegative");
  if (!(p_0_w >= 0.0)) throw std::invalid_argument("radio.p_0 must be nonnegative");
  if (!(rho > 0.0 && rho <= 1.0)) throw std::invalid_argument("radio.rho must lie in (0, 1]");
  if (!(frame_s > 0.0)) throw std::invalid_argument("window.frame_s must be positive");
  if (!(slot_s > 0.0 && slot_s <= frame_s)) {
    throw std::invalid_argument("window.slot_s must lie in (0, frame_s]");
  }
}

const channel::LargeScaleTrace& PlanningInputs::trace(int user) const {
  const int md = static_cast<int>(vod.size());
  return user < md ? vod.at(user).trace : rt.at(user - md).trace;
}

void PlanningInputs::validate() const {
  limits.validate();
  if (frames < 1) throw std::invalid_argument("planning window needs at least one frame");
  if (num_bs < 1) throw std::invalid_argument("planning needs at least one BS");
  for (int u = 0; u < users(); ++u) {
    const auto& t = trace(u);
    if (t.frames() < frames || static_cast<int>(t.bs.size()) < frames) {
      throw std::invalid_argument("user trace shorter than the planning window");
    }
    for (int f = 0; f < frames; ++f) {
      if (!(t.alpha[f] > 0.0)) throw std::invalid_argument("large-scale gains must be positive");
      if (t.bs[f] < 0 || t.bs[f] >= num_bs) throw std::invalid_argument("BS index out of range");
    }
  }
  for (const auto& v : vod) {
    if (v.video.count() < frames + 1) {
      throw std::invalid_argument("video trace needs N_L + 1 segments per window");
    }
  }
  for (const auto& r : rt) {
    if (!(r.eb_bps > 0.0) || !(r.qos.theta > 0.0) || !(r.qos.beta > 0.0)) {
      throw std::invalid_argument("RT user needs positive theta, beta and effective bandwidth");
    }
  }
}

std::vector<std::vector<std::vector<int>>> association_sets(const PlanningInputs& in) {
  std::vector<std::vector<std::vector<int>>> sets(
      in.frames, std::vector<std::vector<int>>(in.num_bs));
  for (int u = 0; u < in.users(); ++u) {
    const auto& t = in.trace(u);
    for (int f = 0; f < in.frames; ++f) sets[f][t.bs[f]].push_back(u);
  }
  return sets;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// h(P, K) = K f(P / K) for one (user, frame) in the solver's scaled variables
// x_P = P / P_ave, x_K = K / K_max. The last evaluation is cached because every
// constraint containing the term evaluates it at the same point.
class Term {
 public:
  Term(link::ServiceKind kind, link::LinkParams p, double beta, double theta, double slot_s,
       double p_scale, double k_scale)
      : kind_(kind), p_(p), beta_(beta), theta_(theta), slot_s_(slot_s),
        p_scale_(p_scale), k_scale_(k_scale) {}

  const link::PerspectiveEval& eval(double xp, double xk) const {
    if (xp == last_xp_ && xk == last_xk_) return last_;
    const double P = xp * p_scale_;
    const double K = xk * k_scale_;
    link::PerspectiveEval e;
    if (P > 0.0 && K > 0.0) {
      const link::ScalarDerivs d =
          kind_ == link::ServiceKind::VoD
              ? link::vod_rate_derivs(P / K, p_)
              : link::rt_capacity_derivs(P / K, beta_, theta_, slot_s_, p_);
      e = link::perspective(d, P, K);
      const double s[2] = {p_scale_, k_scale_};
      for (int a = 0; a < 2; ++a) {
        e.grad[a] *= s[a];
        for (int b = 0; b < 2; ++b) e.hess[a][b] *= s[a] * s[b];
      }
    }
    last_xp_ = xp;
    last_xk_ = xk;
    last_ = e;
    return last_;
  }

 private:
  link::ServiceKind kind_;
  link::LinkParams p_;
  double beta_, theta_, slot_s_, p_scale_, k_scale_;
  mutable double last_xp_ = kNaN;
  mutable double last_xk_ = kNaN;
  mutable link::PerspectiveEval last_;
};

// Assembles one planning program. Each (user, frame) that appears in a floor
// gets the variable pair (x_P, x_K).
class Builder {
 public:
  explicit Builder(const PlanningInputs& in) : in_(in) {}

  void add_floor(const std::vector<std::pair<int, int>>& cells, double demand, std::string label) {
    std::vector<std::shared_ptr<Term>> terms;
    Constraint c;
    for (auto [u, f] : cells) {
      const Eigen::Index v = var(u, f);
      c.support.push_back(v);
      c.support.push_back(v + 1);
      terms.push_back(term_[{u, f}]);
    }
    const double inv = 1.0 / demand;
    c.value = [terms, inv](const Eigen::VectorXd& x) {
      double sum = 0.0;
      for (std::size_t k = 0; k < terms.size(); ++k) {
        sum += terms[k]->eval(x[2 * k], x[2 * k + 1]).value;
      }
      return sum * inv - 1.0;
    };
    c.derivatives = [terms, inv](const Eigen::VectorXd& x, Eigen::VectorXd& g,
                                 Eigen::MatrixXd& h) {
      const auto n = x.size();
      g.setZero(n);
      h.setZero(n, n);
      for (std::size_t k = 0; k < terms.size(); ++k) {
        const auto i = static_cast<Eigen::Index>(2 * k);
        const auto& e = terms[k]->eval(x[i], x[i + 1]);
        for (int a = 0; a < 2; ++a) {
          g[i + a] = e.grad[a] * inv;
          for (int b = 0; b < 2; ++b) h(i + a, i + b) = e.hess[a][b] * inv;
        }
      }
    };
    c.label = std::move(label);
    floors_.push_back(std::move(c));
  }

  // Per-BS per-frame caps over the variables present, then the solve.
  struct Solved {
    numerics::SolverResult result;
    std::map<std::pair<int, int>, Allocation> alloc;
  };

  Solved solve() {
    ConvexProgram p = ConvexProgram::with_dimension(next_);
    const Limits& l = in_.limits;
    for (const auto& [key, v] : index_) {
      p.objective[v] = l.p_ave_w / l.rho;
      p.objective[v + 1] = l.p_c_w * l.k_max;
    }
    p.constraints = floors_;
    std::map<std::pair<int, int>, std::vector<Eigen::Index>> groups;
    for (const auto& [key, v] : index_) {
      const int f = key.second;
      groups[{f, in_.trace(key.first).bs[f]}].push_back(v);
    }
    Eigen::VectorXd start(next_);
    for (const auto& [g, vars] : groups) {
      std::vector<Eigen::Index> ps, ks;
      for (auto v : vars) {
        ps.push_back(v);
        ks.push_back(v + 1);
        start[v] = 0.5 / static_cast<double>(vars.size());
        start[v + 1] = 0.5 / static_cast<double>(vars.size());
      }
      const std::string tag = "frame " + std::to_string(g.first) + " bs " + std::to_string(g.second);
      p.constraints.push_back(numerics::linear_constraint(
          ps, std::vector<double>(ps.size(), -1.0), 1.0, 1.0, "power cap " + tag));
      p.constraints.push_back(numerics::linear_constraint(
          ks, std::vector<double>(ks.size(), -1.0), 1.0, 1.0, "subcarrier cap " + tag));
    }
    numerics::SolverOptions opts = in_.solver;
    if (!opts.start) opts.start = start;
    Solved out;
    out.result = next_ > 0 ? numerics::minimize_convex(p, opts) : numerics::SolverResult{};
    if (next_ == 0) {
      out.result.status = SolverStatus::Optimal;
      out.result.objective = 0.0;
      out.result.kkt_residual = 0.0;
    }
    if (out.result.point.size() == next_) {
      for (const auto& [key, v] : index_) {
        out.alloc[key] = {out.result.point[v] * l.p_ave_w, out.result.point[v + 1] * l.k_max};
      }
    }
    return out;
  }

 private:
  Eigen::Index var(int u, int f) {
    auto it = index_.find({u, f});
    if (it != index_.end()) return it->second;
    const Eigen::Index v = next_;
    next_ += 2;
    index_[{u, f}] = v;
    link::LinkParams p = in_.link;
    p.alpha = in_.trace(u).alpha[f];
    const int md = static_cast<int>(in_.vod.size());
    const bool rt = u >= md;
    const double beta = rt ? in_.rt[u - md].qos.beta : 0.0;
    const double theta = rt ? in_.rt[u - md].qos.theta : 0.0;
    term_[{u, f}] = std::make_shared<Term>(rt ? link::ServiceKind::RT : link::ServiceKind::VoD,
                                           p, beta, theta, in_.limits.slot_s,
                                           in_.limits.p_ave_w, in_.limits.k_max);
    return v;
  }

  const PlanningInputs& in_;
  Eigen::Index next_ = 0;
  std::map<std::pair<int, int>, Eigen::Index> index_;
  std::map<std::pair<int, int>, std::shared_ptr<Term>> term_;
  std::vector<Constraint> floors_;
};

// (1/dT) sum_{s=2}^{l+2} R_s for 0-based frame l.
double cumulative_demand(const traffic::VideoTrace& v, int l, double frame_s) {
  double d = 0.0;
  for (int s = 2; s <= l + 2; ++s) d += v.size(s);
  return d / frame_s;
}

bool usable(const numerics::SolverResult& r) {
  return r.status == SolverStatus::Optimal;
}

void fill_slack(const PlanningInputs& in, WindowPlan& plan) {
  plan.power_slack.assign(in.frames, std::vector<double>(in.num_bs, in.limits.p_ave_w));
  plan.subcarrier_slack.assign(in.frames, std::vector<double>(in.num_bs, in.limits.k_max));
  for (int u = 0; u < in.users(); ++u) {
    for (int f = 0; f < in.frames; ++f) {
      const int b = in.trace(u).bs[f];
      plan.power_slack[f][b] -= plan.alloc[u][f].power_w;
      plan.subcarrier_slack[f][b] -= plan.alloc[u][f].subcarriers;
    }
  }
}

double plan_objective(const Limits& l, const std::vector<std::vector<Allocation>>& alloc) {
  double obj = 0.0;
  for (const auto& row : alloc) {
    for (const auto& a : row) obj += a.power_w / l.rho + l.p_c_w * a.subcarriers;
  }
  return obj;
}

WindowPlan window_program(const PlanningInputs& in) {
  in.validate();
  Builder b(in);
  const int md = static_cast<int>(in.vod.size());
  for (int m = 0; m < md; ++m) {
    std::vector<std::pair<int, int>> cells;
    for (int l = 0; l < in.frames; ++l) {
      cells.emplace_back(m, l);
      b.add_floor(cells, cumulative_demand(in.vod[m].video, l, in.limits.frame_s),
                  "vod " + std::to_string(m) + " frame " + std::to_string(l));
    }
  }
  for (std::size_t r = 0; r < in.rt.size(); ++r) {
    const int u = md + static_cast<int>(r);
    for (int f = 0; f < in.frames; ++f) {
      b.add_floor({{u, f}}, in.rt[r].eb_bps, "rt " + std::to_string(u) + " frame " + std::to_string(f));
    }
  }
  auto solved = b.solve();
  WindowPlan plan;
  plan.frames = in.frames;
  plan.status = solved.result.status;
  plan.feasible = usable(solved.result);
  plan.alloc.assign(in.users(), std::vector<Allocation>(in.frames));
  if (plan.feasible) {
    for (const auto& [key, a] : solved.alloc) plan.alloc[key.first][key.second] = a;
  }
  plan.objective = plan_objective(in.limits, plan.alloc);
  fill_slack(in, plan);
  if (!in.vod.empty()) plan.quality_level = in.vod.front().video.level;
  return plan;
}

}  // namespace

WindowPlan plan_optimal_window(const PlanningInputs& in) { return window_program(in); }

FramePlan solve_frame_program(const PlanningInputs& in, int frame,
                              std::span<const double> vod_rates_bps) {
  in.validate();
  if (frame < 0 || frame >= in.frames) throw std::out_of_range("frame outside the window");
  if (vod_rates_bps.size() != in.vod.size()) {
    throw std::invalid_argument("one VoD rate floor per VoD user required");
  }
  Builder b(in);
  const int md = static_cast<int>(in.vod.size());
  for (int m = 0; m < md; ++m) {
    if (vod_rates_bps[m] > 0.0) b.add_floor({{m, frame}}, vod_rates_bps[m], "vod " + std::to_string(m));
  }
  for (std::size_t r = 0; r < in.rt.size(); ++r) {
    const int u = md + static_cast<int>(r);
    b.add_floor({{u, frame}}, in.rt[r].eb_bps, "rt " + std::to_string(u));
  }
  auto solved = b.solve();
  FramePlan plan;
  plan.status = solved.result.status;
  plan.feasible = usable(solved.result);
  plan.alloc.assign(in.users(), Allocation{});
  if (plan.feasible) {
    for (const auto& [key, a] : solved.alloc) plan.alloc[key.first] = a;
  }
  for (const auto& a : plan.alloc) {
    plan.objective += a.power_w / in.limits.rho + in.limits.p_c_w * a.subcarriers;
  }
  return plan;
}

FramePlan plan_rt_per_frame(const PlanningInputs& in, int frame) {
  const std::vector<double> none(in.vod.size(), 0.0);
  FramePlan plan = solve_frame_program(in, frame, none);
  if (!plan.feasible) {
    throw AdmissionError("RT users cannot be served in frame " + std::to_string(frame));
  }
  return plan;
}

SegmentDecision heuristic_segment_decision(const HeuristicState& s, double alpha,
                                           const traffic::VideoTrace& video, int frame,
                                           double frame_s, int max_segments) {
  const int i = frame + 1;  // segment played in this frame
  const int last = video.count();
  SegmentDecision d;
  d.last_sent = s.last_sent;
  d.good_channel = alpha >= s.alpha_med;
  // Segments that must arrive in this frame to keep playback going.
  const int needed = (s.last_sent <= i && i + 1 <= last) ? i + 1 - s.last_sent : 0;
  int count = 0;
  if (d.good_channel) {
    const double played = video.size(i);
    double extra = 0.0;
    for (int k = 1; k <= std::min(max_segments, 2); ++k) {
      if (s.last_sent + k > last) break;
      extra += video.size(s.last_sent + k);
      if (s.queue_bits + extra - played <= s.q_max_bits) count = k;
      else break;
    }
  }
  count = std::max(count, needed);
  for (int k = 1; k <= count; ++k) d.rate_bps += video.size(s.last_sent + k);
  d.rate_bps /= frame_s;
  d.segments = count;
  d.last_sent = s.last_sent + count;
  return d;
}

HeuristicFrame plan_heuristic_frame(const PlanningInputs& in, int frame,
                                    std::span<const HeuristicState> states) {
  if (states.size() != in.vod.size()) throw std::invalid_argument("one heuristic state per VoD user");
  HeuristicFrame out;
  std::vector<double> rates(in.vod.size());
  for (int cap = 2; cap >= 0; --cap) {
    out.decisions.clear();
    for (std::size_t m = 0; m < in.vod.size(); ++m) {
      out.decisions.push_back(heuristic_segment_decision(states[m], in.vod[m].trace.alpha[frame],
                                                         in.vod[m].video, frame,
                                                         in.limits.frame_s, cap));
      rates[m] = out.decisions.back().rate_bps;
    }
    out.plan = solve_frame_program(in, frame, rates);
    if (out.plan.feasible) break;
  }
  return out;
}

FramePlan baseline1_frame(const PlanningInputs& in, int frame) {
  std::vector<double> rates(in.vod.size(), 0.0);
  for (std::size_t m = 0; m < in.vod.size(); ++m) {
    const auto& v = in.vod[m].video;
    if (frame + 2 <= v.count()) rates[m] = v.size(frame + 2) / in.limits.frame_s;
  }
  return solve_frame_program(in, frame, rates);
}

WindowPlan baseline2_plan(const PlanningInputs& in, double edge_gain) {
  if (!(edge_gain > 0.0)) throw std::invalid_argument("cell-edge gain must be positive");
  PlanningInputs worst = in;
  for (auto& r : worst.rt) {
    for (auto& a : r.trace.alpha) a = edge_gain;
  }
  return window_program(worst);
}

WindowPlan baseline3_plan(const PlanningInputs& in) {
  in.validate();
  const Limits& l = in.limits;
  const double ps = baseline3_subcarrier_power(l);
  const int md = static_cast<int>(in.vod.size());
  const int users = in.users();
  const Eigen::Index n = static_cast<Eigen::Index>(users) * in.frames;
  auto var = [&](int u, int f) { return static_cast<Eigen::Index>(u) * in.frames + f; };
  ConvexProgram p = ConvexProgram::with_dimension(n);
  p.objective.setConstant(l.k_max * (ps / l.rho + l.p_c_w));

  // Per-subcarrier service at the fixed power: F_D for VoD, -ln F_R / (theta tau) for RT.
  auto per_subcarrier = [&](int u, int f) {
    link::LinkParams lp = in.link;
    lp.alpha = in.trace(u).alpha[f];
    if (u < md) return link::vod_F(ps, lp);
    const auto& r = in.rt[u - md];
    return link::effective_capacity(ps, 1.0, r.qos.beta, r.qos.theta, l.slot_s, lp);
  };
  for (int m = 0; m < md; ++m) {
    std::vector<Eigen::Index> sup;
    std::vector<double> coef;
    for (int f = 0; f < in.frames; ++f) {
      const double d = cumulative_demand(in.vod[m].video, f, l.frame_s);
      sup.push_back(var(m, f));
      coef.push_back(0.0);
      for (int k = 0; k <= f; ++k) coef[k] = per_subcarrier(m, k) * l.k_max;
      std::vector<double> scaled(coef);
      for (double& c : scaled) c /= d;
      p.constraints.push_back(numerics::linear_constraint(sup, scaled, -1.0));
    }
  }
  for (int u = md; u < users; ++u) {
    for (int f = 0; f < in.frames; ++f) {
      const double c = per_subcarrier(u, f) * l.k_max / in.rt[u - md].eb_bps;
      p.constraints.push_back(numerics::linear_constraint({var(u, f)}, {c}, -1.0));
    }
  }
  const auto sets = association_sets(in);
  Eigen::VectorXd start(n);
  for (int f = 0; f < in.frames; ++f) {
    for (const auto& members : sets[f]) {
      if (members.empty()) continue;
      std::vector<Eigen::Index> sup;
      for (int u : members) {
        sup.push_back(var(u, f));
        start[var(u, f)] = 0.5 / static_cast<double>(members.size());
      }
      p.constraints.push_back(
          numerics::linear_constraint(sup, std::vector<double>(sup.size(), -1.0), 1.0));
    }
  }
  numerics::SolverOptions opts = in.solver;
  if (!opts.start) opts.start = start;
  const auto res = n > 0 ? numerics::minimize_convex(p, opts) : numerics::SolverResult{};

  WindowPlan plan;
  plan.frames = in.frames;
  plan.status = n > 0 ? res.status : SolverStatus::Optimal;
  plan.feasible = n == 0 || usable(res);
  plan.alloc.assign(users, std::vector<Allocation>(in.frames));
  if (plan.feasible && n > 0) {
    for (int u = 0; u < users; ++u) {
      for (int f = 0; f < in.frames; ++f) {
        const double k = res.point[var(u, f)] * l.k_max;
        plan.alloc[u][f] = {k * ps, k};
      }
    }
  }
  plan.objective = plan_objective(l, plan.alloc);
  fill_slack(in, plan);
  if (!in.vod.empty()) plan.quality_level = in.vod.front().video.level;
  return plan;
}

double window_violation(const PlanningInputs& in, const WindowPlan& plan) {
  const int md = static_cast<int>(in.vod.size());
  double worst = 0.0;
  auto rate = [&](int u, int f) {
    link::LinkParams lp = in.link;
    lp.alpha = in.trace(u).alpha[f];
    const Allocation& a = plan.alloc[u][f];
    if (u < md) return link::vod_avg_rate(a.power_w, a.subcarriers, lp);
    const auto& r = in.rt[u - md];
    return link::effective_capacity(a.power_w, a.subcarriers, r.qos.beta, r.qos.theta,
                                    in.limits.slot_s, lp);
  };
  for (int m = 0; m < md; ++m) {
    double cum = 0.0;
    for (int f = 0; f < in.frames; ++f) {
      cum += rate(m, f);
      const double d = cumulative_demand(in.vod[m].video, f, in.limits.frame_s);
      worst = std::max(worst, 1.0 - cum / d);
    }
  }
  for (int u = md; u < in.users(); ++u) {
    for (int f = 0; f < in.frames; ++f) {
      worst = std::max(worst, 1.0 - rate(u, f) / in.rt[u - md].eb_bps);
    }
  }
  std::vector<std::vector<double>> ps(in.frames, std::vector<double>(in.num_bs, 0.0));
  auto ks = ps;
  for (int u = 0; u < in.users(); ++u) {
    for (int f = 0; f < in.frames; ++f) {
      const Allocation& a = plan.alloc[u][f];
      worst = std::max({worst, -a.power_w, -a.subcarriers});
      ps[f][in.trace(u).bs[f]] += a.power_w;
      ks[f][in.trace(u).bs[f]] += a.subcarriers;
    }
  }
  for (int f = 0; f < in.frames; ++f) {
    for (int b = 0; b < in.num_bs; ++b) {
      worst = std::max(worst, ps[f][b] / in.limits.p_ave_w - 1.0);
      worst = std::max(worst, ks[f][b] / in.limits.k_max - 1.0);
    }
  }
  return std::max(worst, 0.0);
}

void write_plan(std::ostream& out, std::string_view policy, const WindowPlan& plan) {
  out << "policy,user,frame,power_w,subcarriers,quality_level\n";
  std::ostringstream line;
  line.precision(17);
  for (std::size_t u = 0; u < plan.alloc.size(); ++u) {
    for (std::size_t f = 0; f < plan.alloc[u].size(); ++f) {
      line.str({});
      line << policy << ',' << u << ',' << f << ',' << plan.alloc[u][f].power_w << ','
           << plan.alloc[u][f].subcarriers << ',' << plan.quality_level << '\n';
      out << line.str();
    }
  }
}

}  // namespace predalloc::planner

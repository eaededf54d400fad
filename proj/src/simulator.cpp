#include "predalloc/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <stdexcept>

namespace predalloc::sim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Bits of slack when comparing delivered against required amounts.
constexpr double kBitTol = 1.0;
// Planner outputs below these are barrier residue, not allocations.
constexpr double kMinSubcarriers = 1e-6;
constexpr double kMinPower = 1e-15;

// Per-subcarrier service at P_S: average rate (VoD) or effective capacity (RT).
double per_subcarrier(bool rt, double ps, const traffic::QoSExponent& q, double slot_s,
                      const link::LinkParams& lp) {
  return rt ? link::effective_capacity(ps, 1.0, q.beta, q.theta, slot_s, lp) : link::vod_F(ps, lp);
}

// Power on k subcarriers carrying the service the plan expected from (P, K).
double matched_power(bool rt, const planner::Allocation& a, int k, const traffic::QoSExponent& q,
                     double slot_s, const link::LinkParams& lp) {
  const double target = a.subcarriers * per_subcarrier(rt, a.power_w / a.subcarriers, q, slot_s, lp) / k;
  const double lo = std::log(a.power_w / k);
  auto g = [&](double y) { return per_subcarrier(rt, std::exp(y), q, slot_s, lp) / target - 1.0; };
  if (g(lo) >= 0.0) return a.power_w;
  double hi = lo + 1.0;
  while (g(hi) < 0.0) hi += 1.0;
  return k * std::exp(numerics::find_root({g, lo, hi}, 1e-13));
}

}  // namespace

EnergyLedger& EnergyLedger::operator+=(const EnergyLedger& o) {
  transmit_j += o.transmit_j;
  circuit_j += o.circuit_j;
  fixed_j += o.fixed_j;
  return *this;
}

double compute_ee(const EnergyLedger& energy, double bits) {
  const double e = energy.total();
  return e > 0.0 ? bits / e : 0.0;
}

double adjust_plan_runtime(double planned_power_w, double predicted_alpha, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("estimated gain must be positive");
  return predicted_alpha * planned_power_w / alpha;
}

// ---------------------------------------------------------------------------
// RT queue

void RTQueue::push(double arrival_s, double bits) {
  const auto b = std::max<std::int64_t>(1, std::llround(bits));
  fifo_.push_back({arrival_s, b});
  backlog_ += b;
  arrived_ += b;
}

RTQueue::Served RTQueue::serve(double t0, double t1, double rate_bps, double d_max) {
  Served out;
  if (!(rate_bps > 0.0)) {
    credit_ = 0.0;
    return out;
  }
  double t = t0;
  while (!fifo_.empty() && t < t1) {
    Chunk& c = fifo_.front();
    if (c.arrival_s > t) {
      t = c.arrival_s;  // idle until the next arrival
      credit_ = 0.0;
      if (t >= t1) break;
    }
    const double budget = rate_bps * (t1 - t) + credit_;
    const std::int64_t take = std::min(c.bits, static_cast<std::int64_t>(std::floor(budget)));
    // The k-th bit of this run departs at t + k / rate; it is late once k
    // exceeds rate * (d_max + arrival - t).
    const double thr = rate_bps * (d_max + c.arrival_s - t);
    const std::int64_t on_time =
        thr <= 0.0 ? 0 : std::min<std::int64_t>(take, static_cast<std::int64_t>(std::floor(thr)));
    out.late_bits += take - on_time;
    out.bits += take;
    c.bits -= take;
    if (c.bits == 0) {
      fifo_.pop_front();
      t = std::min(t1, t + std::max(0.0, static_cast<double>(take) - credit_) / rate_bps);
      credit_ = 0.0;
    } else {
      credit_ = budget - static_cast<double>(take);
      t = t1;
    }
  }
  departed_ += out.bits;
  late_ += out.late_bits;
  backlog_ -= out.bits;
  if (fifo_.empty()) credit_ = 0.0;
  return out;
}

std::int64_t RTQueue::overdue_bits(double now, double d_max) const {
  std::int64_t n = 0;
  for (const auto& c : fifo_) {
    if (now - c.arrival_s <= d_max) break;
    n += c.bits;
  }
  return n;
}

double RTQueue::head_delay(double now) const {
  return fifo_.empty() ? 0.0 : std::max(0.0, now - fifo_.front().arrival_s);
}

double RTQueue::violation(double now, double d_max) const {
  const std::int64_t overdue = overdue_bits(now, d_max);
  const std::int64_t denom = departed_ + overdue;
  return denom > 0 ? static_cast<double>(late_ + overdue) / static_cast<double>(denom) : 0.0;
}

// ---------------------------------------------------------------------------
// VoD client

VoDQueue::VoDQueue(const traffic::VideoTrace& video, double segment_s)
    : segs_(video.segments), segment_s_(segment_s) {
  if (segs_.empty()) throw std::invalid_argument("video window has no segments");
  if (!(segment_s > 0.0)) throw std::invalid_argument("segment duration must be positive");
  levels_.assign(segs_.size(), video.level);
  for (const auto& s : segs_) sizes_.push_back(s.bits(video.level));
  total_ = std::accumulate(sizes_.begin(), sizes_.end(), 0.0);
  delivered_ = sizes_.front();
  play_left_ = segment_s_;
}

double VoDQueue::cumulative_bits(int s) const {
  double c = 0.0;
  for (int k = 0; k < s && k < segments(); ++k) c += sizes_[k];
  return c;
}

int VoDQueue::last_complete() const {
  int s = 0;
  double c = 0.0;
  while (s < segments() && c + sizes_[s] <= delivered_ + kBitTol) c += sizes_[s++];
  return s;
}

void VoDQueue::degrade(int level) {
  const int done = last_complete();
  // A partly delivered segment keeps its size.
  const int first = delivered_ > cumulative_bits(done) + kBitTol ? done + 1 : done;
  for (int k = first; k < segments(); ++k) {
    levels_[k] = std::min(levels_[k], level);
    sizes_[k] = segs_[k].bits(levels_[k]);
  }
  total_ = std::accumulate(sizes_.begin(), sizes_.end(), 0.0);
}

traffic::VideoTrace VoDQueue::materialized() const {
  traffic::VideoTrace v;
  v.level = 0;
  for (double b : sizes_) {
    traffic::Segment s;
    s.base_bits = b;
    v.segments.push_back(s);
  }
  return v;
}

double VoDQueue::advance_frame(double offered_bits, double cap_bits) {
  const double take = std::max(0.0, std::min({offered_bits, cap_bits, remaining_bits()}));
  const double T = segment_s_;
  const double d0 = delivered_;
  const double rate = take / T;
  double t = 0.0;
  while (t < T && !done_) {
    if (!waiting_) {
      const double dt = std::min(play_left_, T - t);
      t += dt;
      play_left_ -= dt;
      if (play_left_ > 1e-9 * T) break;
      played_ += sizes_[playing_ - 1];
      ++playing_;
      if (playing_ > segments()) {
        done_ = true;
        break;
      }
      if (d0 + rate * t + kBitTol >= cumulative_bits(playing_)) {
        play_left_ = T;
      } else {
        waiting_ = true;
        ++stalls_;
      }
    } else {
      const double need = cumulative_bits(playing_) - kBitTol;
      if (rate > 0.0 && d0 + take >= need) {
        const double ts = std::clamp((need - d0) / rate, t, T);
        stall_s_ += ts - t;
        t = ts;
        waiting_ = false;
        play_left_ = T;
      } else {
        stall_s_ += T - t;
        t = T;
      }
    }
  }
  delivered_ = d0 + take;
  return take;
}

std::pair<double, int> VoDQueue::quality() const {
  const int done = last_complete();
  double sum = 0.0;
  int n = 0;
  for (int s = 2; s <= done; ++s) {
    sum += levels_[s - 1];
    ++n;
  }
  return {n > 0 ? sum / n : 0.0, n};
}

// ---------------------------------------------------------------------------

void Scenario::validate() const {
  geometry.validate();
  chain.validate();
  limits.validate();
  link.validate();
  arrivals.validate();
  qos.validate();
  if (vod_users < 0 || rt_users < 0) throw std::invalid_argument("users: counts must be nonnegative");
  if (frames_per_window < 1) throw std::invalid_argument("window.frames must be at least 1");
  if (slots_per_frame < 1) throw std::invalid_argument("window.slots_per_frame must be at least 1");
  if (slots_per_frame * limits.slot_s > limits.frame_s * (1.0 + 1e-12)) {
    throw std::invalid_argument("window.slots_per_frame times slot_s exceeds the frame");
  }
  if (windows < 1) throw std::invalid_argument("run.windows must be at least 1");
  if (!(q_max_bits > 0.0)) throw std::invalid_argument("users.q_max_bits must be positive");
  if (!initial_positions.empty() && static_cast<int>(initial_positions.size()) != users()) {
    throw std::invalid_argument("users.initial_positions needs one entry per user");
  }
  for (double x : initial_positions) {
    if (!(x >= 0.0)) throw std::invalid_argument("users.initial_positions must be nonnegative");
  }
  chain.state_of(initial_velocity);
  if (!(video.base_rate_bps > 0.0) || !(video.enh_rate_bps > 0.0) || video.jitter < 0.0 ||
      video.jitter >= 1.0 || std::abs(video.segment_s - limits.frame_s) > 1e-12) {
    throw std::invalid_argument("traffic.video: invalid generator parameters");
  }
  if (video_source && video_source->count() < 1) {
    throw std::invalid_argument("traffic.video_trace has no segments");
  }
}

QoSAudit audit_qos(const EEReport& report, const traffic::QoSSpec& qos) {
  QoSAudit a;
  a.stalls = report.stalls;
  a.vod_ok = report.stalls == 0;
  a.rt = report.rt;
  for (auto& v : a.rt) {
    v.ok = v.violation <= qos.eps_d;
    a.rt_ok = a.rt_ok && v.ok;
    a.low_confidence = a.low_confidence || v.low_confidence;
  }
  return a;
}

std::vector<int> integerize(std::span<const planner::Allocation> alloc, std::span<const int> bs,
                            int num_bs, double k_max) {
  if (alloc.size() != bs.size()) throw std::invalid_argument("one BS per allocation required");
  std::vector<int> k(alloc.size(), 0);
  std::vector<std::vector<int>> by_bs(num_bs);
  for (std::size_t u = 0; u < alloc.size(); ++u) {
    const double x = alloc[u].subcarriers;
    if (x < kMinSubcarriers || alloc[u].power_w < kMinPower) continue;
    k[u] = static_cast<int>(std::ceil(x - 1e-9));
    by_bs.at(bs[u]).push_back(static_cast<int>(u));
  }
  const int cap = static_cast<int>(std::floor(k_max + 1e-9));
  for (auto& users : by_bs) {
    int total = 0;
    for (int u : users) total += k[u];
    if (total <= cap) continue;
    std::sort(users.begin(), users.end(), [&](int a, int b) {
      const double fa = alloc[a].subcarriers - std::floor(alloc[a].subcarriers);
      const double fb = alloc[b].subcarriers - std::floor(alloc[b].subcarriers);
      return fa != fb ? fa < fb : a < b;
    });
    for (int u : users) {
      if (total <= cap) break;
      const int down = std::max(1, static_cast<int>(std::floor(alloc[u].subcarriers)));
      total -= k[u] - down;
      k[u] = down;
    }
  }
  return k;
}

// ---------------------------------------------------------------------------
// Engine

Engine::Engine(const Scenario& sc) : sc_(sc), fading_(sc.seed) {
  sc_.validate();
  if (sc_.rt_users > 0) {
    qos_ = traffic::solve_qos_exponent(sc_.arrivals, sc_.qos, sc_.limits.slot_s,
                                       sc_.link.bandwidth_hz);
  }
  rt_.resize(sc_.rt_users);
  slot_weight_ = sc_.limits.frame_s / (sc_.slots_per_frame * sc_.limits.slot_s);
}

SlotRecord Engine::step_slot(int global_frame, int slot, std::span<const UserSetup> users) {
  SlotRecord rec;
  rec.power_w.assign(users.size(), 0.0);
  rec.rate_bps.assign(users.size(), 0.0);
  const double tau = sc_.limits.slot_s;
  for (std::size_t u = 0; u < users.size(); ++u) {
    const UserSetup& s = users[u];
    if (s.subcarriers <= 0 || !(s.power_w > 0.0)) continue;
    gains_.resize(s.subcarriers);
    fading_.sample_block(static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(global_frame),
                         static_cast<std::uint32_t>(slot), gains_);
    link::LinkParams lp = sc_.link;
    lp.alpha = s.alpha;
    const auto a = link::allocate_slot_power(s.rt ? link::ServiceKind::RT : link::ServiceKind::VoD,
                                             s.nu, s.beta, lp, gains_);
    rec.power_w[u] = a.power_w;
    rec.rate_bps[u] = a.rate_bps;
    rec.transmit_j += slot_weight_ * tau * a.power_w / sc_.limits.rho;
  }
  const double t0 = (static_cast<double>(global_frame) * sc_.slots_per_frame + slot) * tau;
  for (int r = 0; r < sc_.rt_users; ++r) {
    const std::size_t u = static_cast<std::size_t>(sc_.vod_users + r);
    const double rate = u < users.size() ? rec.rate_bps[u] : 0.0;
    CounterStream rng(sc_.seed, StreamTag::Arrivals, static_cast<std::uint32_t>(r),
                      static_cast<std::uint32_t>(global_frame), static_cast<std::uint32_t>(slot));
    for (const auto& p : traffic::sample_arrivals(sc_.arrivals, tau, rng).packets) {
      rt_[r].push(t0 + p.arrival_s, p.bits);
    }
    rt_[r].serve(t0, t0 + tau, rate, sc_.qos.d_max);
  }
  energy_.transmit_j += rec.transmit_j;
  clock_s_ = t0 + tau;
  ++slots_;
  return rec;
}

void Engine::run_frame(const WindowTruth& truth, int frame, const FrameDirective& d,
                       std::vector<VoDQueue>& queues) {
  const int n = sc_.users();
  const int g = truth.window * sc_.frames_per_window + frame;
  std::vector<int> bs(n);
  for (int u = 0; u < n; ++u) bs[u] = truth.traces[u].bs.at(frame);
  const auto k = integerize(d.alloc, bs, sc_.geometry.num_bs(), sc_.limits.k_max);

  std::vector<UserSetup> setup(n);
  int k_total = 0;
  for (int u = 0; u < n; ++u) {
    UserSetup& s = setup[u];
    s.rt = u >= sc_.vod_users;
    s.bs = bs[u];
    s.alpha = truth.traces[u].alpha.at(frame);
    s.beta = qos_.beta;
    if (k[u] == 0) continue;
    link::LinkParams lp = sc_.link;
    lp.alpha = s.alpha;
    s.power_w = d.alloc[u].power_w;
    s.subcarriers = k[u];
    k_total += k[u];
    // Rounded down to fit K_max: raise the power to keep the planned service.
    if (k[u] < d.alloc[u].subcarriers - 1e-9) {
      s.power_w = matched_power(s.rt, d.alloc[u], k[u], qos_, sc_.limits.slot_s, lp);
    }
    const double ps = s.power_w / s.subcarriers;
    s.nu = s.rt ? link::rt_water_level(ps, s.beta, lp) : link::vod_water_level(ps, lp);
  }
  const double dT = sc_.limits.frame_s;
  energy_.circuit_j += dT * sc_.limits.p_c_w * k_total;
  energy_.fixed_j += dT * sc_.limits.p_0_w * sc_.geometry.num_bs();

  std::vector<double> realized(sc_.vod_users, 0.0);
  for (int j = 0; j < sc_.slots_per_frame; ++j) {
    const SlotRecord rec = step_slot(g, j, setup);
    for (int m = 0; m < sc_.vod_users; ++m) {
      realized[m] += slot_weight_ * sc_.limits.slot_s * rec.rate_bps[m];
    }
  }
  for (int m = 0; m < sc_.vod_users; ++m) {
    double offered = realized[m];
    if (sc_.delivery == VoDDelivery::Ergodic) {
      link::LinkParams lp = sc_.link;
      lp.alpha = setup[m].alpha;
      offered = dT * link::vod_avg_rate(setup[m].power_w, setup[m].subcarriers, lp);
    }
    const double cap = d.vod_cap_bits.empty() ? kInf : d.vod_cap_bits.at(m);
    vod_bits_ += queues[m].advance_frame(offered, cap);
  }
  ++frames_done_;
}

bool Engine::run_window(const WindowTruth& truth, const FrameSource& source) {
  const int n = sc_.users();
  const int nl = sc_.frames_per_window;
  if (static_cast<int>(truth.traces.size()) != n ||
      static_cast<int>(truth.videos.size()) != sc_.vod_users) {
    throw std::invalid_argument("window truth does not match the user population");
  }
  for (const auto& t : truth.traces) {
    if (t.frames() < nl || static_cast<int>(t.bs.size()) < nl) {
      throw std::invalid_argument("true trace shorter than the window");
    }
  }
  std::vector<VoDQueue> queues;
  for (const auto& v : truth.videos) {
    if (v.count() < nl + 1) throw std::invalid_argument("video window needs N_L + 1 segments");
    queues.emplace_back(v, sc_.limits.frame_s);
  }
  for (int f = 0; f < nl; ++f) {
    const auto d = source(f, queues);
    if (!d) return false;
    if (static_cast<int>(d->alloc.size()) != n) {
      throw std::invalid_argument("frame allocation does not cover every user");
    }
    run_frame(truth, f, *d, queues);
  }
  for (const auto& q : queues) {
    stalls_ += q.stalls();
    stall_s_ += q.stall_s();
    const auto [mean, count] = q.quality();
    level_sum_ += mean * count;
    level_count_ += count;
  }
  return true;
}

bool Engine::run_window(const WindowTruth& truth, const planner::WindowPlan& plan) {
  const int n = sc_.users();
  if (static_cast<int>(plan.alloc.size()) != n) {
    throw std::invalid_argument("plan does not cover every user");
  }
  for (const auto& row : plan.alloc) {
    if (static_cast<int>(row.size()) < sc_.frames_per_window) {
      throw std::invalid_argument("plan shorter than the window");
    }
  }
  WindowTruth t = truth;
  if (plan.quality_level >= 0) {
    for (auto& v : t.videos) {
      if (plan.quality_level < v.level) v = traffic::reduce_quality(v, plan.quality_level);
    }
  }
  return run_window(t, [&](int f, std::vector<VoDQueue>&) -> std::optional<FrameDirective> {
    FrameDirective d;
    for (int u = 0; u < n; ++u) d.alloc.push_back(plan.alloc[u][f]);
    return d;
  });
}

EEReport Engine::report() const {
  EEReport r;
  r.vod_bits = vod_bits_;
  for (const auto& q : rt_) {
    RTVerdict v;
    v.departed_bits = q.departed_bits();
    v.late_bits = q.late_bits();
    v.backlog_bits = q.backlog_bits();
    v.violation = q.violation(clock_s_, sc_.qos.d_max);
    v.ok = v.violation <= sc_.qos.eps_d;
    v.low_confidence = slots_ < sc_.min_rt_slots;
    r.rt_bits += slot_weight_ * static_cast<double>(q.departed_bits());
    r.max_rt_violation = std::max(r.max_rt_violation, v.violation);
    r.rt.push_back(v);
  }
  r.energy = energy_;
  r.ee = compute_ee(energy_, r.bits());
  r.stalls = stalls_;
  r.stall_s = stall_s_;
  r.quality_level = level_count_ > 0 ? level_sum_ / level_count_
                                     : static_cast<double>(traffic::kEnhancementLayers);
  r.slots = slots_;
  r.frames = frames_done_;
  return r;
}

// ---------------------------------------------------------------------------
// Whole runs

WindowDraw draw_window(const Scenario& sc, int window) {
  const int nl = sc.frames_per_window;
  const double dT = sc.limits.frame_s;
  WindowDraw d;
  d.truth.window = window;
  const auto w = static_cast<std::uint32_t>(window);
  for (int u = 0; u < sc.users(); ++u) {
    const auto id = static_cast<std::uint32_t>(u);
    CounterStream place(sc.seed, StreamTag::Placement, id, w);
    const double x0 = sc.initial_positions.empty() ? place.uniform() * sc.geometry.first_cell_end()
                                                   : sc.initial_positions[u];
    CounterStream mob(sc.seed, StreamTag::Mobility, id, w);
    const auto path = channel::sample_mobility(sc.chain, x0, sc.initial_velocity, nl, mob);
    d.truth.traces.push_back(channel::large_scale_trace(sc.geometry, path));
    d.predicted.push_back(channel::predict_trace(sc.geometry, x0, sc.initial_velocity, nl, dT));
  }
  for (int m = 0; m < sc.vod_users; ++m) {
    if (sc.video_source) {
      const auto& src = *sc.video_source;
      traffic::VideoTrace v;
      v.level = src.level;
      for (int s = 0; s <= nl; ++s) {
        v.segments.push_back(src.segments[static_cast<std::size_t>((window * nl + s) % src.count())]);
      }
      d.truth.videos.push_back(std::move(v));
    } else {
      CounterStream rng(sc.seed, StreamTag::Video, static_cast<std::uint32_t>(m), w);
      d.truth.videos.push_back(traffic::generate_video(sc.video, nl + 1, rng));
    }
  }
  return d;
}

planner::PlanningInputs planning_inputs(const Scenario& sc, const traffic::QoSExponent& qos,
                                        const std::vector<channel::LargeScaleTrace>& traces,
                                        const std::vector<traffic::VideoTrace>& videos) {
  planner::PlanningInputs in;
  in.limits = sc.limits;
  in.link = sc.link;
  in.frames = sc.frames_per_window;
  in.num_bs = sc.geometry.num_bs();
  in.solver = sc.solver;
  for (int m = 0; m < sc.vod_users; ++m) in.vod.push_back({traces[m], videos[m]});
  const double eb = sc.rt_users > 0 ? traffic::effective_bandwidth(sc.arrivals, qos.theta) : 0.0;
  for (int r = 0; r < sc.rt_users; ++r) {
    in.rt.push_back({traces[sc.vod_users + r], sc.arrivals, qos, eb});
  }
  return in;
}

namespace {

class PerFramePolicy {
 public:
  PerFramePolicy(const Scenario& sc, planner::PlanningInputs in, planner::Policy policy,
                 std::vector<double> alpha_med)
      : sc_(sc), in_(std::move(in)), policy_(policy), alpha_med_(std::move(alpha_med)) {}

  std::optional<FrameDirective> operator()(int f, std::vector<VoDQueue>& queues) {
    for (;;) {
      for (std::size_t m = 0; m < queues.size(); ++m) in_.vod[m].video = queues[m].materialized();
      auto d = try_frame(f, queues);
      if (d) return d;
      if (level_ == 0 || queues.empty()) return std::nullopt;
      --level_;
      for (auto& q : queues) q.degrade(level_);
    }
  }

 private:
  std::optional<FrameDirective> try_frame(int f, const std::vector<VoDQueue>& queues) {
    const int md = static_cast<int>(queues.size());
    FrameDirective d;
    d.vod_cap_bits.resize(md);
    if (policy_ == planner::Policy::Heuristic) {
      std::vector<planner::HeuristicState> states(md);
      for (int m = 0; m < md; ++m) {
        states[m] = {alpha_med_[m], queues[m].last_complete(), queues[m].buffer_bits(),
                     sc_.q_max_bits};
      }
      auto h = planner::plan_heuristic_frame(in_, f, states);
      if (!h.plan.feasible) return std::nullopt;
      for (int m = 0; m < md; ++m) {
        d.vod_cap_bits[m] = std::max(
            0.0, queues[m].cumulative_bits(h.decisions[m].last_sent) - queues[m].delivered_bits());
      }
      d.alloc = std::move(h.plan.alloc);
      return d;
    }
    // Baseline 1: just enough to complete the segment played next frame.
    std::vector<double> rates(md, 0.0);
    for (int m = 0; m < md; ++m) {
      const int target = std::min(f + 2, queues[m].segments());
      d.vod_cap_bits[m] =
          std::max(0.0, queues[m].cumulative_bits(target) - queues[m].delivered_bits());
      rates[m] = d.vod_cap_bits[m] / sc_.limits.frame_s;
    }
    auto p = planner::solve_frame_program(in_, f, rates);
    if (!p.feasible) return std::nullopt;
    d.alloc = std::move(p.alloc);
    return d;
  }

  const Scenario& sc_;
  planner::PlanningInputs in_;
  planner::Policy policy_;
  std::vector<double> alpha_med_;
  int level_ = traffic::kEnhancementLayers;
};

}  // namespace

FrameSource per_frame_source(const Scenario& sc, planner::Policy policy, const WindowDraw& draw,
                             const traffic::QoSExponent& qos) {
  if (policy != planner::Policy::Heuristic && policy != planner::Policy::Baseline1) {
    throw std::invalid_argument("per-frame planning applies to the heuristic and Baseline 1");
  }
  std::vector<double> med;
  for (int m = 0; m < sc.vod_users; ++m) med.push_back(channel::median_gain(draw.predicted[m].alpha));
  auto state = std::make_shared<PerFramePolicy>(
      sc, planning_inputs(sc, qos, draw.truth.traces, draw.truth.videos), policy, std::move(med));
  return [state](int f, std::vector<VoDQueue>& q) { return (*state)(f, q); };
}

namespace {

EEReport not_available(EEReport r, std::string why) {
  r.feasible = false;
  r.quality_level = -1.0;
  r.failure = std::move(why);
  return r;
}

}  // namespace

EEReport run_policy(const Scenario& sc, planner::Policy policy) {
  using planner::Policy;
  Engine engine(sc);
  const double edge_gain = channel::gain_from_distance(sc.geometry.cell_radius());
  for (int w = 0; w < sc.windows; ++w) {
    WindowDraw draw = draw_window(sc, w);
    bool ok = true;
    switch (policy) {
      case Policy::Optimal:
      case Policy::OptimalAdjusted:
      case Policy::Baseline2:
      case Policy::Baseline3: {
        const auto in = planning_inputs(sc, engine.qos_exponent(), draw.predicted, draw.truth.videos);
        auto plan = planner::degrade_until_feasible(in, [&](const planner::PlanningInputs& t) {
          if (policy == Policy::Baseline2) return planner::baseline2_plan(t, edge_gain);
          if (policy == Policy::Baseline3) return planner::baseline3_plan(t);
          return planner::plan_optimal_window(t);
        });
        if (!plan.feasible) {
          return not_available(engine.report(), "window " + std::to_string(w) + " cannot be planned");
        }
        if (policy == Policy::OptimalAdjusted) {
          for (int u = 0; u < sc.users(); ++u) {
            for (int f = 0; f < sc.frames_per_window; ++f) {
              auto& a = plan.alloc[u][f];
              a.power_w = adjust_plan_runtime(a.power_w, draw.predicted[u].alpha[f],
                                              draw.truth.traces[u].alpha[f]);
            }
          }
        }
        ok = engine.run_window(draw.truth, plan);
        break;
      }
      case Policy::Heuristic:
      case Policy::Baseline1: {
        ok = engine.run_window(draw.truth, per_frame_source(sc, policy, draw, engine.qos_exponent()));
        break;
      }
    }
    if (!ok) return not_available(engine.report(), "window " + std::to_string(w) + " cannot be planned");
  }
  return engine.report();
}

}  // namespace predalloc::sim

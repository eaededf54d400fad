#include "doctest.h"

#include "predalloc/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace predalloc;
using namespace predalloc::sim;

namespace {

Scenario small_scenario(int vod, int rt, int windows) {
  Scenario sc;
  sc.vod_users = vod;
  sc.rt_users = rt;
  sc.windows = windows;
  sc.seed = 11;
  return sc;
}

traffic::VideoTrace flat_video(int count, double bits) {
  traffic::VideoTrace v;
  v.level = 0;
  for (int s = 0; s < count; ++s) {
    traffic::Segment seg;
    seg.base_bits = bits;
    v.segments.push_back(seg);
  }
  return v;
}

}  // namespace

TEST_CASE("runtime power adjustment") {
  CHECK(adjust_plan_runtime(0.3, 2e-12, 2e-12) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(adjust_plan_runtime(0.3, 2e-12, 1e-12) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK_THROWS_AS(adjust_plan_runtime(0.3, 2e-12, 0.0), std::invalid_argument);

  // Per-subcarrier service depends on alpha * P_S only, so the adjusted power
  // at the true gain reproduces the planned service exactly.
  link::LinkParams planned, actual;
  planned.alpha = 3e-12;
  actual.alpha = 1.1e-12;
  const double p_hat = 0.05, k = 40.0;
  const double p_tilde = adjust_plan_runtime(p_hat, planned.alpha, actual.alpha);
  CHECK(link::vod_avg_rate(p_tilde, k, actual) ==
        doctest::Approx(link::vod_avg_rate(p_hat, k, planned)).epsilon(1e-10));
  const auto q = traffic::solve_qos_exponent({}, {}, 0.005, 15e3);
  CHECK(link::effective_capacity(p_tilde, k, q.beta, q.theta, 0.005, actual) ==
        doctest::Approx(link::effective_capacity(p_hat, k, q.beta, q.theta, 0.005, planned))
            .epsilon(1e-10));
}

TEST_CASE("energy efficiency accounting") {
  EnergyLedger e;
  CHECK(compute_ee(e, 1e6) == 0.0);
  e.transmit_j = 1.0;
  e.circuit_j = 2.0;
  e.fixed_j = 5.0;
  CHECK(e.total() == 8.0);
  CHECK(compute_ee(e, 16.0) == 2.0);
  EnergyLedger sum;
  sum += e;
  sum += e;
  CHECK(sum.total() == 16.0);
}

TEST_CASE("RT queue: FIFO fluid service and delay accounting") {
  SUBCASE("late bits of one packet") {
    RTQueue q;
    q.push(0.0, 1000.0);
    const auto s = q.serve(0.0, 2.0, 1000.0, 0.5);
    CHECK(s.bits == 1000);
    CHECK(s.late_bits == 500);
    CHECK(q.backlog_bits() == 0);
  }
  SUBCASE("service waits for the arrival") {
    RTQueue q;
    q.push(0.3, 100.0);
    const auto s = q.serve(0.0, 1.0, 1000.0, 0.125);
    CHECK(s.bits == 100);
    CHECK(s.late_bits == 0);  // departs by 0.4
  }
  SUBCASE("partial service carries over in order") {
    RTQueue q;
    q.push(0.0, 300.0);
    q.push(0.0, 300.0);
    CHECK(q.serve(0.0, 1.0, 250.0, 10.0).bits == 250);
    CHECK(q.head_delay(1.0) == doctest::Approx(1.0));
    CHECK(q.serve(1.0, 2.0, 250.0, 10.0).bits == 250);
    CHECK(q.backlog_bits() == 100);
    CHECK(q.overdue_bits(2.0, 1.5) == 100);
    CHECK(q.overdue_bits(2.0, 2.5) == 0);
  }
  SUBCASE("fractional bits are not lost while busy") {
    RTQueue q;
    q.push(0.0, 10000.0);
    std::int64_t served = 0;
    for (int j = 0; j < 10; ++j) served += q.serve(j * 0.1, (j + 1) * 0.1, 333.3, 1.0).bits;
    CHECK(std::abs(served - 333) <= 1);
  }
  SUBCASE("conservation is bit-exact") {
    RTQueue q;
    CounterStream rng(3, StreamTag::Test, 1);
    std::int64_t served = 0;
    for (int j = 0; j < 2000; ++j) {
      const double t0 = j * 0.005;
      for (const auto& p : traffic::sample_arrivals({}, 0.005, rng).packets) q.push(t0 + p.arrival_s, p.bits);
      served += q.serve(t0, t0 + 0.005, 1.9e6 + 4e5 * std::sin(j), 0.05).bits;
    }
    CHECK(q.arrived_bits() == served + q.backlog_bits());
    CHECK(q.departed_bits() == served);
    CHECK(q.violation(10.0, 0.05) >= 0.0);
    CHECK(q.violation(10.0, 0.05) <= 1.0);
  }
}

TEST_CASE("VoD client: playback, stalls and caps") {
  const auto video = flat_video(3, 100.0);
  SUBCASE("on-time delivery never stalls") {
    VoDQueue q(video, 1.0);
    CHECK(q.buffer_bits() == 100.0);
    CHECK(q.advance_frame(100.0, 1e300) == 100.0);
    CHECK(q.advance_frame(100.0, 1e300) == 100.0);
    CHECK(q.stalls() == 0);
    CHECK(q.remaining_bits() == 0.0);
    CHECK(q.last_complete() == 3);
    CHECK(q.quality().second == 2);
  }
  SUBCASE("late segment stalls until it completes") {
    VoDQueue q(video, 1.0);
    q.advance_frame(50.0, 1e300);
    CHECK(q.stalls() == 1);
    CHECK(q.stall_s() == 0.0);
    q.advance_frame(100.0, 1e300);
    CHECK(q.stalls() == 1);
    // 150 delivered at the frame start, 199 (one bit of slack) reached at 0.49 s.
    CHECK(q.stall_s() == doctest::Approx(0.49));
  }
  SUBCASE("never beyond the video or the cap") {
    VoDQueue q(video, 1.0);
    CHECK(q.advance_frame(1e9, 30.0) == 30.0);
    CHECK(q.advance_frame(1e9, 1e300) == doctest::Approx(170.0));
    CHECK(q.remaining_bits() == doctest::Approx(0.0));
  }
  SUBCASE("degrade lowers only unstarted segments") {
    traffic::VideoTrace v;
    CounterStream rng(5, StreamTag::Test, 2);
    v = traffic::generate_video({}, 4, rng);
    VoDQueue q(v, 1.0);
    q.advance_frame(v.size(2), 1e300);
    q.degrade(2);
    CHECK(q.segment_bits(2) == doctest::Approx(v.size(2)));
    CHECK(q.segment_level(3) == 2);
    CHECK(q.segment_bits(3) == doctest::Approx(v.segments[2].bits(2)));
    CHECK(q.materialized().size(4) == doctest::Approx(v.segments[3].bits(2)));
  }
}

TEST_CASE("integerization rounds up within K_max") {
  const std::vector<planner::Allocation> a{{0.1, 10.2}, {0.1, 5.7}, {0.1, 1e-8}, {0.1, 3.0}};
  const std::vector<int> bs{0, 0, 0, 1};
  auto k = integerize(a, bs, 2, 100.0);
  CHECK(k == std::vector<int>{11, 6, 0, 3});
  k = integerize(a, bs, 2, 16.0);
  CHECK(k == std::vector<int>{10, 6, 0, 3});
  k = integerize(a, bs, 2, 15.9);
  CHECK(k[0] + k[1] <= 15);
}

TEST_CASE("slot step: water-filling rates and energy") {
  Scenario sc = small_scenario(1, 1, 1);
  Engine eng(sc);
  link::LinkParams lp;
  lp.alpha = 2e-12;
  UserSetup vod{false, 0, lp.alpha, 0.01, 64, 0.0, 0.0};
  vod.nu = link::vod_water_level(vod.power_w / vod.subcarriers, lp);
  UserSetup rt{true, 0, lp.alpha, 0.01, 64, 0.0, eng.qos_exponent().beta};
  rt.nu = link::rt_water_level(rt.power_w / rt.subcarriers, rt.beta, lp);

  SUBCASE("VoD rate is the sum of B log2(g / nu) over active subcarriers") {
    const std::vector<UserSetup> users{vod, UserSetup{true}};
    const auto rec = eng.step_slot(0, 3, users);
    channel::FadingSampler f(sc.seed);
    double rate = 0.0, power = 0.0;
    for (int k = 0; k < vod.subcarriers; ++k) {
      const double g = f.sample(0, 0, 3, k);
      if (g >= vod.nu) {
        rate += lp.bandwidth_hz * std::log2(g / vod.nu);
        power += link::vod_slot_power(vod.nu, g, lp);
      }
    }
    CHECK(rec.rate_bps[0] == doctest::Approx(rate).epsilon(1e-12));
    CHECK(rec.power_w[0] == doctest::Approx(power).epsilon(1e-12));
    CHECK(rec.transmit_j == doctest::Approx(0.005 * power / sc.limits.rho).epsilon(1e-12));
  }
  SUBCASE("nothing above the water level") {
    UserSetup dry = vod;
    dry.nu = link::kMaxWaterLevel;
    const std::vector<UserSetup> users{dry, UserSetup{true}};
    const auto rec = eng.step_slot(0, 0, users);
    CHECK(rec.rate_bps[0] == 0.0);
    CHECK(rec.transmit_j == 0.0);
    CHECK(eng.energy().transmit_j == 0.0);
  }
  SUBCASE("slot power averages to the planned power over a frame") {
    const std::vector<UserSetup> users{vod, rt};
    double pv = 0.0, pr = 0.0;
    for (int j = 0; j < 200; ++j) {
      const auto rec = eng.step_slot(5, j, users);
      pv += rec.power_w[0] / 200.0;
      pr += rec.power_w[1] / 200.0;
    }
    CHECK(pv == doctest::Approx(vod.power_w).epsilon(0.02));
    CHECK(pr == doctest::Approx(rt.power_w).epsilon(0.02));
  }
}

TEST_CASE("idle system spends exactly the fixed power") {
  Scenario sc = small_scenario(0, 0, 3);
  const auto r = run_policy(sc, planner::Policy::Optimal);
  const double expect = sc.geometry.num_bs() * sc.windows * sc.frames_per_window *
                        sc.limits.frame_s * sc.limits.p_0_w;
  CHECK(r.energy.total() == doctest::Approx(expect).epsilon(1e-14));
  CHECK(r.energy.transmit_j == 0.0);
  CHECK(r.energy.circuit_j == 0.0);
  CHECK(r.bits() == 0.0);
  CHECK(r.ee == 0.0);
}

TEST_CASE("feasible plan with perfect prediction delivers the whole window") {
  Scenario sc = small_scenario(2, 1, 1);
  Engine eng(sc);
  const auto draw = draw_window(sc, 0);
  const auto in = planning_inputs(sc, eng.qos_exponent(), draw.predicted, draw.truth.videos);
  const auto plan = planner::plan_optimal_window(in);
  REQUIRE(plan.feasible);
  REQUIRE(eng.run_window(draw.truth, plan));
  const auto r = eng.report();
  double want = 0.0;
  for (const auto& v : draw.truth.videos) {
    for (int s = 2; s <= v.count(); ++s) want += v.size(s);
  }
  CHECK(r.vod_bits == doctest::Approx(want).epsilon(1e-12));
  CHECK(r.stalls == 0);
  CHECK(r.frames == sc.frames_per_window);
  CHECK(r.slots == sc.frames_per_window * sc.slots_per_frame);
  for (const auto& q : eng.rt_queues()) {
    CHECK(q.arrived_bits() == q.departed_bits() + q.backlog_bits());
  }

  planner::WindowPlan short_plan = plan;
  short_plan.alloc.pop_back();
  CHECK_THROWS_AS(eng.run_window(draw.truth, short_plan), std::invalid_argument);
}

TEST_CASE("heuristic buffer never exceeds Q_max") {
  Scenario sc = small_scenario(2, 1, 3);
  sc.q_max_bits = 4.5e6;
  Engine eng(sc);
  double worst = 0.0;
  for (int w = 0; w < sc.windows; ++w) {
    const auto draw = draw_window(sc, w);
    auto inner = per_frame_source(sc, planner::Policy::Heuristic, draw, eng.qos_exponent());
    REQUIRE(eng.run_window(draw.truth, [&](int f, std::vector<VoDQueue>& q) {
      for (const auto& v : q) worst = std::max(worst, v.buffer_bits());
      return inner(f, q);
    }));
  }
  CHECK(worst <= sc.q_max_bits);
  CHECK(worst > 0.0);
  CHECK(eng.report().stalls == 0);
}

TEST_CASE("run determinism and paired dominance at light load") {
  Scenario sc = small_scenario(1, 1, 2);
  sc.slots_per_frame = 40;
  const auto a = run_policy(sc, planner::Policy::Optimal);
  const auto b = run_policy(sc, planner::Policy::Optimal);
  CHECK(a.ee == b.ee);
  CHECK(a.energy.transmit_j == b.energy.transmit_j);
  CHECK(a.max_rt_violation == b.max_rt_violation);
  CHECK(a.feasible);
  CHECK(a.quality_level == 5.0);
  for (auto p : {planner::Policy::Baseline1, planner::Policy::Baseline2, planner::Policy::Baseline3}) {
    CAPTURE(planner::to_string(p));
    CHECK(run_policy(sc, p).ee <= a.ee);
  }

  Scenario costly = sc;
  costly.limits.p_0_w *= 2.0;
  CHECK(run_policy(costly, planner::Policy::Optimal).ee < a.ee);
}

TEST_CASE("under-provisioned RT power breaks the delay bound") {
  Scenario sc = small_scenario(0, 1, 6);
  Engine good(sc), starved(sc);
  for (int w = 0; w < sc.windows; ++w) {
    const auto draw = draw_window(sc, w);
    const auto in = planning_inputs(sc, good.qos_exponent(), draw.truth.traces, draw.truth.videos);
    auto plan = planner::plan_optimal_window(in);
    REQUIRE(plan.feasible);
    good.run_window(draw.truth, plan);
    for (auto& a : plan.alloc[0]) a.power_w *= 0.5;
    starved.run_window(draw.truth, plan);
  }
  CHECK(good.report().max_rt_violation < sc.qos.eps_d);
  CHECK(starved.report().max_rt_violation > sc.qos.eps_d);
  const auto audit = audit_qos(starved.report(), sc.qos);
  CHECK_FALSE(audit.rt_ok);
  CHECK(audit.low_confidence);
}

TEST_CASE("scenario validation") {
  Scenario sc;
  CHECK_NOTHROW(sc.validate());
  sc.initial_velocity = 20.5;
  CHECK_THROWS(sc.validate());
  sc = Scenario{};
  sc.slots_per_frame = 201;
  CHECK_THROWS_AS(sc.validate(), std::invalid_argument);
  sc = Scenario{};
  sc.initial_positions = {1.0};
  CHECK_THROWS_AS(sc.validate(), std::invalid_argument);
}

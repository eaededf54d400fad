#pragma once

#include "predalloc/channel.hpp"
#include "predalloc/linkmodel.hpp"
#include "predalloc/numerics.hpp"
#include "predalloc/traffic.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace predalloc::planner {

enum class Policy { Optimal, OptimalAdjusted, Heuristic, Baseline1, Baseline2, Baseline3 };

const char* to_string(Policy p);
std::optional<Policy> parse_policy(std::string_view name);

/// Raised when RT users cannot be served in some frame whatever the video quality.
class AdmissionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Limits {
  double p_ave_w = 40.0;    ///< per-BS average transmit power cap
  double k_max = 512.0;     ///< per-BS subcarriers
  double p_c_w = 1.08e-3;   ///< circuit power per subcarrier
  double p_0_w = 1.044;     ///< fixed power per BS
  double rho = 0.388;       ///< amplifier efficiency
  double frame_s = 1.0;
  double slot_s = 0.005;
  void validate() const;
};

struct VoDUser {
  channel::LargeScaleTrace trace;  ///< gains the planner believes in
  traffic::VideoTrace video;       ///< R_1 .. R_{N_L+1}
};

struct RTUser {
  channel::LargeScaleTrace trace;
  traffic::RTArrivalSpec arrivals;
  traffic::QoSExponent qos;
  double eb_bps = 0.0;  ///< effective bandwidth at qos.theta
};

/// Users are indexed VoD first (0 .. M_D-1), then RT.
struct PlanningInputs {
  std::vector<VoDUser> vod;
  std::vector<RTUser> rt;
  Limits limits;
  link::LinkParams link;  ///< alpha is ignored; phi, noise and bandwidth are used
  int frames = 0;
  int num_bs = 1;
  numerics::SolverOptions solver;

  int users() const { return static_cast<int>(vod.size() + rt.size()); }
  const channel::LargeScaleTrace& trace(int user) const;
  void validate() const;
};

struct Allocation {
  double power_w = 0.0;
  double subcarriers = 0.0;
};

struct WindowPlan {
  int frames = 0;
  std::vector<std::vector<Allocation>> alloc;      ///< [user][frame]
  std::vector<std::vector<double>> power_slack;    ///< [frame][bs], P_ave - sum P
  std::vector<std::vector<double>> subcarrier_slack;
  int quality_level = traffic::kEnhancementLayers;
  double objective = 0.0;  ///< sum over users and frames of P / rho + P_c K (W)
  bool feasible = false;
  numerics::SolverStatus status = numerics::SolverStatus::MaxIterations;
};

struct FramePlan {
  std::vector<Allocation> alloc;  ///< per user
  double objective = 0.0;
  bool feasible = false;
  numerics::SolverStatus status = numerics::SolverStatus::MaxIterations;
};

/// [frame][bs] -> users associated with that BS in that frame.
std::vector<std::vector<std::vector<int>>> association_sets(const PlanningInputs& in);

/// Window program: cumulative VoD rate floors, per-frame RT effective-capacity
/// floors and per-BS per-frame caps. VoD sizes use each video's own level.
WindowPlan plan_optimal_window(const PlanningInputs& in);

/// Single-frame program with VoD rate floors `vod_rates_bps` (entries of 0 drop
/// the user) and RT effective-capacity floors.
FramePlan solve_frame_program(const PlanningInputs& in, int frame,
                              std::span<const double> vod_rates_bps);

/// RT-only frame program; VoD users receive nothing. Throws AdmissionError when
/// infeasible.
FramePlan plan_rt_per_frame(const PlanningInputs& in, int frame);

struct HeuristicState {
  double alpha_med = 0.0;
  int last_sent = 1;        ///< index of the last segment already at the user
  double queue_bits = 0.0;  ///< user buffer at the start of the frame, current segment included
  double q_max_bits = 0.0;
};

struct SegmentDecision {
  double rate_bps = 0.0;
  int segments = 0;
  int last_sent = 1;  ///< value after this frame's delivery
  bool good_channel = false;
};

/// Segment count and rate floor for one VoD user in 0-based `frame`. At most
/// `max_segments` are scheduled on a good channel, never fewer than needed to
/// avoid a stall.
SegmentDecision heuristic_segment_decision(const HeuristicState& s, double alpha,
                                           const traffic::VideoTrace& video, int frame,
                                           double frame_s, int max_segments = 2);

struct HeuristicFrame {
  FramePlan plan;
  std::vector<SegmentDecision> decisions;
};

/// Per-frame heuristic plan. On infeasibility good-channel users drop from two
/// segments to one, then to zero, before the frame is declared infeasible.
HeuristicFrame plan_heuristic_frame(const PlanningInputs& in, int frame,
                                    std::span<const HeuristicState> states);

/// Non-predictive frame plan: every VoD user receives R_{i+1} in frame i.
FramePlan baseline1_frame(const PlanningInputs& in, int frame);

/// Window program with every RT gain replaced by `edge_gain`.
WindowPlan baseline2_plan(const PlanningInputs& in, double edge_gain);

/// Bandwidth-only program at the fixed per-subcarrier power P_ave / K_max.
WindowPlan baseline3_plan(const PlanningInputs& in);

/// Subcarrier power Baseline 3 assigns to every subcarrier.
inline double baseline3_subcarrier_power(const Limits& l) { return l.p_ave_w / l.k_max; }

/// Tries uniform quality levels 5 down to 0 with `planner` and returns the
/// first feasible plan. The result is infeasible (quality_level = -1) when
/// even the base layer cannot be planned.
template <typename Planner>
WindowPlan degrade_until_feasible(const PlanningInputs& in, Planner&& planner) {
  PlanningInputs trial = in;
  for (int level = traffic::kEnhancementLayers; level >= 0; --level) {
    for (std::size_t m = 0; m < in.vod.size(); ++m) {
      trial.vod[m].video = traffic::reduce_quality(in.vod[m].video, level);
    }
    WindowPlan plan = planner(trial);
    if (plan.feasible) {
      plan.quality_level = level;
      return plan;
    }
    if (in.vod.empty()) break;
  }
  WindowPlan failed;
  failed.frames = in.frames;
  failed.quality_level = -1;
  failed.feasible = false;
  failed.status = numerics::SolverStatus::Infeasible;
  return failed;
}

/// Largest constraint violation of `plan` against the window program of `in`
/// (rate floors and capacity floors relative to their demand, caps relative to
/// the cap). Zero for a feasible plan.
double window_violation(const PlanningInputs& in, const WindowPlan& plan);

/// Header "policy,user,frame,power_w,subcarriers,quality_level"; frames 0-based.
void write_plan(std::ostream& out, std::string_view policy, const WindowPlan& plan);

}  // namespace predalloc::planner

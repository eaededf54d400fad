#pragma once

#include "predalloc/channel.hpp"
#include "predalloc/linkmodel.hpp"
#include "predalloc/planner.hpp"
#include "predalloc/traffic.hpp"

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace predalloc::sim {

struct EnergyLedger {
  double transmit_j = 0.0;  ///< sum of tau p / rho
  double circuit_j = 0.0;   ///< dT P_c sum K
  double fixed_j = 0.0;     ///< dT P_0 per BS and frame
  double total() const { return transmit_j + circuit_j + fixed_j; }
  EnergyLedger& operator+=(const EnergyLedger& o);
};

/// Bits per Joule; 0 when no energy was spent.
double compute_ee(const EnergyLedger& energy, double bits);

/// Power that keeps alpha * P at its planned value: alpha_hat * P_hat / alpha.
double adjust_plan_runtime(double planned_power_w, double predicted_alpha, double alpha);

/// Work-conserving FIFO fluid queue of integer-bit packets. Service runs at a
/// constant rate over each call, so the departure time of every bit is exact.
class RTQueue {
 public:
  struct Served {
    std::int64_t bits = 0;
    std::int64_t late_bits = 0;  ///< bits whose delay exceeded the bound
  };

  /// Packet sizes are rounded to whole bits, at least one.
  void push(double arrival_s, double bits);
  /// Serves at rate_bps over [t0, t1]; a packet is served no earlier than its
  /// arrival. Fractions of a bit carry over while the queue stays busy.
  Served serve(double t0, double t1, double rate_bps, double d_max);

  std::int64_t backlog_bits() const { return backlog_; }
  std::int64_t arrived_bits() const { return arrived_; }
  std::int64_t departed_bits() const { return departed_; }
  std::int64_t late_bits() const { return late_; }
  /// Queued bits that have already waited longer than d_max at `now`.
  std::int64_t overdue_bits(double now, double d_max) const;
  /// Delay of the head-of-line bit at `now`, 0 when empty.
  double head_delay(double now) const;
  /// Late fraction among departed bits plus queued overdue bits.
  double violation(double now, double d_max) const;

 private:
  struct Chunk {
    double arrival_s;
    std::int64_t bits;
  };
  std::deque<Chunk> fifo_;
  std::int64_t backlog_ = 0;
  std::int64_t arrived_ = 0;
  std::int64_t departed_ = 0;
  std::int64_t late_ = 0;
  double credit_ = 0.0;
};

/// Client buffer and player for one window. R_1 is at the user and starts
/// playing at t = 0; segment s may start only once R_1..R_s are complete,
/// otherwise playback pauses until it is (a stall).
class VoDQueue {
 public:
  VoDQueue(const traffic::VideoTrace& video, double segment_s);

  int segments() const { return static_cast<int>(sizes_.size()); }
  double segment_bits(int s) const { return sizes_.at(s - 1); }
  int segment_level(int s) const { return levels_.at(s - 1); }
  /// Sum of R_1..R_s.
  double cumulative_bits(int s) const;
  double delivered_bits() const { return delivered_; }
  double remaining_bits() const { return total_ - delivered_; }
  /// Delivered minus fully played, the segment in playback included.
  double buffer_bits() const { return delivered_ - played_; }
  /// Largest s with R_1..R_s complete at the user.
  int last_complete() const;
  int stalls() const { return stalls_; }
  double stall_s() const { return stall_s_; }

  /// Lowers every segment not yet started to `level`.
  void degrade(int level);
  /// Sizes as a level-0 trace for the planners.
  traffic::VideoTrace materialized() const;

  /// Delivers min(offered, cap, remaining) bits spread evenly over one
  /// frame and advances playback by the frame length. Returns the bits taken.
  double advance_frame(double offered_bits, double cap_bits);
  /// Mean level over segments 2.. that are complete, and their count.
  std::pair<double, int> quality() const;

 private:
  std::vector<traffic::Segment> segs_;
  std::vector<double> sizes_;
  std::vector<int> levels_;
  double segment_s_;
  double total_ = 0.0;
  double delivered_ = 0.0;
  double played_ = 0.0;
  int playing_ = 1;
  double play_left_ = 0.0;
  bool waiting_ = false;
  bool done_ = false;
  int stalls_ = 0;
  double stall_s_ = 0.0;
};

enum class VoDDelivery {
  Ergodic,   ///< frame delivers dT * K F_D(P / K) at the true gain
  Realized,  ///< frame delivers the sum of slot rates times the slot length
};

struct Scenario {
  channel::Geometry geometry = channel::Geometry::linear(2);
  channel::VelocityChain chain{0.0, 0.0, 1.0, 31, 1.0};
  planner::Limits limits;
  link::LinkParams link;  ///< alpha ignored
  traffic::RTArrivalSpec arrivals;
  traffic::QoSSpec qos;
  traffic::VideoGeneratorSpec video;
  /// Replaces the generator when set; window w plays segments from w * N_L on,
  /// wrapping around.
  std::optional<traffic::VideoTrace> video_source;
  int vod_users = 1;
  int rt_users = 1;
  int frames_per_window = 10;
  int slots_per_frame = 200;
  int windows = 60;
  double initial_velocity = 20.0;
  /// Road coordinates at the start of every window, one per user; empty draws
  /// them uniformly over the first cell.
  std::vector<double> initial_positions;
  double q_max_bits = 6e6;
  std::uint64_t seed = 1;
  numerics::SolverOptions solver;
  VoDDelivery delivery = VoDDelivery::Ergodic;
  /// Slots below which RT statistics are marked low-confidence.
  long min_rt_slots = 1000000;

  int users() const { return vod_users + rt_users; }
  void validate() const;
};

struct RTVerdict {
  double violation = 0.0;  ///< empirical P(bit delay > D_max)
  std::int64_t departed_bits = 0;
  std::int64_t late_bits = 0;
  std::int64_t backlog_bits = 0;
  bool ok = true;
  bool low_confidence = false;
};

struct EEReport {
  double vod_bits = 0.0;
  double rt_bits = 0.0;
  EnergyLedger energy;
  double ee = 0.0;
  int stalls = 0;
  double stall_s = 0.0;
  std::vector<RTVerdict> rt;
  double max_rt_violation = 0.0;
  double quality_level = -1.0;  ///< mean over delivered segments, -1 for NA
  bool feasible = true;
  std::string failure;
  long slots = 0;
  int frames = 0;

  double bits() const { return vod_bits + rt_bits; }
};

struct QoSAudit {
  int stalls = 0;
  std::vector<RTVerdict> rt;
  bool vod_ok = true;
  bool rt_ok = true;
  bool low_confidence = false;
};

QoSAudit audit_qos(const EEReport& report, const traffic::QoSSpec& qos);

/// What the engine applies to each user in one frame.
struct UserSetup {
  bool rt = false;
  int bs = 0;
  double alpha = 0.0;      ///< true large-scale gain
  double power_w = 0.0;
  int subcarriers = 0;
  double nu = 0.0;         ///< water level at power_w / subcarriers
  double beta = 0.0;
};

struct SlotRecord {
  std::vector<double> power_w;  ///< per user
  std::vector<double> rate_bps;
  double transmit_j = 0.0;
};

/// Rounds continuous subcarrier counts up; where a BS would exceed K_max the
/// users with the smallest fractional parts are rounded down instead.
std::vector<int> integerize(std::span<const planner::Allocation> alloc, std::span<const int> bs,
                            int num_bs, double k_max);

/// True state of one window.
struct WindowTruth {
  int window = 0;
  std::vector<channel::LargeScaleTrace> traces;  ///< VoD users first, then RT
  std::vector<traffic::VideoTrace> videos;
};

/// Per-frame allocation, plus optional per-VoD-user delivery caps in bits.
struct FrameDirective {
  std::vector<planner::Allocation> alloc;
  std::vector<double> vod_cap_bits;
};

/// Returns nothing when the frame cannot be planned.
using FrameSource =
    std::function<std::optional<FrameDirective>(int frame, std::vector<VoDQueue>& queues)>;

/// Slot engine. RT queues and energy persist across windows.
class Engine {
 public:
  explicit Engine(const Scenario& sc);

  /// Applies one slot: fading, water-filling, energy, RT arrivals and service.
  SlotRecord step_slot(int global_frame, int slot, std::span<const UserSetup> users);

  /// Runs N_L frames with allocations from `source`. Returns false when a frame
  /// could not be planned; the window is then abandoned.
  bool run_window(const WindowTruth& truth, const FrameSource& source);
  /// Runs a fixed plan ([user][frame] allocations).
  bool run_window(const WindowTruth& truth, const planner::WindowPlan& plan);

  EEReport report() const;
  const EnergyLedger& energy() const { return energy_; }
  const std::vector<RTQueue>& rt_queues() const { return rt_; }
  /// End of the last simulated slot on the RT clock.
  double now() const { return clock_s_; }
  const traffic::QoSExponent& qos_exponent() const { return qos_; }

 private:
  void run_frame(const WindowTruth& truth, int frame, const FrameDirective& d,
                 std::vector<VoDQueue>& queues);

  Scenario sc_;
  channel::FadingSampler fading_;
  traffic::QoSExponent qos_;
  std::vector<RTQueue> rt_;
  EnergyLedger energy_;
  double vod_bits_ = 0.0;
  double slot_weight_ = 1.0;  ///< slots of real time one simulated slot stands for
  double clock_s_ = 0.0;
  double level_sum_ = 0.0;
  int level_count_ = 0;
  int stalls_ = 0;
  double stall_s_ = 0.0;
  long slots_ = 0;
  int frames_done_ = 0;
  std::vector<double> gains_;
};

/// Draws the true and predicted traces and videos of window w.
struct WindowDraw {
  WindowTruth truth;
  std::vector<channel::LargeScaleTrace> predicted;
};
WindowDraw draw_window(const Scenario& sc, int window);

/// Planning inputs over `traces` (VoD users first) and `videos`.
planner::PlanningInputs planning_inputs(const Scenario& sc, const traffic::QoSExponent& qos,
                                        const std::vector<channel::LargeScaleTrace>& traces,
                                        const std::vector<traffic::VideoTrace>& videos);

/// Frame-by-frame planning for the heuristic and Baseline 1 on the true gains.
/// All VoD users of the window share one quality level, lowered whenever a
/// frame cannot be planned.
FrameSource per_frame_source(const Scenario& sc, planner::Policy policy, const WindowDraw& draw,
                             const traffic::QoSExponent& qos);

/// Whole run of one policy: draws every window, plans, simulates.
EEReport run_policy(const Scenario& sc, planner::Policy policy);

}  // namespace predalloc::sim

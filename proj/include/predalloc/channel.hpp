#pragma once

#include "predalloc/random.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace predalloc::channel {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Straight road starting at A = road_start, with base stations placed every
/// bs_spacing metres at perpendicular distance road_offset. BS n sits abeam of
/// road coordinate (n + 1/2) * bs_spacing, so cell n covers [n, n+1) * spacing.
struct Geometry {
  std::vector<Point> bs_positions;
  Point road_start{};
  Point road_direction{1.0, 0.0};  ///< unit vector
  double road_length = 0.0;
  double bs_spacing = 500.0;
  double road_offset = 100.0;

  static Geometry linear(int num_bs, double bs_spacing = 500.0, double road_offset = 100.0);

  int num_bs() const { return static_cast<int>(bs_positions.size()); }
  Point road_point(double s) const;
  /// Extent of the first cell along the road (perpendicular-bisector interval).
  double first_cell_end() const { return bs_spacing; }
  /// Largest BS-to-road distance inside a cell.
  double cell_radius() const;
  void validate() const;
};

double distance(const Point& a, const Point& b);

/// 35.3 + 37.6 log10(D) with D clamped to at least 1 m.
double pathloss_db(double distance_m);

/// Linear gain 10^{-pathloss/10}.
double gain_from_distance(double distance_m);

/// Velocity Markov chain on the uniform grid v_min, v_min + dv, ..., with
/// tridiagonal transitions of probability q to each neighbour.
struct VelocityChain {
  double q = 0.0;
  double v_min = 0.0;
  double dv = 1.0;
  int states = 31;
  double frame_s = 1.0;

  double velocity(int state) const { return v_min + dv * state; }
  /// State index of v; throws when v is not a chain state.
  int state_of(double v) const;
  void validate() const;
};

/// Row-stochastic tridiagonal transition matrix, row-major U x U.
std::vector<std::vector<double>> build_transition_matrix(double q, int states);

struct MobilityTrace {
  std::vector<double> positions;   ///< road coordinate at the start of each frame (m)
  std::vector<double> velocities;  ///< velocity during each frame (m/s)
};

MobilityTrace sample_mobility(const VelocityChain& chain, double initial_position,
                              double initial_velocity, int frames, CounterStream& rng);

enum class TraceKind { True, Predicted };

struct LargeScaleTrace {
  std::vector<double> alpha;  ///< linear gain to the associated BS, per frame
  std::vector<int> bs;        ///< associated BS per frame
  TraceKind kind = TraceKind::True;

  int frames() const { return static_cast<int>(alpha.size()); }
};

/// Gain from the road position to one BS.
double gain_to_bs(const Geometry& geo, double road_position, int bs);

/// Strongest BS for a road position; ties go to the lower index.
int associate(const Geometry& geo, double road_position);

LargeScaleTrace large_scale_trace(const Geometry& geo, const MobilityTrace& mobility,
                                  TraceKind kind = TraceKind::True);

/// Constant-velocity extrapolation from the initial state.
LargeScaleTrace predict_trace(const Geometry& geo, double initial_position,
                              double initial_velocity, int frames, double frame_s);

/// 50th percentile; the lower median for even lengths.
double median_gain(std::span<const double> alpha);

/// Unit-mean exponential small-scale gains addressed by
/// (seed, user, frame, slot, subcarrier).
class FadingSampler {
 public:
  explicit FadingSampler(std::uint64_t seed) : seed_(seed) {}

  double sample(std::uint32_t user, std::uint32_t frame, std::uint32_t slot,
                std::uint32_t subcarrier) const;

  /// Fills out[k] = sample(user, frame, slot, k).
  void sample_block(std::uint32_t user, std::uint32_t frame, std::uint32_t slot,
                    std::span<double> out) const;

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

/// Delimited trace table: header "user,frame,alpha,bs_index", one record per
/// (user, frame). Frames are 0-based.
void write_traces(std::ostream& out, const std::vector<LargeScaleTrace>& traces);
std::vector<LargeScaleTrace> read_traces(std::istream& in, TraceKind kind = TraceKind::True);

}  // namespace predalloc::channel

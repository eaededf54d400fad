#include "predalloc/channel.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace predalloc::channel {

Geometry Geometry::linear(int num_bs, double bs_spacing, double road_offset) {
  Geometry g;
  g.bs_spacing = bs_spacing;
  g.road_offset = road_offset;
  g.road_length = num_bs * bs_spacing;
  for (int n = 0; n < num_bs; ++n) {
    g.bs_positions.push_back({bs_spacing * (n + 0.5), road_offset});
  }
  g.validate();
  return g;
}

Point Geometry::road_point(double s) const {
  return {road_start.x + s * road_direction.x, road_start.y + s * road_direction.y};
}

double Geometry::cell_radius() const {
  return std::hypot(0.5 * bs_spacing, road_offset);
}

void Geometry::validate() const {
  if (!(bs_spacing > 0.0)) throw std::invalid_argument("geometry.bs_spacing must be positive");
  if (!(road_offset > 0.0)) throw std::invalid_argument("geometry.road_offset must be positive");
  if (bs_positions.empty()) throw std::invalid_argument("geometry needs at least one BS");
}

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

double pathloss_db(double distance_m) {
  return 35.3 + 37.6 * std::log10(std::max(distance_m, 1.0));
}

double gain_from_distance(double distance_m) {
  return std::pow(10.0, -pathloss_db(distance_m) / 10.0);
}

int VelocityChain::state_of(double v) const {
  const double idx = (v - v_min) / dv;
  const long r = std::lround(idx);
  if (std::abs(idx - static_cast<double>(r)) > 1e-9 || r < 0 || r >= states) {
    throw std::invalid_argument("velocity " + std::to_string(v) + " is not a chain state");
  }
  return static_cast<int>(r);
}

void VelocityChain::validate() const {
  if (!(q >= 0.0 && q <= 0.5)) throw std::invalid_argument("mobility.q must lie in [0, 0.5]");
  if (states < 1) throw std::invalid_argument("mobility.states must be at least 1");
  if (!(dv > 0.0)) throw std::invalid_argument("mobility.dv must be positive");
  if (!(v_min >= 0.0)) throw std::invalid_argument("mobility.v_min must be nonnegative");
  if (!(frame_s > 0.0)) throw std::invalid_argument("mobility.frame_s must be positive");
}

std::vector<std::vector<double>> build_transition_matrix(double q, int states) {
  if (!(q >= 0.0 && q <= 0.5)) {
    throw std::invalid_argument("transition probability q must lie in [0, 0.5]");
  }
  if (states < 1) throw std::invalid_argument("chain needs at least one state");
  std::vector<std::vector<double>> m(states, std::vector<double>(states, 0.0));
  if (states == 1) {
    m[0][0] = 1.0;
    return m;
  }
  for (int u = 0; u < states; ++u) {
    const bool edge = (u == 0 || u == states - 1);
    m[u][u] = edge ? 1.0 - q : 1.0 - 2.0 * q;
    if (u > 0) m[u][u - 1] = q;
    if (u + 1 < states) m[u][u + 1] = q;
  }
  return m;
}

MobilityTrace sample_mobility(const VelocityChain& chain, double initial_position,
                              double initial_velocity, int frames, CounterStream& rng) {
  chain.validate();
  int state = chain.state_of(initial_velocity);
  MobilityTrace t;
  t.positions.reserve(frames);
  t.velocities.reserve(frames);
  double pos = initial_position;
  for (int i = 0; i < frames; ++i) {
    t.positions.push_back(pos);
    const double v = chain.velocity(state);
    t.velocities.push_back(v);
    pos += v * chain.frame_s;
    // Transition for the next frame: down with q, up with q, reflecting edges stay.
    const double u = rng.uniform();
    if (u < chain.q) {
      if (state > 0) --state;
    } else if (u < 2.0 * chain.q) {
      if (state + 1 < chain.states) ++state;
    }
  }
  return t;
}

double gain_to_bs(const Geometry& geo, double road_position, int bs) {
  return gain_from_distance(distance(geo.road_point(road_position), geo.bs_positions.at(bs)));
}

int associate(const Geometry& geo, double road_position) {
  const Point p = geo.road_point(road_position);
  int best = 0;
  double best_d = distance(p, geo.bs_positions[0]);
  for (int n = 1; n < geo.num_bs(); ++n) {
    const double d = distance(p, geo.bs_positions[n]);
    if (d < best_d) {
      best_d = d;
      best = n;
    }
  }
  return best;
}

LargeScaleTrace large_scale_trace(const Geometry& geo, const MobilityTrace& mobility,
                                  TraceKind kind) {
  LargeScaleTrace t;
  t.kind = kind;
  for (double pos : mobility.positions) {
    const int bs = associate(geo, pos);
    t.bs.push_back(bs);
    t.alpha.push_back(gain_to_bs(geo, pos, bs));
  }
  return t;
}

LargeScaleTrace predict_trace(const Geometry& geo, double initial_position,
                              double initial_velocity, int frames, double frame_s) {
  MobilityTrace m;
  for (int i = 0; i < frames; ++i) {
    m.positions.push_back(initial_position + initial_velocity * frame_s * i);
    m.velocities.push_back(initial_velocity);
  }
  return large_scale_trace(geo, m, TraceKind::Predicted);
}

double median_gain(std::span<const double> alpha) {
  if (alpha.empty()) throw std::invalid_argument("median_gain: empty trace");
  std::vector<double> v(alpha.begin(), alpha.end());
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>((v.size() - 1) / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

namespace {

// Two subcarriers share one Philox block.
Philox4x32::Counter fading_counter(std::uint32_t user, std::uint32_t frame, std::uint32_t slot,
                                   std::uint32_t pair) {
  return {(static_cast<std::uint32_t>(StreamTag::Fading) << 24) | (user & 0x00FFFFFFu), frame,
          slot, pair};
}

}  // namespace

double FadingSampler::sample(std::uint32_t user, std::uint32_t frame, std::uint32_t slot,
                             std::uint32_t subcarrier) const {
  const auto out = Philox4x32::block(fading_counter(user, frame, slot, subcarrier >> 1),
                                     Philox4x32::key_from_seed(seed_));
  const double u = (subcarrier & 1u) ? Philox4x32::to_unit(out[2], out[3])
                                     : Philox4x32::to_unit(out[0], out[1]);
  return -std::log(u);
}

void FadingSampler::sample_block(std::uint32_t user, std::uint32_t frame, std::uint32_t slot,
                                 std::span<double> out) const {
  const auto key = Philox4x32::key_from_seed(seed_);
  const std::size_t n = out.size();
  for (std::size_t k = 0; k < n; k += 2) {
    const auto r = Philox4x32::block(
        fading_counter(user, frame, slot, static_cast<std::uint32_t>(k >> 1)), key);
    out[k] = -std::log(Philox4x32::to_unit(r[0], r[1]));
    if (k + 1 < n) out[k + 1] = -std::log(Philox4x32::to_unit(r[2], r[3]));
  }
}

void write_traces(std::ostream& out, const std::vector<LargeScaleTrace>& traces) {
  out << "user,frame,alpha,bs_index\n";
  std::ostringstream line;
  line.precision(17);
  for (std::size_t m = 0; m < traces.size(); ++m) {
    for (int i = 0; i < traces[m].frames(); ++i) {
      line.str({});
      line << m << ',' << i << ',' << traces[m].alpha[i] << ',' << traces[m].bs[i] << '\n';
      out << line.str();
    }
  }
}

std::vector<LargeScaleTrace> read_traces(std::istream& in, TraceKind kind) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("trace file: missing header");
  if (line.rfind("user,frame,alpha,bs_index", 0) != 0) {
    throw std::runtime_error("trace file: unexpected header '" + line + "'");
  }
  std::vector<LargeScaleTrace> traces;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::istringstream ss(line);
    long user = -1, frame = -1;
    int bs = -1;
    double alpha = 0.0;
    char c1 = 0, c2 = 0, c3 = 0;
    if (!(ss >> user >> c1 >> frame >> c2 >> alpha >> c3 >> bs) || c1 != ',' || c2 != ',' ||
        c3 != ',' || user < 0 || frame < 0 || bs < 0 || !(alpha > 0.0)) {
      throw std::runtime_error("trace file line " + std::to_string(lineno) + ": malformed record");
    }
    if (static_cast<std::size_t>(user) >= traces.size()) traces.resize(user + 1);
    auto& t = traces[user];
    t.kind = kind;
    if (frame != t.frames()) {
      throw std::runtime_error("trace file line " + std::to_string(lineno) +
                               ": frames must be consecutive per user");
    }
    t.alpha.push_back(alpha);
    t.bs.push_back(bs);
  }
  return traces;
}

}  // namespace predalloc::channel

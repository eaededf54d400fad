#pragma once

#include "predalloc/random.hpp"

#include <array>
#include <iosfwd>
#include <stdexcept>
#include <vector>

namespace predalloc::traffic {

inline constexpr int kEnhancementLayers = 5;

/// Layer sizes of one video segment in bits.
struct Segment {
  double base_bits = 0.0;
  std::array<double, kEnhancementLayers> enh_bits{};

  /// Base plus the first `level` enhancement layers.
  double bits(int level) const;
};

/// Segments R_1 .. R_{N_L+1} of one window (index 0 holds R_1) delivered at a
/// uniform quality level.
struct VideoTrace {
  std::vector<Segment> segments;
  int level = kEnhancementLayers;

  int count() const { return static_cast<int>(segments.size()); }
  /// Size of R_{index} (1-based, as in the playback order).
  double size(int index) const { return segments.at(index - 1).bits(level); }
  double total_bits() const;
};

VideoTrace reduce_quality(const VideoTrace& trace, int level);

struct VideoGeneratorSpec {
  double base_rate_bps = 800e3;
  double enh_rate_bps = 240e3;
  double jitter = 0.2;       ///< segment scale drawn uniformly from [1 - jitter, 1 + jitter]
  double segment_s = 1.0;
};

/// Synthetic layered trace with `count` segments; one jitter factor per segment.
VideoTrace generate_video(const VideoGeneratorSpec& spec, int count, CounterStream& rng);

/// Delimited table "segment_index,base_bits,enh1,...,enh5"; indices start at 1.
void write_video(std::ostream& out, const VideoTrace& trace);
VideoTrace read_video(std::istream& in);

/// Compound Poisson arrivals: Poisson packet count at rate lambda_a, packet
/// sizes exponential with mean 1 / lambda_u bits.
struct RTArrivalSpec {
  double lambda_a = 500.0;
  double lambda_u = 1.0 / 4000.0;

  double mean_rate() const { return lambda_a / lambda_u; }
  void validate() const;
};

struct QoSSpec {
  double d_max = 0.05;
  double eps_d = 0.02;

  void validate() const;
};

/// Per-bit exponent theta and the link shape beta = theta * tau * B / ln 2.
struct QoSExponent {
  double theta = 0.0;
  double beta = 0.0;
};

class QoSInfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// lambda_a / (lambda_u - theta) in bits/s.
double effective_bandwidth(const RTArrivalSpec& spec, double theta);

/// Root of theta * E_B(theta) * D_max = ln(1 / eps_D) on (0, lambda_u).
QoSExponent solve_qos_exponent(const RTArrivalSpec& spec, const QoSSpec& qos, double slot_s,
                               double subcarrier_hz);

/// Whether slot_s << d_max << frame_s holds by at least the given ratio.
bool timescale_separation_ok(const QoSSpec& qos, double slot_s, double frame_s,
                             double ratio = 5.0);

struct Packet {
  double arrival_s = 0.0;  ///< offset inside the slot
  double bits = 0.0;
};

struct SlotArrivals {
  std::vector<Packet> packets;
  double bits = 0.0;
};

SlotArrivals sample_arrivals(const RTArrivalSpec& spec, double slot_s, CounterStream& rng);

}  // namespace predalloc::traffic

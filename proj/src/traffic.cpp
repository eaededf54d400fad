#include "predalloc/traffic.hpp"

#include "predalloc/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

namespace predalloc::traffic {

double Segment::bits(int level) const {
  double total = base_bits;
  for (int l = 0; l < level; ++l) total += enh_bits[l];
  return total;
}

double VideoTrace::total_bits() const {
  double total = 0.0;
  for (const auto& s : segments) total += s.bits(level);
  return total;
}

VideoTrace reduce_quality(const VideoTrace& trace, int level) {
  if (level < 0 || level > kEnhancementLayers) {
    throw std::invalid_argument("quality level must lie in [0, 5]");
  }
  VideoTrace out = trace;
  out.level = level;
  return out;
}

VideoTrace generate_video(const VideoGeneratorSpec& spec, int count, CounterStream& rng) {
  VideoTrace t;
  t.segments.reserve(count);
  for (int i = 0; i < count; ++i) {
    const double scale = 1.0 - spec.jitter + 2.0 * spec.jitter * rng.uniform();
    Segment s;
    s.base_bits = std::round(spec.base_rate_bps * spec.segment_s * scale);
    for (auto& e : s.enh_bits) e = std::round(spec.enh_rate_bps * spec.segment_s * scale);
    t.segments.push_back(s);
  }
  return t;
}

void write_video(std::ostream& out, const VideoTrace& trace) {
  out << "segment_index,base_bits";
  for (int l = 1; l <= kEnhancementLayers; ++l) out << ",enh" << l;
  out << '\n';
  std::ostringstream line;
  line.precision(17);
  for (int i = 0; i < trace.count(); ++i) {
    line.str({});
    line << (i + 1) << ',' << trace.segments[i].base_bits;
    for (double e : trace.segments[i].enh_bits) line << ',' << e;
    line << '\n';
    out << line.str();
  }
}

VideoTrace read_video(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("segment_index,base_bits", 0) != 0) {
    throw std::runtime_error("video trace: expected header 'segment_index,base_bits,enh1..enh5'");
  }
  VideoTrace t;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    int index = 0;
    Segment s;
    bool ok = static_cast<bool>(ss >> index >> s.base_bits);
    for (auto& e : s.enh_bits) ok = ok && static_cast<bool>(ss >> e);
    ok = ok && index == t.count() + 1 && s.base_bits > 0.0;
    for (double e : s.enh_bits) ok = ok && e > 0.0;
    if (!ok) throw std::runtime_error("video trace line " + std::to_string(lineno) + ": malformed");
    t.segments.push_back(s);
  }
  return t;
}

void RTArrivalSpec::validate() const {
  if (!(lambda_a > 0.0)) throw std::invalid_argument("traffic.lambda_a must be positive");
  if (!(lambda_u > 0.0)) throw std::invalid_argument("traffic.lambda_u must be positive");
}

void QoSSpec::validate() const {
  if (!(d_max > 0.0)) throw std::invalid_argument("traffic.d_max must be positive");
  if (!(eps_d > 0.0 && eps_d < 1.0)) throw std::invalid_argument("traffic.eps_d must lie in (0, 1)");
}

double effective_bandwidth(const RTArrivalSpec& spec, double theta) {
  if (!(theta > 0.0)) throw numerics::DomainError("effective_bandwidth: theta must be positive");
  if (!(theta < spec.lambda_u)) {
    throw numerics::DomainError("effective_bandwidth: theta >= lambda_u, MGF diverges");
  }
  return spec.lambda_a / (spec.lambda_u - theta);
}

QoSExponent solve_qos_exponent(const RTArrivalSpec& spec, const QoSSpec& qos, double slot_s,
                               double subcarrier_hz) {
  spec.validate();
  qos.validate();
  const double target = std::log(1.0 / qos.eps_d);
  auto residual = [&](double theta) {
    if (theta <= 0.0) return -target;
    return theta * effective_bandwidth(spec, theta) * qos.d_max - target;
  };
  // The left side diverges at lambda_u; a sign change is guaranteed just below it.
  double hi = spec.lambda_u * (1.0 - 1e-12);
  if (!(residual(hi) > 0.0)) {
    throw QoSInfeasibleError("QoS exponent: no root below lambda_u");
  }
  const double theta = numerics::find_root({residual, 0.0, hi}, 1e-14 * spec.lambda_u);
  return {theta, theta * slot_s * subcarrier_hz / std::numbers::ln2};
}

bool timescale_separation_ok(const QoSSpec& qos, double slot_s, double frame_s, double ratio) {
  return qos.d_max >= ratio * slot_s && frame_s >= ratio * qos.d_max;
}

SlotArrivals sample_arrivals(const RTArrivalSpec& spec, double slot_s, CounterStream& rng) {
  SlotArrivals out;
  // Knuth's product method; the slot mean lambda_a * tau is small.
  const double limit = std::exp(-spec.lambda_a * slot_s);
  double prod = rng.uniform();
  int n = 0;
  while (prod > limit) {
    ++n;
    prod *= rng.uniform();
  }
  out.packets.reserve(n);
  for (int k = 0; k < n; ++k) {
    Packet p;
    p.arrival_s = rng.uniform() * slot_s;
    p.bits = rng.exponential(1.0 / spec.lambda_u);
    out.packets.push_back(p);
  }
  std::sort(out.packets.begin(), out.packets.end(),
            [](const Packet& a, const Packet& b) { return a.arrival_s < b.arrival_s; });
  for (const auto& p : out.packets) out.bits += p.bits;
  return out;
}

}  // namespace predalloc::traffic

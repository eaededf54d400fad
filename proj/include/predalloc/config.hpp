#pragma once

#include "predalloc/planner.hpp"
#include "predalloc/simulator.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace predalloc::config {

/// Invalid or unparseable configuration. `field` names the offending key
/// (dotted path) when there is one; `line` is 1-based, 0 when unknown.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message, int line = 0);
  const std::string& field() const { return field_; }
  const std::string& detail() const { return detail_; }
  int line() const { return line_; }

 private:
  std::string field_;
  std::string detail_;
  int line_;
};

struct GeometryBlock {
  int num_bs = 0;  ///< 0: enough BSs to cover the fastest user over one window
  double bs_spacing_m = 500.0;
  double road_offset_m = 100.0;
};

struct WindowBlock {
  int frames = 60;  ///< N_L
  double frame_s = 1.0;
  double slot_s = 0.005;
  int slots_per_frame = 200;
};

struct RadioBlock {
  double p_max_w = 40.0;
  double k_max = 512.0;
  double subcarrier_hz = 15e3;
  double rho = 0.388;
  double p_c_w = 1.08e-3;
  double p_0_w = 1.044;
  double n0_dbm_hz = -173.0;
  double phi = 1.0;
};

struct UsersBlock {
  int vod = 1;
  int rt = 1;
  double initial_velocity_mps = 20.0;
  std::vector<double> initial_positions_m;
  double q_max_bits = 6e6;
};

struct TrafficBlock {
  std::string video_trace;  ///< path to a segment table; empty uses the generator
  double base_rate_bps = 800e3;
  double enh_rate_bps = 240e3;
  double jitter = 0.2;
  double lambda_a = 500.0;
  double lambda_u = 1.0 / 4000.0;
  double d_max_s = 0.05;
  double eps_d = 0.02;
};

struct MobilityBlock {
  double q = 0.0;
  double v_min_mps = 0.0;
  double dv_mps = 1.0;
  int states = 31;
};

struct RunBlock {
  std::uint64_t seed = 1;
  int replications = 1;
  double duration_s = 600.0;
  sim::VoDDelivery delivery = sim::VoDDelivery::Ergodic;
};

struct SolverBlock {
  double gap_rel_tol = 1e-10;
  double kkt_tol = 1e-6;
  int max_newton_steps = 3000;
};

struct ScenarioConfig {
  GeometryBlock geometry;
  WindowBlock window;
  RadioBlock radio;
  UsersBlock users;
  TrafficBlock traffic;
  MobilityBlock mobility;
  std::vector<planner::Policy> policies{planner::Policy::Optimal};
  RunBlock run;
  SolverBlock solver;

  /// Throws ConfigError naming the first invalid field.
  void validate() const;
  int windows() const;
  int resolved_num_bs() const;
  /// Simulation scenario for one seed. Reads the video trace file if set.
  sim::Scenario scenario(std::uint64_t seed) const;
};

/// Parses nested key-value text (YAML). Omitted keys keep their defaults;
/// unknown keys are rejected.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);
/// Every field, in the layout parse_config reads.
std::string dump_config(const ScenarioConfig& cfg);

/// Replaces one value by dotted key, e.g. ("users.vod", "3").
ScenarioConfig with_override(const ScenarioConfig& cfg, const std::string& key,
                             const std::string& value);

/// One swept parameter, optionally varied in lockstep with others, plus
/// overrides applied at every point. `base` optionally names the config the
/// sweep starts from.
struct SweepSpec {
  std::string base;
  std::string parameter;
  std::vector<std::string> values;
  std::vector<std::pair<std::string, std::vector<std::string>>> with;
  std::vector<std::pair<std::string, std::string>> fixed;

  void validate(const ScenarioConfig& base) const;
  int points() const { return static_cast<int>(values.size()); }
  ScenarioConfig point(const ScenarioConfig& base, int index) const;
};

SweepSpec parse_sweep(const std::string& text);
/// A relative `base` is resolved against the sweep file's directory.
SweepSpec load_sweep(const std::string& path);

}  // namespace predalloc::config

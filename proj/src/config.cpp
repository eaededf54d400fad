#include "predalloc/config.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <filesystem>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <type_traits>

namespace predalloc::config {

ConfigError::ConfigError(std::string field, const std::string& message, int line)
    : std::runtime_error((line > 0 ? "line " + std::to_string(line) + ": " : std::string{}) +
                         (field.empty() ? message : field + ": " + message)),
      field_(std::move(field)),
      detail_(message),
      line_(line) {}

namespace {

using Values = std::vector<std::string>;

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double to_double(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a number, got '" + text + "'");
  }
  if (used != text.size() || !std::isfinite(v)) {
    throw ConfigError(key, "expected a number, got '" + text + "'");
  }
  return v;
}

long long to_integer(const std::string& key, const std::string& text) {
  const double v = to_double(key, text);
  if (v != std::floor(v) || std::abs(v) > 9.0e15) {
    throw ConfigError(key, "expected an integer, got '" + text + "'");
  }
  return static_cast<long long>(v);
}

struct Field {
  std::string key;
  bool list = false;
  std::function<void(ScenarioConfig&, const Values&)> set;
  std::function<Values(const ScenarioConfig&)> get;
};

template <typename Get>
Field real(std::string key, Get member) {
  Field f{key, false, {}, {}};
  f.set = [key, member](ScenarioConfig& c, const Values& v) { member(c) = to_double(key, v.at(0)); };
  f.get = [member](const ScenarioConfig& c) {
    return Values{format_double(member(const_cast<ScenarioConfig&>(c)))};
  };
  return f;
}

template <typename Get>
Field integer(std::string key, Get member) {
  Field f{key, false, {}, {}};
  f.set = [key, member](ScenarioConfig& c, const Values& v) {
    using T = std::remove_reference_t<decltype(member(c))>;
    if constexpr (std::is_same_v<T, std::uint64_t>) {
      const std::string& s = v.at(0);
      std::uint64_t u = 0;
      const auto r = std::from_chars(s.data(), s.data() + s.size(), u);
      if (r.ec == std::errc{} && r.ptr == s.data() + s.size()) {
        member(c) = u;
        return;
      }
    }
    const long long x = to_integer(key, v.at(0));
    if (x < 0 && std::is_unsigned_v<T>) throw ConfigError(key, "must be nonnegative");
    if (x > static_cast<long long>(std::numeric_limits<int>::max()) && !std::is_same_v<T, std::uint64_t>) {
      throw ConfigError(key, "value out of range");
    }
    member(c) = static_cast<T>(x);
  };
  f.get = [member](const ScenarioConfig& c) {
    return Values{std::to_string(member(const_cast<ScenarioConfig&>(c)))};
  };
  return f;
}

const std::vector<Field>& fields() {
  static const std::vector<Field> all = [] {
    std::vector<Field> f;
    f.push_back(integer("geometry.num_bs", [](ScenarioConfig& c) -> int& { return c.geometry.num_bs; }));
    f.push_back(real("geometry.bs_spacing_m", [](ScenarioConfig& c) -> double& { return c.geometry.bs_spacing_m; }));
    f.push_back(real("geometry.road_offset_m", [](ScenarioConfig& c) -> double& { return c.geometry.road_offset_m; }));
    f.push_back(integer("window.frames", [](ScenarioConfig& c) -> int& { return c.window.frames; }));
    f.push_back(real("window.frame_s", [](ScenarioConfig& c) -> double& { return c.window.frame_s; }));
    f.push_back(real("window.slot_s", [](ScenarioConfig& c) -> double& { return c.window.slot_s; }));
    f.push_back(integer("window.slots_per_frame", [](ScenarioConfig& c) -> int& { return c.window.slots_per_frame; }));
    f.push_back(real("radio.p_max_w", [](ScenarioConfig& c) -> double& { return c.radio.p_max_w; }));
    f.push_back(real("radio.k_max", [](ScenarioConfig& c) -> double& { return c.radio.k_max; }));
    f.push_back(real("radio.subcarrier_hz", [](ScenarioConfig& c) -> double& { return c.radio.subcarrier_hz; }));
    f.push_back(real("radio.rho", [](ScenarioConfig& c) -> double& { return c.radio.rho; }));
    f.push_back(real("radio.p_c_w", [](ScenarioConfig& c) -> double& { return c.radio.p_c_w; }));
    f.push_back(real("radio.p_0_w", [](ScenarioConfig& c) -> double& { return c.radio.p_0_w; }));
    f.push_back(real("radio.n0_dbm_hz", [](ScenarioConfig& c) -> double& { return c.radio.n0_dbm_hz; }));
    f.push_back(real("radio.phi", [](ScenarioConfig& c) -> double& { return c.radio.phi; }));
    f.push_back(integer("users.vod", [](ScenarioConfig& c) -> int& { return c.users.vod; }));
    f.push_back(integer("users.rt", [](ScenarioConfig& c) -> int& { return c.users.rt; }));
    f.push_back(real("users.initial_velocity_mps", [](ScenarioConfig& c) -> double& { return c.users.initial_velocity_mps; }));
    {
      Field p{"users.initial_positions_m", true, {}, {}};
      p.set = [](ScenarioConfig& c, const Values& v) {
        c.users.initial_positions_m.clear();
        for (const auto& s : v) c.users.initial_positions_m.push_back(to_double("users.initial_positions_m", s));
      };
      p.get = [](const ScenarioConfig& c) {
        Values out;
        for (double x : c.users.initial_positions_m) out.push_back(format_double(x));
        return out;
      };
      f.push_back(p);
    }
    f.push_back(real("users.q_max_bits", [](ScenarioConfig& c) -> double& { return c.users.q_max_bits; }));
    {
      Field p{"traffic.video_trace", false, {}, {}};
      p.set = [](ScenarioConfig& c, const Values& v) { c.traffic.video_trace = v.at(0); };
      p.get = [](const ScenarioConfig& c) { return Values{c.traffic.video_trace}; };
      f.push_back(p);
    }
    f.push_back(real("traffic.base_rate_bps", [](ScenarioConfig& c) -> double& { return c.traffic.base_rate_bps; }));
    f.push_back(real("traffic.enh_rate_bps", [](ScenarioConfig& c) -> double& { return c.traffic.enh_rate_bps; }));
    f.push_back(real("traffic.jitter", [](ScenarioConfig& c) -> double& { return c.traffic.jitter; }));
    f.push_back(real("traffic.lambda_a", [](ScenarioConfig& c) -> double& { return c.traffic.lambda_a; }));
    f.push_back(real("traffic.lambda_u", [](ScenarioConfig& c) -> double& { return c.traffic.lambda_u; }));
    f.push_back(real("traffic.d_max_s", [](ScenarioConfig& c) -> double& { return c.traffic.d_max_s; }));
    f.push_back(real("traffic.eps_d", [](ScenarioConfig& c) -> double& { return c.traffic.eps_d; }));
    f.push_back(real("mobility.q", [](ScenarioConfig& c) -> double& { return c.mobility.q; }));
    f.push_back(real("mobility.v_min_mps", [](ScenarioConfig& c) -> double& { return c.mobility.v_min_mps; }));
    f.push_back(real("mobility.dv_mps", [](ScenarioConfig& c) -> double& { return c.mobility.dv_mps; }));
    f.push_back(integer("mobility.states", [](ScenarioConfig& c) -> int& { return c.mobility.states; }));
    {
      Field p{"policy", true, {}, {}};
      p.set = [](ScenarioConfig& c, const Values& v) {
        if (v.empty()) throw ConfigError("policy", "at least one policy required");
        c.policies.clear();
        for (const auto& name : v) {
          const auto pol = planner::parse_policy(name);
          if (!pol) throw ConfigError("policy", "unknown policy '" + name + "'");
          c.policies.push_back(*pol);
        }
      };
      p.get = [](const ScenarioConfig& c) {
        Values out;
        for (auto pol : c.policies) out.emplace_back(planner::to_string(pol));
        return out;
      };
      f.push_back(p);
    }
    f.push_back(integer("run.seed", [](ScenarioConfig& c) -> std::uint64_t& { return c.run.seed; }));
    f.push_back(integer("run.replications", [](ScenarioConfig& c) -> int& { return c.run.replications; }));
    f.push_back(real("run.duration_s", [](ScenarioConfig& c) -> double& { return c.run.duration_s; }));
    {
      Field p{"run.delivery", false, {}, {}};
      p.set = [](ScenarioConfig& c, const Values& v) {
        if (v.at(0) == "ergodic") c.run.delivery = sim::VoDDelivery::Ergodic;
        else if (v.at(0) == "realized") c.run.delivery = sim::VoDDelivery::Realized;
        else throw ConfigError("run.delivery", "expected 'ergodic' or 'realized'");
      };
      p.get = [](const ScenarioConfig& c) {
        return Values{c.run.delivery == sim::VoDDelivery::Ergodic ? "ergodic" : "realized"};
      };
      f.push_back(p);
    }
    f.push_back(real("solver.gap_rel_tol", [](ScenarioConfig& c) -> double& { return c.solver.gap_rel_tol; }));
    f.push_back(real("solver.kkt_tol", [](ScenarioConfig& c) -> double& { return c.solver.kkt_tol; }));
    f.push_back(integer("solver.max_newton_steps", [](ScenarioConfig& c) -> int& { return c.solver.max_newton_steps; }));
    return f;
  }();
  return all;
}

const Field* find_field(const std::string& key) {
  for (const auto& f : fields()) {
    if (f.key == key) return &f;
  }
  return nullptr;
}

int line_of(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : 0; }

Values node_values(const Field& f, const YAML::Node& n) {
  Values v;
  if (n.IsScalar()) {
    v.push_back(n.Scalar());
  } else if (n.IsSequence() && f.list) {
    for (const auto& item : n) {
      if (!item.IsScalar()) throw ConfigError(f.key, "list entries must be scalars", line_of(item));
      v.push_back(item.Scalar());
    }
  } else if (n.IsNull() && f.list) {
  } else {
    throw ConfigError(f.key, f.list ? "expected a value or a list" : "expected a single value",
                      line_of(n));
  }
  return v;
}

void apply(ScenarioConfig& cfg, const Field& f, const YAML::Node& n) {
  try {
    f.set(cfg, node_values(f, n));
  } catch (const ConfigError& e) {
    if (e.line() > 0) throw;
    throw ConfigError(e.field(), e.detail(), line_of(n));
  }
}

YAML::Node parse_yaml(const std::string& text) {
  try {
    return YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("", "parse error: " + e.msg, e.mark.line + 1);
  }
}

void require(bool ok, const char* field, const std::string& what) {
  if (!ok) throw ConfigError(field, what);
}

}  // namespace

// ---------------------------------------------------------------------------

ScenarioConfig parse_config(const std::string& text) {
  const YAML::Node root = parse_yaml(text);
  ScenarioConfig cfg;
  if (root.IsNull()) {
    cfg.validate();
    return cfg;
  }
  if (!root.IsMap()) throw ConfigError("", "top level must be a map of blocks", line_of(root));
  std::map<std::string, int> lines;
  for (const auto& block : root) {
    const std::string name = block.first.as<std::string>();
    if (name == "policy" || name == "policies") {
      lines["policy"] = line_of(block.first);
      apply(cfg, *find_field("policy"), block.second);
      continue;
    }
    bool known = false;
    for (const auto& f : fields()) known = known || f.key.rfind(name + ".", 0) == 0;
    if (!known) throw ConfigError(name, "unknown block", line_of(block.first));
    if (block.second.IsNull()) continue;
    if (!block.second.IsMap()) throw ConfigError(name, "unknown or misplaced key", line_of(block.first));
    for (const auto& item : block.second) {
      const std::string key = name + "." + item.first.as<std::string>();
      const Field* f = find_field(key);
      if (!f) throw ConfigError(key, "unknown key", line_of(item.first));
      lines[key] = line_of(item.first);
      apply(cfg, *f, item.second);
    }
  }
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    const auto it = lines.find(e.field());
    if (it == lines.end()) throw;
    throw ConfigError(e.field(), e.detail(), it->second);
  }
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const ScenarioConfig& cfg) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  std::string open;
  for (const auto& f : fields()) {
    const auto dot = f.key.find('.');
    const std::string block = dot == std::string::npos ? "" : f.key.substr(0, dot);
    if (block != open) {
      if (!open.empty()) out << YAML::EndMap;
      if (!block.empty()) out << YAML::Key << block << YAML::Value << YAML::BeginMap;
      open = block;
    }
    const std::string name = dot == std::string::npos ? f.key : f.key.substr(dot + 1);
    const Values v = f.get(cfg);
    out << YAML::Key << name << YAML::Value;
    if (f.list) {
      out << YAML::Flow << YAML::BeginSeq;
      for (const auto& s : v) out << s;
      out << YAML::EndSeq;
    } else if (f.key == "traffic.video_trace") {
      out << YAML::DoubleQuoted << v.at(0);
    } else {
      out << v.at(0);
    }
  }
  if (!open.empty()) out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

ScenarioConfig with_override(const ScenarioConfig& cfg, const std::string& key,
                             const std::string& value) {
  const Field* f = find_field(key == "policies" ? "policy" : key);
  if (!f) throw ConfigError(key, "unknown key");
  ScenarioConfig out = cfg;
  try {
    YAML::Node n = parse_yaml(value.empty() ? "\"\"" : value);
    if (!f->list && !n.IsScalar()) n = YAML::Node(value);
    apply(out, *f, n);
  } catch (const ConfigError& e) {
    // Lines of a one-value snippet mean nothing to the caller.
    throw ConfigError(e.field().empty() ? key : e.field(), e.detail());
  }
  out.validate();
  return out;
}

// ---------------------------------------------------------------------------

int ScenarioConfig::windows() const {
  return static_cast<int>(std::llround(run.duration_s / (window.frames * window.frame_s)));
}

int ScenarioConfig::resolved_num_bs() const {
  if (geometry.num_bs > 0) return geometry.num_bs;
  const double v_max = mobility.v_min_mps + mobility.dv_mps * (mobility.states - 1);
  const double reach = geometry.bs_spacing_m + v_max * window.frames * window.frame_s;
  return std::max(1, static_cast<int>(std::ceil(reach / geometry.bs_spacing_m - 1e-9)));
}

void ScenarioConfig::validate() const {
  require(geometry.num_bs >= 0, "geometry.num_bs", "must be nonnegative (0 selects automatically)");
  require(geometry.bs_spacing_m > 0.0, "geometry.bs_spacing_m", "must be positive");
  require(geometry.road_offset_m > 0.0, "geometry.road_offset_m", "must be positive");
  require(window.frames >= 1, "window.frames", "must be at least 1");
  require(window.frame_s > 0.0, "window.frame_s", "must be positive");
  require(window.slot_s > 0.0 && window.slot_s <= window.frame_s, "window.slot_s",
          "must lie in (0, frame_s]");
  require(window.slots_per_frame >= 1, "window.slots_per_frame", "must be at least 1");
  require(window.slots_per_frame * window.slot_s <= window.frame_s * (1.0 + 1e-12),
          "window.slots_per_frame", "slots_per_frame times slot_s exceeds the frame");
  require(radio.p_max_w > 0.0, "radio.p_max_w", "must be positive");
  require(radio.k_max >= 1.0, "radio.k_max", "must be at least 1");
  require(radio.subcarrier_hz > 0.0, "radio.subcarrier_hz", "must be positive");
  require(radio.rho > 0.0 && radio.rho <= 1.0, "radio.rho", "must lie in (0, 1]");
  require(radio.p_c_w >= 0.0, "radio.p_c_w", "must be nonnegative");
  require(radio.p_0_w >= 0.0, "radio.p_0_w", "must be nonnegative");
  require(radio.n0_dbm_hz > -300.0 && radio.n0_dbm_hz < 100.0, "radio.n0_dbm_hz",
          "outside the plausible range");
  require(radio.phi >= 1.0, "radio.phi", "must be at least 1");
  require(users.vod >= 0, "users.vod", "must be nonnegative");
  require(users.rt >= 0, "users.rt", "must be nonnegative");
  require(users.q_max_bits > 0.0, "users.q_max_bits", "must be positive");
  require(users.initial_positions_m.empty() ||
              static_cast<int>(users.initial_positions_m.size()) == users.vod + users.rt,
          "users.initial_positions_m", "needs one entry per user (VoD first) or none");
  for (double x : users.initial_positions_m) {
    require(x >= 0.0, "users.initial_positions_m", "positions must be nonnegative");
  }
  require(traffic.base_rate_bps > 0.0, "traffic.base_rate_bps", "must be positive");
  require(traffic.enh_rate_bps > 0.0, "traffic.enh_rate_bps", "must be positive");
  require(traffic.jitter >= 0.0 && traffic.jitter < 1.0, "traffic.jitter", "must lie in [0, 1)");
  require(traffic.lambda_a > 0.0, "traffic.lambda_a", "must be positive");
  require(traffic.lambda_u > 0.0, "traffic.lambda_u", "must be positive");
  require(traffic.d_max_s > 0.0, "traffic.d_max_s", "must be positive");
  require(traffic.eps_d > 0.0 && traffic.eps_d < 1.0, "traffic.eps_d", "must lie in (0, 1)");
  require(mobility.q >= 0.0 && mobility.q <= 0.5, "mobility.q", "must lie in [0, 0.5]");
  require(mobility.v_min_mps >= 0.0, "mobility.v_min_mps", "must be nonnegative");
  require(mobility.dv_mps > 0.0, "mobility.dv_mps", "must be positive");
  require(mobility.states >= 1, "mobility.states", "must be at least 1");
  {
    const double k = (users.initial_velocity_mps - mobility.v_min_mps) / mobility.dv_mps;
    require(users.initial_velocity_mps >= 0.0 && std::abs(k - std::round(k)) < 1e-9 &&
                std::round(k) >= 0 && std::round(k) < mobility.states,
            "users.initial_velocity_mps", "must be one of the mobility velocity states");
  }
  require(!policies.empty(), "policy", "at least one policy required");
  require(run.replications >= 1, "run.replications", "must be at least 1");
  require(run.duration_s > 0.0, "run.duration_s", "must be positive");
  require(windows() >= 1 && std::abs(windows() * window.frames * window.frame_s - run.duration_s) <
                                1e-9 * run.duration_s,
          "run.duration_s", "must be a whole number of prediction windows");
  require(solver.gap_rel_tol > 0.0, "solver.gap_rel_tol", "must be positive");
  require(solver.kkt_tol > 0.0, "solver.kkt_tol", "must be positive");
  require(solver.max_newton_steps >= 1, "solver.max_newton_steps", "must be at least 1");
}

sim::Scenario ScenarioConfig::scenario(std::uint64_t seed) const {
  validate();
  sim::Scenario sc;
  sc.geometry = channel::Geometry::linear(resolved_num_bs(), geometry.bs_spacing_m,
                                          geometry.road_offset_m);
  sc.chain = {mobility.q, mobility.v_min_mps, mobility.dv_mps, mobility.states, window.frame_s};
  sc.limits = {radio.p_max_w, radio.k_max, radio.p_c_w, radio.p_0_w, radio.rho, window.frame_s,
               window.slot_s};
  sc.link.phi = radio.phi;
  sc.link.bandwidth_hz = radio.subcarrier_hz;
  sc.link.noise_w = link::noise_power_w(radio.n0_dbm_hz, radio.subcarrier_hz);
  sc.arrivals = {traffic.lambda_a, traffic.lambda_u};
  sc.qos = {traffic.d_max_s, traffic.eps_d};
  sc.video = {traffic.base_rate_bps, traffic.enh_rate_bps, traffic.jitter, window.frame_s};
  if (!traffic.video_trace.empty()) {
    std::ifstream in(traffic.video_trace);
    if (!in) throw ConfigError("traffic.video_trace", "cannot open '" + traffic.video_trace + "'");
    try {
      sc.video_source = traffic::read_video(in);
    } catch (const std::exception& e) {
      throw ConfigError("traffic.video_trace", e.what());
    }
  }
  sc.vod_users = users.vod;
  sc.rt_users = users.rt;
  sc.frames_per_window = window.frames;
  sc.slots_per_frame = window.slots_per_frame;
  sc.windows = windows();
  sc.initial_velocity = users.initial_velocity_mps;
  sc.initial_positions = users.initial_positions_m;
  sc.q_max_bits = users.q_max_bits;
  sc.seed = seed;
  sc.solver.gap_rel_tol = solver.gap_rel_tol;
  sc.solver.kkt_tol = solver.kkt_tol;
  sc.solver.max_newton_steps = solver.max_newton_steps;
  sc.delivery = run.delivery;
  try {
    sc.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("", e.what());
  }
  return sc;
}

// ---------------------------------------------------------------------------

void SweepSpec::validate(const ScenarioConfig& base) const {
  if (parameter.empty()) throw ConfigError("parameter", "sweep needs a parameter");
  if (values.empty()) throw ConfigError("values", "sweep needs at least one value");
  for (const auto& [key, list] : with) {
    if (list.size() != values.size()) {
      throw ConfigError("with." + key, "needs as many values as the swept parameter");
    }
  }
  for (int i = 0; i < points(); ++i) point(base, i);
}

ScenarioConfig SweepSpec::point(const ScenarioConfig& base, int index) const {
  ScenarioConfig cfg = base;
  for (const auto& [key, value] : fixed) cfg = with_override(cfg, key, value);
  // Lockstep parameters first, so that validation sees the whole point.
  ScenarioConfig trial = cfg;
  for (const auto& [key, list] : with) {
    const Field* f = find_field(key);
    if (!f) throw ConfigError(key, "unknown key");
    apply(trial, *f, parse_yaml(list.at(index)));
  }
  const Field* f = find_field(parameter == "policies" ? "policy" : parameter);
  if (!f) throw ConfigError(parameter, "swept parameter does not exist");
  apply(trial, *f, parse_yaml(values.at(index)));
  trial.validate();
  return trial;
}

SweepSpec parse_sweep(const std::string& text) {
  const YAML::Node root = parse_yaml(text);
  if (!root.IsMap()) throw ConfigError("", "sweep spec must be a map", line_of(root));
  SweepSpec s;
  auto scalars = [](const std::string& key, const YAML::Node& n) {
    Values v;
    if (n.IsScalar()) {
      v.push_back(n.Scalar());
    } else if (n.IsSequence()) {
      for (const auto& item : n) {
        if (!item.IsScalar()) throw ConfigError(key, "entries must be scalars", line_of(item));
        v.push_back(item.Scalar());
      }
    } else {
      throw ConfigError(key, "expected a list of values", line_of(n));
    }
    return v;
  };
  for (const auto& item : root) {
    const std::string key = item.first.as<std::string>();
    if (key == "base") {
      if (!item.second.IsScalar()) throw ConfigError(key, "expected a config path", line_of(item.second));
      s.base = item.second.Scalar();
    } else if (key == "parameter") {
      if (!item.second.IsScalar()) throw ConfigError(key, "expected a key name", line_of(item.second));
      s.parameter = item.second.Scalar();
    } else if (key == "values") {
      s.values = scalars(key, item.second);
    } else if (key == "with" || key == "fixed") {
      if (!item.second.IsMap()) throw ConfigError(key, "expected a map", line_of(item.second));
      for (const auto& kv : item.second) {
        const std::string k = kv.first.as<std::string>();
        if (!find_field(k == "policies" ? "policy" : k)) {
          throw ConfigError(key + "." + k, "unknown key", line_of(kv.first));
        }
        if (key == "with") {
          s.with.emplace_back(k, scalars(key + "." + k, kv.second));
        } else {
          YAML::Emitter e;
          e << YAML::Flow << kv.second;
          s.fixed.emplace_back(k, e.c_str());
        }
      }
    } else {
      throw ConfigError(key, "unknown key", line_of(item.first));
    }
  }
  if (s.parameter.empty()) throw ConfigError("parameter", "sweep needs a parameter");
  if (!find_field(s.parameter == "policies" ? "policy" : s.parameter)) {
    throw ConfigError(s.parameter, "swept parameter does not exist");
  }
  if (s.values.empty()) throw ConfigError("values", "sweep needs at least one value");
  return s;
}

SweepSpec load_sweep(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open sweep file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  SweepSpec s = parse_sweep(ss.str());
  if (!s.base.empty() && std::filesystem::path(s.base).is_relative()) {
    s.base = (std::filesystem::path(path).parent_path() / s.base).lexically_normal().string();
  }
  return s;
}

}  // namespace predalloc::config

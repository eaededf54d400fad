#include "predalloc/experiment.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace predalloc::experiment {

namespace {

std::string num(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, int line) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) {
    throw std::runtime_error("result line " + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

long long parse_int(const std::string& s, int line) {
  long long v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) {
    throw std::runtime_error("result line " + std::to_string(line) + ": bad integer '" + s + "'");
  }
  return v;
}

}  // namespace

ResultRow make_row(const std::string& policy, std::uint64_t seed, const config::ScenarioConfig& cfg,
                   int point, const sim::EEReport& report) {
  ResultRow r;
  r.policy = policy;
  r.seed = seed;
  r.m_d = cfg.users.vod;
  r.m_r = cfg.users.rt;
  r.q = cfg.mobility.q;
  r.point = point;
  r.na = !report.feasible;
  r.failure = report.failure;
  if (!r.na) {
    r.quality_level = report.quality_level;
    r.bits = report.bits();
    r.energy_j = report.energy.total();
    r.ee = report.ee;
    r.stalls = report.stalls;
    r.max_rt_violation = report.max_rt_violation;
  }
  return r;
}

std::vector<ResultRow> run_experiment(const config::ScenarioConfig& cfg,
                                      const config::SweepSpec* sweep,
                                      const std::function<void(const ResultRow&)>& sink,
                                      int jobs) {
  cfg.validate();
  if (sweep) sweep->validate(cfg);
  const int points = sweep ? sweep->points() : 1;

  struct Task {
    int point;
    std::uint64_t seed;
    planner::Policy policy;
  };
  std::vector<config::ScenarioConfig> point_cfg;
  std::vector<Task> tasks;
  for (int p = 0; p < points; ++p) {
    point_cfg.push_back(sweep ? sweep->point(cfg, p) : cfg);
    const auto& pc = point_cfg.back();
    for (int rep = 0; rep < pc.run.replications; ++rep) {
      for (auto policy : pc.policies) {
        tasks.push_back({p, pc.run.seed + static_cast<std::uint64_t>(rep), policy});
      }
    }
  }

  std::vector<ResultRow> rows(tasks.size());
  std::vector<char> done(tasks.size(), 0);
  std::size_t emitted = 0;
  std::mutex mu;
  std::atomic<std::size_t> next{0};

  auto execute = [&](const Task& t) {
    const auto& pc = point_cfg[static_cast<std::size_t>(t.point)];
    const char* name = planner::to_string(t.policy);
    try {
      return make_row(name, t.seed, pc, t.point, sim::run_policy(pc.scenario(t.seed), t.policy));
    } catch (const std::exception& e) {
      sim::EEReport failed;
      failed.feasible = false;
      failed.failure = e.what();
      return make_row(name, t.seed, pc, t.point, failed);
    }
  };
  // Rows reach the sink in task order whatever order the workers finish in.
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      ResultRow row = execute(tasks[i]);
      std::lock_guard lock(mu);
      rows[i] = std::move(row);
      done[i] = 1;
      while (emitted < tasks.size() && done[emitted]) {
        if (sink) sink(rows[emitted]);
        ++emitted;
      }
    }
  };

  if (jobs <= 0) jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  jobs = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(jobs), std::max<std::size_t>(1, tasks.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return rows;
}

void write_header(std::ostream& out) { out << kResultHeader << '\n'; }

void write_row(std::ostream& out, const ResultRow& r) {
  out << r.policy << ',' << r.seed << ',' << r.m_d << ',' << r.m_r << ',' << num(r.q) << ',';
  if (r.na) {
    out << "NA,NA,NA,NA,NA,NA";
  } else {
    out << num(r.quality_level) << ',' << num(r.bits) << ',' << num(r.energy_j) << ','
        << num(r.ee) << ',' << r.stalls << ',' << num(r.max_rt_violation);
  }
  out << ',' << r.point << '\n';
}

std::vector<ResultRow> read_results(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("result table is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kResultHeader) throw std::runtime_error("result table header not recognised");
  std::vector<ResultRow> rows;
  int n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto c = split(line);
    if (c.size() != 12) throw std::runtime_error("result line " + std::to_string(n) + ": expected 12 fields");
    ResultRow r;
    r.policy = c[0];
    r.seed = static_cast<std::uint64_t>(parse_int(c[1], n));
    r.m_d = static_cast<int>(parse_int(c[2], n));
    r.m_r = static_cast<int>(parse_int(c[3], n));
    r.q = parse_double(c[4], n);
    r.na = c[5] == "NA";
    if (!r.na) {
      r.quality_level = parse_double(c[5], n);
      r.bits = parse_double(c[6], n);
      r.energy_j = parse_double(c[7], n);
      r.ee = parse_double(c[8], n);
      r.stalls = static_cast<long>(parse_int(c[9], n));
      r.max_rt_violation = parse_double(c[10], n);
    }
    r.point = static_cast<int>(parse_int(c[11], n));
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows) {
  std::vector<SummaryRow> out;
  std::map<std::pair<int, std::string>, std::size_t> index;
  std::vector<std::vector<double>> ee, quality;
  for (const auto& r : rows) {
    const auto key = std::make_pair(r.point, r.policy);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, out.size()).first;
      SummaryRow s;
      s.point = r.point;
      s.policy = r.policy;
      s.m_d = r.m_d;
      s.m_r = r.m_r;
      s.q = r.q;
      out.push_back(s);
      ee.emplace_back();
      quality.emplace_back();
    }
    SummaryRow& s = out[it->second];
    ++s.runs;
    if (r.na) {
      ++s.na_runs;
      s.quality_na = true;
      continue;
    }
    ee[it->second].push_back(r.ee);
    quality[it->second].push_back(r.quality_level);
    s.stalls += r.stalls;
    s.max_rt_violation = std::max(s.max_rt_violation, r.max_rt_violation);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& x = ee[i];
    const auto n = static_cast<double>(x.size());
    if (x.empty()) continue;
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    out[i].mean_ee = mean;
    if (x.size() > 1) {
      double ss = 0.0;
      for (double v : x) ss += (v - mean) * (v - mean);
      const boost::math::students_t t(n - 1.0);
      out[i].ci_half_width = boost::math::quantile(t, 0.975) * std::sqrt(ss / (n - 1.0) / n);
    }
    double qm = 0.0;
    for (double v : quality[i]) qm += v;
    out[i].mean_quality = qm / n;
  }
  return out;
}

void write_summary(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << kSummaryHeader << '\n';
  for (const auto& s : rows) {
    const bool none = s.na_runs == s.runs;
    out << s.point << ',' << s.policy << ',' << s.m_d << ',' << s.m_r << ',' << num(s.q) << ','
        << s.runs << ',' << s.na_runs << ',' << (none ? "NA" : num(s.mean_ee)) << ','
        << (none ? "NA" : num(s.ci_half_width)) << ','
        << (s.quality_na ? "NA" : num(s.mean_quality)) << ',' << s.stalls << ','
        << num(s.max_rt_violation) << '\n';
  }
}

}  // namespace predalloc::experiment

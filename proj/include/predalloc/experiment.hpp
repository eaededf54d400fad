#pragma once

#include "predalloc/config.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace predalloc::experiment {

inline constexpr const char* kResultHeader =
    "policy,seed,M_D,M_R,q,quality_level,bits,energy_J,EE_bits_per_J,stalls,max_rt_violation,point";

inline constexpr const char* kSummaryHeader =
    "point,policy,M_D,M_R,q,runs,na_runs,mean_EE_bits_per_J,ci95_half_width,mean_quality_level,"
    "stalls,max_rt_violation";

/// One simulated run. `na` rows carry no metrics.
struct ResultRow {
  std::string policy;
  std::uint64_t seed = 0;
  int m_d = 0;
  int m_r = 0;
  double q = 0.0;
  bool na = false;
  double quality_level = 0.0;
  double bits = 0.0;
  double energy_j = 0.0;
  double ee = 0.0;
  long stalls = 0;
  double max_rt_violation = 0.0;
  int point = 0;
  std::string failure;  ///< reason for an NA row; not written
};

ResultRow make_row(const std::string& policy, std::uint64_t seed, const config::ScenarioConfig& cfg,
                   int point, const sim::EEReport& report);

/// Every sweep point x seed x policy, in that nesting order. Rows go to `sink`
/// in that order. A run that throws becomes an NA row. `jobs` runs execute
/// concurrently (0: one per hardware thread); output does not depend on it.
std::vector<ResultRow> run_experiment(const config::ScenarioConfig& cfg,
                                      const config::SweepSpec* sweep = nullptr,
                                      const std::function<void(const ResultRow&)>& sink = {},
                                      int jobs = 1);

void write_header(std::ostream& out);
void write_row(std::ostream& out, const ResultRow& row);
/// Parses a result table written by write_header / write_row.
std::vector<ResultRow> read_results(std::istream& in);

struct SummaryRow {
  int point = 0;
  std::string policy;
  int m_d = 0;
  int m_r = 0;
  double q = 0.0;
  int runs = 0;
  int na_runs = 0;
  double mean_ee = 0.0;         ///< over feasible runs
  double ci_half_width = 0.0;   ///< Student-t 95% half-width, 0 for one run
  double mean_quality = 0.0;
  bool quality_na = false;      ///< some run could not be planned
  long stalls = 0;
  double max_rt_violation = 0.0;
};

/// Groups by (point, policy) in first-appearance order.
std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows);
void write_summary(std::ostream& out, const std::vector<SummaryRow>& rows);

}  // namespace predalloc::experiment

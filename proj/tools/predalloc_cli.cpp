// Command-line front end over the C API.
//
//   predalloc run CONFIG [-o FILE] [--seed N] [--jobs N] [--set key=value]...
//   predalloc sweep SPEC [--config FILE] [-o FILE] [--seed N] [--jobs N] [--set key=value]...
//   predalloc summarize RESULTS [-o FILE]
//
// Exit status: 0 success, 1 configuration error, 2 runtime failure.

#include "predalloc/predalloc.h"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace {

constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

struct ConfigDeleter {
  void operator()(pa_config* c) const { pa_config_free(c); }
};
struct SweepDeleter {
  void operator()(pa_sweep* s) const { pa_sweep_free(s); }
};
struct ResultsDeleter {
  void operator()(pa_results* r) const { pa_results_free(r); }
};
using ConfigPtr = std::unique_ptr<pa_config, ConfigDeleter>;
using SweepPtr = std::unique_ptr<pa_sweep, SweepDeleter>;
using ResultsPtr = std::unique_ptr<pa_results, ResultsDeleter>;

int report(pa_status status) {
  std::cerr << "predalloc: " << pa_last_error() << '\n';
  return status == PA_ERR_CONFIG ? kConfigError : kRuntimeError;
}

// Destination for tables: a file when a path is given, stdout otherwise.
class Sink {
 public:
  bool open(const std::string& path) {
    if (path.empty() || path == "-") return true;
    file_.open(path, std::ios::binary | std::ios::trunc);
    return static_cast<bool>(file_);
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }
  bool finish() {
    stream().flush();
    if (file_.is_open()) file_.close();
    return !file_.fail() && static_cast<bool>(std::cout);
  }

 private:
  std::ofstream file_;
};

struct RunOptions {
  std::string output;
  std::optional<unsigned long long> seed;
  int jobs = 1;
  std::vector<std::string> overrides;
};

int apply_overrides(pa_config* cfg, const RunOptions& opt) {
  for (const auto& kv : opt.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      std::cerr << "predalloc: --set expects key=value, got '" << kv << "'\n";
      return kConfigError;
    }
    const auto st = pa_config_set(cfg, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str());
    if (st != PA_OK) return report(st);
  }
  if (opt.seed) {
    const auto st = pa_config_set(cfg, "run.seed", std::to_string(*opt.seed).c_str());
    if (st != PA_OK) return report(st);
  }
  return 0;
}

int execute(pa_config* cfg, const pa_sweep* sweep, const RunOptions& opt) {
  if (int rc = apply_overrides(cfg, opt)) return rc;
  Sink sink;
  if (!sink.open(opt.output)) {
    std::cerr << "predalloc: cannot open '" << opt.output << "' for writing\n";
    return kRuntimeError;
  }
  std::ostream& out = sink.stream();
  out << pa_result_header() << '\n';
  out.flush();
  auto on_row = [](const char* line, void* user) {
    auto& o = *static_cast<std::ostream*>(user);
    o << line << '\n';
    o.flush();
  };
  pa_results* raw = nullptr;
  const auto st = pa_run(cfg, sweep, opt.jobs, on_row, &out, &raw);
  ResultsPtr results(raw);
  if (st != PA_OK) return report(st);

  std::size_t na = 0;
  for (std::size_t i = 0; i < pa_results_count(results.get()); ++i) {
    pa_row row{};
    pa_results_row(results.get(), i, &row);
    if (row.na) {
      ++na;
      std::cerr << "predalloc: NA " << row.policy << " seed " << row.seed << ": " << row.failure << '\n';
    }
  }
  if (!sink.finish()) {
    std::cerr << "predalloc: failed writing results\n";
    return kRuntimeError;
  }
  if (na > 0) std::cerr << "predalloc: " << na << " of " << pa_results_count(results.get()) << " runs NA\n";
  return 0;
}

void add_run_options(CLI::App* cmd, RunOptions& opt) {
  cmd->add_option("-o,--output", opt.output, "Result table path (default: stdout)");
  cmd->add_option("--seed", opt.seed, "Override run.seed");
  cmd->add_option("-j,--jobs", opt.jobs, "Concurrent runs (0: all hardware threads)")->check(CLI::NonNegativeNumber);
  cmd->add_option("--set", opt.overrides, "Override a config key, e.g. users.vod=3");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Predictive resource allocation simulator"};
  app.set_version_flag("--version", std::string(pa_version()));
  app.require_subcommand(1);

  RunOptions run_opt;
  std::string config_path;
  auto* run = app.add_subcommand("run", "Simulate one configuration");
  run->add_option("config", config_path, "Scenario config file")->required();
  add_run_options(run, run_opt);

  RunOptions sweep_opt;
  std::string sweep_path;
  std::string base_path;
  auto* sweep = app.add_subcommand("sweep", "Simulate every point of a parameter sweep");
  sweep->add_option("spec", sweep_path, "Sweep spec file")->required();
  sweep->add_option("-c,--config", base_path, "Base config (default: the spec's base, else defaults)");
  add_run_options(sweep, sweep_opt);

  std::string input_path;
  std::string summary_out;
  auto* summarize = app.add_subcommand("summarize", "Aggregate a result table per sweep point and policy");
  summarize->add_option("results", input_path, "Result table written by run or sweep")->required();
  summarize->add_option("-o,--output", summary_out, "Summary path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kConfigError;
  }

  if (*run) {
    pa_config* raw = nullptr;
    const auto st = pa_config_load(config_path.c_str(), &raw);
    ConfigPtr cfg(raw);
    if (st != PA_OK) return report(st);
    return execute(cfg.get(), nullptr, run_opt);
  }

  if (*sweep) {
    pa_sweep* raw_sweep = nullptr;
    auto st = pa_sweep_load(sweep_path.c_str(), &raw_sweep);
    SweepPtr spec(raw_sweep);
    if (st != PA_OK) return report(st);
    const std::string base = base_path.empty() ? pa_sweep_base(spec.get()) : base_path;
    pa_config* raw = nullptr;
    st = base.empty() ? pa_config_default(&raw) : pa_config_load(base.c_str(), &raw);
    ConfigPtr cfg(raw);
    if (st != PA_OK) return report(st);
    return execute(cfg.get(), spec.get(), sweep_opt);
  }

  pa_results* raw = nullptr;
  auto st = pa_results_read(input_path.c_str(), &raw);
  ResultsPtr results(raw);
  if (st != PA_OK) return report(st == PA_ERR_CONFIG ? PA_ERR_RUNTIME : st);
  char* text = nullptr;
  st = pa_summarize(results.get(), &text);
  if (st != PA_OK) return report(st);
  std::unique_ptr<char, decltype(&pa_string_free)> owned(text, &pa_string_free);
  Sink sink;
  if (!sink.open(summary_out)) {
    std::cerr << "predalloc: cannot open '" << summary_out << "' for writing\n";
    return kRuntimeError;
  }
  sink.stream() << text;
  if (!sink.finish()) return kRuntimeError;
  return 0;
}

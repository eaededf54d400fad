#include "predalloc/predalloc.h"

#include "predalloc/config.hpp"
#include "predalloc/experiment.hpp"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

using namespace predalloc;

struct pa_config {
  config::ScenarioConfig cfg;
};

struct pa_sweep {
  config::SweepSpec spec;
};

struct pa_results {
  std::vector<experiment::ResultRow> rows;
};

namespace {

struct LastError {
  std::string message;
  std::string field;
  int line = 0;
};

thread_local LastError last_error;

pa_status fail(pa_status code, const std::string& message, const std::string& field = {}, int line = 0) {
  last_error = {message, field, line};
  return code;
}

// Runs `body`, translating exceptions into status codes.
template <typename F>
pa_status guarded(F&& body) {
  try {
    last_error = {};
    return body();
  } catch (const config::ConfigError& e) {
    return fail(PA_ERR_CONFIG, e.what(), e.field(), e.line());
  } catch (const std::bad_alloc&) {
    return fail(PA_ERR_RUNTIME, "out of memory");
  } catch (const std::exception& e) {
    return fail(PA_ERR_RUNTIME, e.what());
  } catch (...) {
    return fail(PA_ERR_RUNTIME, "unknown error");
  }
}

char* duplicate(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::string table_text(const pa_results& r) {
  std::ostringstream out;
  experiment::write_header(out);
  for (const auto& row : r.rows) experiment::write_row(out, row);
  return out.str();
}

}  // namespace

extern "C" {

const char* pa_version(void) { return "0.1.0"; }

const char* pa_result_header(void) { return experiment::kResultHeader; }

const char* pa_last_error(void) { return last_error.message.c_str(); }

const char* pa_last_error_field(void) { return last_error.field.c_str(); }

int pa_last_error_line(void) { return last_error.line; }

void pa_string_free(char* s) { std::free(s); }

pa_status pa_config_default(pa_config** out) {
  if (!out) return fail(PA_ERR_ARGUMENT, "null output pointer");
  return guarded([&] {
    *out = new pa_config{};
    return PA_OK;
  });
}

pa_status pa_config_load(const char* path, pa_config** out) {
  if (!path || !out) return fail(PA_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new pa_config{config::load_config(path)};
    return PA_OK;
  });
}

pa_status pa_config_parse(const char* text, pa_config** out) {
  if (!text || !out) return fail(PA_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new pa_config{config::parse_config(text)};
    return PA_OK;
  });
}

pa_status pa_config_set(pa_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value) return fail(PA_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    cfg->cfg = config::with_override(cfg->cfg, key, value);
    return PA_OK;
  });
}

pa_status pa_config_dump(const pa_config* cfg, char** text) {
  if (!cfg || !text) return fail(PA_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    *text = duplicate(config::dump_config(cfg->cfg));
    return PA_OK;
  });
}

void pa_config_free(pa_config* cfg) { delete cfg; }

pa_status pa_sweep_load(const char* path, pa_sweep** out) {
  if (!path || !out) return fail(PA_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new pa_sweep{config::load_sweep(path)};
    return PA_OK;
  });
}

pa_status pa_sweep_parse(const char* text, pa_sweep** out) {
  if (!text || !out) return fail(PA_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new pa_sweep{config::parse_sweep(text)};
    return PA_OK;
  });
}

const char* pa_sweep_base(const pa_sweep* sweep) { return sweep ? sweep->spec.base.c_str() : ""; }

void pa_sweep_free(pa_sweep* sweep) { delete sweep; }

pa_status pa_run(const pa_config* cfg, const pa_sweep* sweep, int jobs, pa_row_callback on_row,
                 void* user, pa_results** out) {
  if (!cfg || !out) return fail(PA_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    std::function<void(const experiment::ResultRow&)> sink;
    if (on_row) {
      sink = [on_row, user](const experiment::ResultRow& r) {
        std::ostringstream line;
        experiment::write_row(line, r);
        std::string s = line.str();
        s.pop_back();
        on_row(s.c_str(), user);
      };
    }
    auto rows = experiment::run_experiment(cfg->cfg, sweep ? &sweep->spec : nullptr, sink, jobs);
    *out = new pa_results{std::move(rows)};
    return PA_OK;
  });
}

pa_status pa_results_read(const char* path, pa_results** out) {
  if (!path || !out) return fail(PA_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  std::ifstream in(path);
  if (!in) return fail(PA_ERR_IO, std::string("cannot open '") + path + "'");
  return guarded([&] {
    *out = new pa_results{experiment::read_results(in)};
    return PA_OK;
  });
}

size_t pa_results_count(const pa_results* results) { return results ? results->rows.size() : 0; }

pa_status pa_results_row(const pa_results* results, size_t index, pa_row* out) {
  if (!results || !out) return fail(PA_ERR_ARGUMENT, "null argument");
  if (index >= results->rows.size()) return fail(PA_ERR_ARGUMENT, "row index out of range");
  const auto& r = results->rows[index];
  out->policy = r.policy.c_str();
  out->seed = r.seed;
  out->m_d = r.m_d;
  out->m_r = r.m_r;
  out->q = r.q;
  out->na = r.na ? 1 : 0;
  out->quality_level = r.quality_level;
  out->bits = r.bits;
  out->energy_j = r.energy_j;
  out->ee_bits_per_j = r.ee;
  out->stalls = r.stalls;
  out->max_rt_violation = r.max_rt_violation;
  out->point = r.point;
  out->failure = r.failure.c_str();
  return PA_OK;
}

pa_status pa_results_write(const pa_results* results, const char* path) {
  if (!results || !path) return fail(PA_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    std::ofstream out(path, std::ios::binary);
    if (!out) return fail(PA_ERR_IO, std::string("cannot open '") + path + "' for writing");
    out << table_text(*results);
    out.close();
    if (!out) return fail(PA_ERR_IO, std::string("failed writing '") + path + "'");
    return PA_OK;
  });
}

pa_status pa_results_text(const pa_results* results, char** text) {
  if (!results || !text) return fail(PA_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    *text = duplicate(table_text(*results));
    return PA_OK;
  });
}

pa_status pa_summarize(const pa_results* results, char** text) {
  if (!results || !text) return fail(PA_ERR_ARGUMENT, "null argument");
  if (results->rows.empty()) return fail(PA_ERR_ARGUMENT, "no result rows to summarize");
  return guarded([&] {
    std::ostringstream out;
    experiment::write_summary(out, experiment::summarize(results->rows));
    *text = duplicate(out.str());
    return PA_OK;
  });
}

void pa_results_free(pa_results* results) { delete results; }

}  // extern "C"

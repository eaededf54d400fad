#ifndef PREDALLOC_H
#define PREDALLOC_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(PREDALLOC_BUILD)
#    define PA_API __declspec(dllexport)
#  else
#    define PA_API __declspec(dllimport)
#  endif
#else
#  define PA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pa_status {
  PA_OK = 0,
  PA_ERR_CONFIG = 1,   /* unparseable or invalid configuration */
  PA_ERR_RUNTIME = 2,  /* simulation or table failure */
  PA_ERR_ARGUMENT = 3, /* null handle, index out of range */
  PA_ERR_IO = 4        /* file could not be opened or written */
} pa_status;

typedef struct pa_config pa_config;
typedef struct pa_sweep pa_sweep;
typedef struct pa_results pa_results;

/* One result record. Strings stay valid until the owning pa_results is freed. */
typedef struct pa_row {
  const char* policy;
  uint64_t seed;
  int m_d;
  int m_r;
  double q;
  int na; /* nonzero: the run could not be planned; metrics below are zero */
  double quality_level;
  double bits;
  double energy_j;
  double ee_bits_per_j;
  long stalls;
  double max_rt_violation;
  int point;
  const char* failure; /* empty unless na */
} pa_row;

/* Called once per finished run, in run order, with the formatted result line
   (no newline). May be called from a worker thread, never concurrently. */
typedef void (*pa_row_callback)(const char* line, void* user);

PA_API const char* pa_version(void);
PA_API const char* pa_result_header(void);

/* Message of the last failed call on this thread; "" if none. */
PA_API const char* pa_last_error(void);
/* Config key the last error refers to, "" when none. */
PA_API const char* pa_last_error_field(void);
/* 1-based line of the last config parse error, 0 when unknown. */
PA_API int pa_last_error_line(void);

/* Strings returned through char** out-parameters. */
PA_API void pa_string_free(char* s);

PA_API pa_status pa_config_default(pa_config** out);
PA_API pa_status pa_config_load(const char* path, pa_config** out);
PA_API pa_status pa_config_parse(const char* text, pa_config** out);
/* Dotted key, e.g. ("users.vod", "3") or ("policy", "[optimal, heuristic]"). */
PA_API pa_status pa_config_set(pa_config* cfg, const char* key, const char* value);
PA_API pa_status pa_config_dump(const pa_config* cfg, char** text);
PA_API void pa_config_free(pa_config* cfg);

PA_API pa_status pa_sweep_load(const char* path, pa_sweep** out);
PA_API pa_status pa_sweep_parse(const char* text, pa_sweep** out);
/* Path of the sweep's base config, "" when the spec names none. */
PA_API const char* pa_sweep_base(const pa_sweep* sweep);
PA_API void pa_sweep_free(pa_sweep* sweep);

/* Runs every sweep point x seed x policy. `sweep` and `on_row` may be NULL;
   `jobs` <= 0 uses every hardware thread. Runs that fail become NA rows. */
PA_API pa_status pa_run(const pa_config* cfg, const pa_sweep* sweep, int jobs,
                        pa_row_callback on_row, void* user, pa_results** out);
PA_API pa_status pa_results_read(const char* path, pa_results** out);
PA_API size_t pa_results_count(const pa_results* results);
PA_API pa_status pa_results_row(const pa_results* results, size_t index, pa_row* out);
PA_API pa_status pa_results_write(const pa_results* results, const char* path);
PA_API pa_status pa_results_text(const pa_results* results, char** text);
/* Per (sweep point, policy) table as delimited text. */
PA_API pa_status pa_summarize(const pa_results* results, char** text);
PA_API void pa_results_free(pa_results* results);

#ifdef __cplusplus
}
#endif

#endif

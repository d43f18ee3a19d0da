#ifndef KLAB_KLAB_H
#define KLAB_KLAB_H

/* C interface to the verification lab. Handles are opaque; every call that
   can fail returns a klab_status and records a message for klab_last_error(). */

#include <stddef.h>

#if defined(KLAB_BUILDING)
#define KLAB_API __attribute__((visibility("default")))
#else
#define KLAB_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum klab_status {
  KLAB_OK = 0,
  KLAB_E_DIVISION_BY_ZERO_FUNCTION = 1,
  KLAB_E_POLE_EVALUATION,
  KLAB_E_CONSTANT_POLE_COMPOSITION,
  KLAB_E_INDEX_OUT_OF_RANGE,
  KLAB_E_INVALID_DIMENSION,
  KLAB_E_DEGENERATE_PARAMETERS,
  KLAB_E_ZERO_C,
  KLAB_E_ZERO_SIGMA,
  KLAB_E_SINGULARITY,
  KLAB_E_DOMAIN_VIOLATION,
  KLAB_E_ILL_CONDITIONED_METRIC,
  KLAB_E_ZERO_GRADIENT,
  KLAB_E_ZERO_POTENTIAL,
  KLAB_E_NONPOSITIVE_KAPPA,
  KLAB_E_NONPOSITIVE_Q,
  KLAB_E_OUT_OF_INTERVAL,
  KLAB_E_PARAMETER_DOMAIN,
  KLAB_E_CONFIG_PARSE,
  KLAB_E_IO,
  KLAB_E_NULL_ARGUMENT = 100,
  KLAB_E_INTERNAL = 101
} klab_status;

typedef struct klab_config klab_config;
typedef struct klab_report klab_report;

/* Borrowed view of one report entry; strings live as long as the report. */
typedef struct klab_entry {
  const char* tag;
  const char* paper_eq;
  double residual;
  double tolerance;
  int pass;
  const char* note;
} klab_entry;

KLAB_API const char* klab_version(void);
/* Message of the last failed call on this thread; empty if none. */
KLAB_API const char* klab_last_error(void);
KLAB_API const char* klab_status_name(klab_status s);

KLAB_API klab_status klab_config_parse(const char* json_text, klab_config** out);
/* Normalized config as JSON; free with klab_string_free. */
KLAB_API klab_status klab_config_echo(const klab_config* cfg, char** out);
/* Output path and format from the config ("" when unset). */
KLAB_API const char* klab_config_output_path(const klab_config* cfg);
KLAB_API const char* klab_config_format(const klab_config* cfg);
KLAB_API int klab_config_is_table(const klab_config* cfg);
KLAB_API void klab_config_free(klab_config* cfg);

/* Runs the configured suite. Module errors become failed entries, not statuses. */
KLAB_API klab_status klab_run(const klab_config* cfg, klab_report** out);
/* Parses a JSON report produced by klab_report_render. */
KLAB_API klab_status klab_report_parse(const char* json_text, klab_report** out);
KLAB_API void klab_report_free(klab_report* rep);

KLAB_API int klab_report_overall(const klab_report* rep);
KLAB_API size_t klab_report_size(const klab_report* rep);
KLAB_API klab_status klab_report_entry(const klab_report* rep, size_t index, klab_entry* out);
/* format is "json" or "csv"; free the result with klab_string_free. */
KLAB_API klab_status klab_report_render(const klab_report* rep, const klab_config* cfg, const char* format,
                                        char** out);
KLAB_API klab_status klab_report_write(const klab_report* rep, const klab_config* cfg, const char* format,
                                       const char* path);

/* Septuple table for the config's case block and grid. flagged counts pole rows. */
KLAB_API klab_status klab_table_dump(const klab_config* cfg, char** csv, size_t* flagged);
KLAB_API klab_status klab_write_file(const char* path, const char* text);

KLAB_API void klab_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif

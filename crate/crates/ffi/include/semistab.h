#ifndef SEMISTAB_H
#define SEMISTAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum SemistabStatus {
  SEMISTAB_STATUS_OK = 0,
  SEMISTAB_STATUS_NULL_POINTER = 1,
  SEMISTAB_STATUS_INVALID_UTF8 = 2,
  SEMISTAB_STATUS_INVALID_PARAMETER = 3,
  SEMISTAB_STATUS_UNKNOWN_SCENARIO = 4,
  SEMISTAB_STATUS_CONFIG = 5,
  SEMISTAB_STATUS_JSON = 6,
  SEMISTAB_STATUS_IO = 7,
  // Spectrum hits, sectoriality, eigensolver residuals and similar.
  SEMISTAB_STATUS_NUMERICAL = 8,
  SEMISTAB_STATUS_BLOW_UP = 9,
  SEMISTAB_STATUS_PANIC = 10,
} SemistabStatus;

// Finished analysis run.
typedef struct SemistabReport SemistabReport;

// Built scenario: generator, input operator, expectations.
typedef struct SemistabScenario SemistabScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread; empty if none. Owned by the library.
const char *semistab_last_error(void);

// Library version as a static NUL-terminated string.
const char *semistab_version(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void semistab_string_free(char *s);

// Builds a built-in scenario; `truncation == 0` keeps its default mode count.
//
// # Safety
// `name` must be a NUL-terminated string and `out` a valid pointer.
enum SemistabStatus semistab_scenario_builtin(const char *name,
                                              size_t truncation,
                                              struct SemistabScenario **out);

// Builds a scenario from a JSON scenario spec or a full scenario dump.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum SemistabStatus semistab_scenario_from_json(const char *json, struct SemistabScenario **out);

// # Safety
// `h` must be null or a handle from this library that has not been freed.
void semistab_scenario_free(struct SemistabScenario *h);

// Number of modes; 0 for a null handle.
//
// # Safety
// `h` must be null or a live scenario handle.
size_t semistab_scenario_modes(const struct SemistabScenario *h);

// Copies the eigenvalues into `re`/`im`, each of length `semistab_scenario_modes`.
//
// # Safety
// `h` must be a live handle; `re` and `im` must hold `len` doubles.
enum SemistabStatus semistab_scenario_eigenvalues(const struct SemistabScenario *h,
                                                  double *re,
                                                  double *im,
                                                  size_t len);

// Full scenario as JSON; free the result with `semistab_string_free`.
//
// # Safety
// `h` must be a live handle and `out` a valid pointer.
enum SemistabStatus semistab_scenario_to_json(const struct SemistabScenario *h, char **out);

// `T(t)x` in spectral coordinates. `x_im` may be null for real input.
//
// # Safety
// Input buffers must hold `len` doubles, output buffers likewise.
enum SemistabStatus semistab_semigroup_apply(const struct SemistabScenario *h,
                                             double t,
                                             const double *x_re,
                                             const double *x_im,
                                             double *out_re,
                                             double *out_im,
                                             size_t len);

// `‖T(t)(−A)^(−β)‖` in coordinates, with its Riesz bracket.
//
// # Safety
// `h` must be a live handle; the output pointers must be valid (any may be null).
enum SemistabStatus semistab_decay_norm(const struct SemistabScenario *h,
                                        double beta,
                                        double t,
                                        double *value,
                                        double *lower,
                                        double *upper);

// Runs the analyses of a JSON run config (same schema as the CLI's `--config`).
//
// # Safety
// `config_json` must be a NUL-terminated string and `out` a valid pointer.
enum SemistabStatus semistab_run(const char *config_json, struct SemistabReport **out);

// # Safety
// `h` must be null or a report handle that has not been freed.
void semistab_report_free(struct SemistabReport *h);

// 1 if every analysis ran and every expectation matched, 0 otherwise or for null.
//
// # Safety
// `h` must be null or a live report handle.
int32_t semistab_report_expectations_met(const struct SemistabReport *h);

// Report as JSON; `canonical != 0` drops wall-clock timings.
//
// # Safety
// `h` must be a live handle and `out` a valid pointer.
enum SemistabStatus semistab_report_to_json(const struct SemistabReport *h,
                                            int32_t canonical,
                                            char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SEMISTAB_H */

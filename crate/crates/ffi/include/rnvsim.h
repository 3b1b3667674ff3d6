#ifndef RNVSIM_H
#define RNVSIM_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. Validation and numerical failures use the same values as
 * the command-line exit codes.
 */
typedef enum RnvStatus {
  RNV_STATUS_OK = 0,
  /**
   * Null pointer, invalid UTF-8 or an out-of-range index.
   */
  RNV_STATUS_INVALID_ARGUMENT = 1,
  RNV_STATUS_VALIDATION = 2,
  RNV_STATUS_NUMERICAL = 3,
  RNV_STATUS_IO = 4,
  RNV_STATUS_PANIC = 5,
} RnvStatus;

/**
 * Market condition of a step, matching the CSV labels.
 */
typedef enum RnvCondition {
  RNV_CONDITION_NON_SPECULATIVE = 0,
  RNV_CONDITION_NORMAL = 1,
  RNV_CONDITION_BUBBLE = 2,
  RNV_CONDITION_DEPRESSION = 3,
  RNV_CONDITION_HALTED = 4,
} RnvCondition;

typedef struct RnvConfig RnvConfig;

typedef struct RnvRun RnvRun;

/**
 * One row of a run. Absent Pareto bounds are NaN.
 */
typedef struct RnvStepRow {
  size_t step;
  double time;
  double underlying;
  double price;
  enum RnvCondition condition;
  uint8_t halt_code;
  bool jump;
  double jump_size;
  size_t n_fb_active;
  size_t n_fs_active;
  size_t n_tb;
  size_t n_ts;
  double pareto_lo;
  double pareto_hi;
  size_t trades;
  size_t bankruptcies;
} RnvStepRow;

/**
 * Headline statistics of a run. Undefined moments are NaN.
 */
typedef struct RnvRunSummary {
  uint64_t seed;
  uint64_t config_hash;
  size_t n_steps;
  size_t halted_steps;
  size_t total_trades;
  size_t total_bankruptcies;
  double final_price;
  size_t n_bubbles;
  size_t n_depressions;
  size_t n_jumps;
  double time_fraction_outside;
  double excess_kurtosis;
  double jb_statistic;
  double jb_p_value;
} RnvRunSummary;

/**
 * Change-of-measure diagnostics at the horizon.
 */
typedef struct RnvGirsanovReport {
  double novikov;
  double density_mean;
  double density_se;
  double weighted_mean;
  double weighted_se;
  /**
   * True when every checkpoint passes both checks.
   */
  bool pass;
} RnvGirsanovReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next `rnv_` call on the same thread.
 */
const char *rnv_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *rnv_version(void);

/**
 * Configuration with every field at its default.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum RnvStatus rnv_config_default(struct RnvConfig **out);

/**
 * Parses `key = value` config text.
 *
 * # Safety
 * `text` must be NUL-terminated; `out` must be a valid pointer.
 */
enum RnvStatus rnv_config_parse(const char *text, struct RnvConfig **out);

/**
 * Sets one key, as it would be written in a config file.
 *
 * # Safety
 * `cfg` must come from this library; strings must be NUL-terminated.
 */
enum RnvStatus rnv_config_set(struct RnvConfig *cfg, const char *key, const char *value);

/**
 * Checks the configuration without running it.
 *
 * # Safety
 * `cfg` must come from this library.
 */
enum RnvStatus rnv_config_validate(const struct RnvConfig *cfg);

/**
 * FNV-1a hash of the canonical form.
 *
 * # Safety
 * `cfg` must come from this library; `out` must be a valid pointer.
 */
enum RnvStatus rnv_config_hash(const struct RnvConfig *cfg, uint64_t *out);

/**
 * # Safety
 * `cfg` must come from this library and not be used afterwards. Null is
 * ignored.
 */
void rnv_config_free(struct RnvConfig *cfg);

/**
 * Runs one simulation. The result is owned by the caller.
 *
 * # Safety
 * `cfg` must come from this library; `out` must be a valid pointer.
 */
enum RnvStatus rnv_simulate(const struct RnvConfig *cfg, uint64_t seed, struct RnvRun **out);

/**
 * Number of rows; 0 for a null handle.
 *
 * # Safety
 * `run` must come from this library or be null.
 */
size_t rnv_run_len(const struct RnvRun *run);

/**
 * # Safety
 * `run` must come from this library; `out` must be a valid pointer.
 */
enum RnvStatus rnv_run_row(const struct RnvRun *run, size_t index, struct RnvStepRow *out);

/**
 * Copies up to `len` clearing prices into `out` and stores the number
 * copied in `written`.
 *
 * # Safety
 * `out` must have room for `len` doubles.
 */
enum RnvStatus rnv_run_prices(const struct RnvRun *run, double *out, size_t len, size_t *written);

/**
 * # Safety
 * `run` must come from this library; `out` must be a valid pointer.
 */
enum RnvStatus rnv_run_summary(const struct RnvRun *run, struct RnvRunSummary *out);

/**
 * Writes the per-step CSV and, if `summary_path` is not null, the text
 * summary.
 *
 * # Safety
 * Paths must be NUL-terminated; `summary_path` may be null.
 */
enum RnvStatus rnv_run_write(const struct RnvRun *run,
                             const char *csv_path,
                             const char *summary_path);

/**
 * # Safety
 * `run` must come from this library and not be used afterwards. Null is
 * ignored.
 */
void rnv_run_free(struct RnvRun *run);

/**
 * Population excess kurtosis. Fails with `Validation` below 8 samples and
 * `Numerical` for constant data.
 *
 * # Safety
 * `data` must point to `len` doubles.
 */
enum RnvStatus rnv_excess_kurtosis(const double *data, size_t len, double *out);

/**
 * Jarque-Bera statistic and its chi-square(2) p-value.
 *
 * # Safety
 * `data` must point to `len` doubles; outputs must be valid pointers.
 */
enum RnvStatus rnv_jarque_bera(const double *data, size_t len, double *statistic, double *p_value);

/**
 * Simulates `z0 + sigma B + drift t` with unit horizon and reweights by the
 * stochastic exponential of `-h B`. Checkpoints are the midpoint and the
 * horizon; the report describes the horizon.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum RnvStatus rnv_girsanov_check(double z0,
                                  double drift,
                                  double sigma,
                                  double h,
                                  size_t n_paths,
                                  size_t n_steps,
                                  uint64_t seed,
                                  struct RnvGirsanovReport *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RNVSIM_H */

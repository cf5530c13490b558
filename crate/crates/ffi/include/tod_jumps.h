#ifndef TOD_JUMPS_H
#define TOD_JUMPS_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum TjStatus {
  TJ_STATUS_OK = 0,
  TJ_STATUS_NULL_POINTER = 1,
  TJ_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Input data rejected: shape, parse, non-finite or degenerate values.
   */
  TJ_STATUS_DATA = 3,
  TJ_STATUS_CONFIG = 4,
  TJ_STATUS_IO = 5,
  TJ_STATUS_BUFFER_TOO_SMALL = 6,
  TJ_STATUS_PANIC = 7,
} TjStatus;

typedef enum TjLayout {
  TJ_LAYOUT_RETURNS = 0,
  TJ_LAYOUT_PRICES = 1,
} TjLayout;

/**
 * Opaque return grid.
 */
typedef struct TjGrid TjGrid;

/**
 * Opaque detection report.
 */
typedef struct TjReport TjReport;

/**
 * Opaque simulated path.
 */
typedef struct TjSimPath TjSimPath;

/**
 * Detector settings; start from [`tj_detector_config_default`].
 */
typedef struct TjDetectorConfig {
  double raw_multiplier;
  double round_multiplier;
  double tod_cap;
  size_t max_rounds;
  double truncation_exponent;
  /**
   * Set to compute randomized jump sizes from `size_seed`.
   */
  bool randomized_sizes;
  uint64_t size_seed;
} TjDetectorConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. Valid until the
 * next failing call on the same thread.
 */
const char *tj_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *tj_version(void);

/**
 * Frees a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void tj_string_free(char *s);

/**
 * Builds a grid from `len` returns, `m` per day. `delta <= 0` selects
 * `1/(252 m)`.
 *
 * # Safety
 * `returns` must point to `len` readable doubles; `out` must be writable.
 */
enum TjStatus tj_grid_new(const double *returns,
                          size_t len,
                          size_t m,
                          double delta,
                          struct TjGrid **out);

/**
 * Loads a grid from a text file; `layout` is a [`TjLayout`] value.
 * `delta <= 0` selects `1/(252 m)`.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum TjStatus tj_grid_load(const char *path,
                           size_t m,
                           uint32_t layout,
                           double delta,
                           struct TjGrid **out);

/**
 * # Safety
 * `grid` must be a live handle; the out pointers must be writable.
 */
enum TjStatus tj_grid_shape(const struct TjGrid *grid, size_t *m, size_t *days, double *delta);

/**
 * # Safety
 * `grid` must be a live handle; `buf` must hold `capacity` doubles.
 */
enum TjStatus tj_grid_returns(const struct TjGrid *grid,
                              double *buf,
                              size_t capacity,
                              size_t *written);

/**
 * Releases a grid. NULL is ignored.
 *
 * # Safety
 * `grid` must come from this library and not have been freed.
 */
void tj_grid_free(struct TjGrid *grid);

/**
 * Per-slot TOD factors into `tod` (NaN where undefined) and the bipower
 * level into `bar_alpha`. `bar_alpha` may be NULL.
 *
 * # Safety
 * `grid` must be a live handle; `tod` must hold `capacity` doubles.
 */
enum TjStatus tj_tod_profile(const struct TjGrid *grid,
                             double exponent,
                             double *tod,
                             size_t capacity,
                             size_t *written,
                             double *bar_alpha);

struct TjDetectorConfig tj_detector_config_default(void);

/**
 * Runs detection. `config` may be NULL for the defaults.
 *
 * # Safety
 * `grid` must be a live handle; `config`, if not NULL, must be readable;
 * `out` must be writable.
 */
enum TjStatus tj_detect(const struct TjGrid *grid,
                        const struct TjDetectorConfig *config,
                        struct TjReport **out);

/**
 * # Safety
 * `report` must be a live handle; `count` must be writable.
 */
enum TjStatus tj_report_jump_count(const struct TjReport *report, size_t *count);

/**
 * 0-based flat indices of detected jumps.
 *
 * # Safety
 * `report` must be a live handle; `buf` must hold `capacity` elements.
 */
enum TjStatus tj_report_jump_indices(const struct TjReport *report,
                                     size_t *buf,
                                     size_t capacity,
                                     size_t *written);

/**
 * Jump-size estimates aligned with the indices. Randomized sizes exist only
 * when the detector ran with `randomized_sizes`.
 *
 * # Safety
 * `report` must be a live handle; `buf` must hold `capacity` doubles.
 */
enum TjStatus tj_report_jump_sizes(const struct TjReport *report,
                                   bool randomized,
                                   double *buf,
                                   size_t capacity,
                                   size_t *written);

/**
 * New detections per round, in round order.
 *
 * # Safety
 * `report` must be a live handle; `buf` must hold `capacity` elements.
 */
enum TjStatus tj_report_round_counts(const struct TjReport *report,
                                     size_t *buf,
                                     size_t capacity,
                                     size_t *written);

/**
 * # Safety
 * `report` must be a live handle; `converged` must be writable.
 */
enum TjStatus tj_report_converged(const struct TjReport *report, bool *converged);

/**
 * The report as JSON (1-based indices, as written by the CLI). Free the
 * string with [`tj_string_free`].
 *
 * # Safety
 * `report` must be a live handle; `out` must be writable.
 */
enum TjStatus tj_report_to_json(const struct TjReport *report, char **out);

/**
 * # Safety
 * `report` must come from this library and not have been freed.
 */
void tj_report_free(struct TjReport *report);

/**
 * Simulates a path from a JSON configuration; missing fields take their
 * defaults and NULL means all defaults.
 *
 * # Safety
 * `config_json`, if not NULL, must be a NUL-terminated string; `out` must be
 * writable.
 */
enum TjStatus tj_simulate_json(const char *config_json, struct TjSimPath **out);

/**
 * Copies the simulated returns into a new grid handle.
 *
 * # Safety
 * `path` must be a live handle; `out` must be writable.
 */
enum TjStatus tj_simpath_grid(const struct TjSimPath *path, struct TjGrid **out);

/**
 * True jump slots (0-based) and their net sizes. `sizes` may be NULL to
 * skip them; otherwise it must hold `capacity` doubles.
 *
 * # Safety
 * `path` must be a live handle; buffers must hold `capacity` elements.
 */
enum TjStatus tj_simpath_true_jumps(const struct TjSimPath *path,
                                    size_t *indices,
                                    double *sizes,
                                    size_t capacity,
                                    size_t *written);

/**
 * # Safety
 * `path` must come from this library and not have been freed.
 */
void tj_simpath_free(struct TjSimPath *path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TOD_JUMPS_H */

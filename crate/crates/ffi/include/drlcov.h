#ifndef DRLCOV_H
#define DRLCOV_H

/* Generated by cbindgen from drlcov-ffi; regenerate with `cargo build -p drlcov-ffi` instead of editing. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Environment selector for `drlcov_run_training`. Passed as a plain `int`
 * so that an out-of-range value can be rejected instead of being undefined.
 */
typedef enum DrlcovEnvironment {
  /**
   * Pole balancing on a cart; 4-dimensional observations, 2 actions.
   */
  DRLCOV_ENVIRONMENT_CARTPOLE = 0,
  /**
   * Multi-lane traffic with IDM/MOBIL peers; 5 actions.
   */
  DRLCOV_ENVIRONMENT_HIGHWAY = 1,
} DrlcovEnvironment;

/**
 * Result code of every fallible call.
 */
typedef enum DrlcovStatus {
  /**
   * The call succeeded.
   */
  DRLCOV_STATUS_OK = 0,
  /**
   * A required pointer argument was NULL.
   */
  DRLCOV_STATUS_NULL_ARGUMENT = 1,
  /**
   * An argument was out of range or otherwise malformed.
   */
  DRLCOV_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The computation itself failed; see `drlcov_last_error`.
   */
  DRLCOV_STATUS_RUN_FAILED = 3,
  /**
   * An internal invariant was violated. This is a bug worth reporting.
   */
  DRLCOV_STATUS_PANIC = 4,
} DrlcovStatus;

/**
 * A completed training run. Opaque: read it through the `drlcov_run_*`
 * accessors and release it with `drlcov_run_free`.
 */
typedef struct DrlcovRun DrlcovRun;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *drlcov_version(void);

/**
 * Message describing the most recent failure on this thread, or an empty
 * string if the last call succeeded. Valid until the next `drlcov_*` call
 * on the same thread.
 */
const char *drlcov_last_error(void);

/**
 * Embed `n` samples of dimension `dim` (row-major in `samples`) into 2-D
 * with t-SNE. Writes `n` (x, y) pairs row-major into `out_xy`, which must
 * hold `2 * n` doubles. The run is deterministic in `seed`.
 *
 * Requirements: `n >= 4`, `dim >= 1`, `iterations >= 1`, and
 * `1 <= perplexity < n`; every sample component must be finite.
 *
 * # Safety
 * `samples` must point to `n * dim` readable doubles and `out_xy` to
 * `2 * n` writable doubles; the regions must not overlap.
 */
enum DrlcovStatus drlcov_tsne_embed(const double *samples,
                                    size_t n,
                                    size_t dim,
                                    double perplexity,
                                    size_t iterations,
                                    uint64_t seed,
                                    double *out_xy);

/**
 * Train one arm to completion and hand back an opaque run handle in
 * `*out_run`. `environment` takes a `DrlcovEnvironment` value. `episodes`
 * and `batch_episodes` override the environment defaults when nonzero; a
 * zero `batch_episodes` is clamped to `episodes` when the default cadence
 * would not fit. `maximize` switches initial-state selection from the
 * environment's own sampling to the coverage-maximizing scheduler.
 *
 * On success the caller owns the handle and must release it with
 * `drlcov_run_free`.
 *
 * # Safety
 * `out_run` must point to a writable `DrlcovRun*` slot.
 */
enum DrlcovStatus drlcov_run_training(int environment,
                                      size_t episodes,
                                      size_t batch_episodes,
                                      uint64_t seed,
                                      bool maximize,
                                      struct DrlcovRun **out_run);

/**
 * Number of episodes in the run, or 0 if `run` is NULL.
 *
 * # Safety
 * `run` must be NULL or a live handle from `drlcov_run_training`.
 */
size_t drlcov_run_episodes(const struct DrlcovRun *run);

/**
 * Cumulative reward of one episode, written to `*out`.
 *
 * # Safety
 * `run` must be NULL or a live handle from `drlcov_run_training`; `out`
 * must be NULL or point to a writable double.
 */
enum DrlcovStatus drlcov_run_reward(const struct DrlcovRun *run, size_t episode, double *out);

/**
 * Number of coverage batches in the run, or 0 if `run` is NULL.
 *
 * # Safety
 * `run` must be NULL or a live handle from `drlcov_run_training`.
 */
size_t drlcov_run_batches(const struct DrlcovRun *run);

/**
 * Cumulative coverage after one batch (0-indexed), written to `*out`.
 *
 * # Safety
 * `run` must be NULL or a live handle from `drlcov_run_training`; `out`
 * must be NULL or point to a writable double.
 */
enum DrlcovStatus drlcov_run_apc(const struct DrlcovRun *run, size_t batch, double *out);

/**
 * Coverage after the final batch; NaN if `run` is NULL or no batch ran.
 *
 * # Safety
 * `run` must be NULL or a live handle from `drlcov_run_training`.
 */
double drlcov_run_final_apc(const struct DrlcovRun *run);

/**
 * Release a run handle. NULL is a no-op; releasing twice is undefined.
 *
 * # Safety
 * `run` must be NULL or a handle from `drlcov_run_training` that has not
 * been freed yet; it must not be used after this call.
 */
void drlcov_run_free(struct DrlcovRun *run);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DRLCOV_H */

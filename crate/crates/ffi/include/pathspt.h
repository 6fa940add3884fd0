#ifndef PATHSPT_H
#define PATHSPT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes shared by every fallible function.
typedef enum PathsptStatus {
  PATHSPT_STATUS_OK = 0,
  PATHSPT_STATUS_NULL_POINTER = 1,
  PATHSPT_STATUS_INVALID_ARGUMENT = 2,
  PATHSPT_STATUS_LENGTH_MISMATCH = 3,
  PATHSPT_STATUS_WEALTH_NONPOSITIVE = 4,
  PATHSPT_STATUS_IO = 5,
  PATHSPT_STATUS_PARSE = 6,
  // `pathspt_stopping_time`: the level is never reached on the path.
  PATHSPT_STATUS_NOT_REACHED = 7,
  PATHSPT_STATUS_BUFFER_TOO_SMALL = 8,
  PATHSPT_STATUS_PANIC = 99,
} PathsptStatus;

typedef enum PathsptModel {
  PATHSPT_MODEL_GBM = 0,
  PATHSPT_MODEL_ROUGH_WALK = 1,
  PATHSPT_MODEL_DETERMINISTIC = 2,
} PathsptModel;

typedef enum PathsptGeneratorKind {
  PATHSPT_GENERATOR_KIND_QUADRATIC = 0,
  PATHSPT_GENERATOR_KIND_ENTROPY = 1,
  PATHSPT_GENERATOR_KIND_DIVERSITY = 2,
} PathsptGeneratorKind;

// Opaque portfolio generating function.
typedef struct PathsptGenerator PathsptGenerator;

// Opaque market-weight path.
typedef struct PathsptPath PathsptPath;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failure on this thread, or null. Valid until the
// next failing call on the same thread.
const char *pathspt_last_error(void);

// Builds a path from `n_times` times and a row-major `n_times × assets`
// weight matrix.
//
// # Safety
// `times` must point to `n_times` values, `weights` to `n_times * assets`
// values, and `out` must be writable.
enum PathsptStatus pathspt_path_from_weights(const double *times,
                                             const double *weights,
                                             size_t n_times,
                                             size_t assets,
                                             struct PathsptPath **out);

// Like [`pathspt_path_from_weights`] with capitalizations instead of weights.
//
// # Safety
// As for [`pathspt_path_from_weights`].
enum PathsptStatus pathspt_path_from_caps(const double *times,
                                          const double *caps,
                                          size_t n_times,
                                          size_t assets,
                                          struct PathsptPath **out);

// Simulates `steps + 1` samples. `vols` and `drifts` hold `assets` values
// each; `drifts` may be null for zero drift.
//
// # Safety
// `vols` must point to `assets` values, `drifts` to `assets` values or be
// null, and `out` must be writable.
enum PathsptStatus pathspt_path_simulate(enum PathsptModel model,
                                         size_t assets,
                                         size_t steps,
                                         double step_size,
                                         const double *vols,
                                         const double *drifts,
                                         uint64_t seed,
                                         uint64_t stream,
                                         struct PathsptPath **out);

// Reads a `time,mu1..` or `time,s1..` CSV file.
//
// # Safety
// `file` must be a NUL-terminated string and `out` writable.
enum PathsptStatus pathspt_path_read_csv(const char *file, struct PathsptPath **out);

// # Safety
// `path` must come from a path constructor and not be freed twice.
void pathspt_path_free(struct PathsptPath *path);

// Number of samples, or 0 for null.
//
// # Safety
// `path` must be a live handle or null.
size_t pathspt_path_len(const struct PathsptPath *path);

// Number of assets, or 0 for null.
//
// # Safety
// `path` must be a live handle or null.
size_t pathspt_path_assets(const struct PathsptPath *path);

// Copies the sample times into `out` (`len` ≥ path length).
//
// # Safety
// `path` must be live and `out` must hold `len` values.
enum PathsptStatus pathspt_path_copy_times(const struct PathsptPath *path, double *out, size_t len);

// Copies the row-major weight matrix into `out` (`len` ≥ samples × assets).
//
// # Safety
// `path` must be live and `out` must hold `len` values.
enum PathsptStatus pathspt_path_copy_weights(const struct PathsptPath *path,
                                             double *out,
                                             size_t len);

// Running `Σ_j [μ_j]` at every sample.
//
// # Safety
// `path` must be live and `out` must hold `len` values.
enum PathsptStatus pathspt_path_total_qv(const struct PathsptPath *path, double *out, size_t len);

// `p` is used only by the diversity generator and must lie in (0, 1).
//
// # Safety
// `out` must be writable.
enum PathsptStatus pathspt_generator_new(enum PathsptGeneratorKind kind,
                                         double p,
                                         struct PathsptGenerator **out);

// # Safety
// `gen` must come from [`pathspt_generator_new`] and not be freed twice.
void pathspt_generator_free(struct PathsptGenerator *gen);

// Portfolio weights generated at the open-simplex point `x`.
//
// # Safety
// `gen` must be live; `x` and `out` must hold `n` values.
enum PathsptStatus pathspt_generated_portfolio(const struct PathsptGenerator *gen,
                                               const double *x,
                                               size_t n,
                                               double *out);

// Relative wealth of the generated portfolio at every sample.
//
// # Safety
// `gen` and `path` must be live; `out` must hold `len` values.
enum PathsptStatus pathspt_value_process(const struct PathsptGenerator *gen,
                                         const struct PathsptPath *path,
                                         double *out,
                                         size_t len);

// Relative wealth of a constant-weight portfolio (`assets` weights).
//
// # Safety
// `weights` must hold the path's asset count; `out` must hold `len` values.
enum PathsptStatus pathspt_constant_value_process(const double *weights,
                                                  const struct PathsptPath *path,
                                                  double *out,
                                                  size_t len);

// Max master-equation residual on each dyadic level, coarsest first. The
// number of levels written is stored in `levels`.
//
// # Safety
// `gen` and `path` must be live; `out` must hold `len` values; `levels`
// must be writable.
enum PathsptStatus pathspt_master_residuals(const struct PathsptGenerator *gen,
                                            const struct PathsptPath *path,
                                            uint32_t depth,
                                            double *out,
                                            size_t len,
                                            size_t *levels);

// First sample index with `Σ_j [μ_j] ≥ a`. Returns `NotReached` (and leaves
// the outputs untouched) when the path's total is below `a`.
//
// # Safety
// `path` must be live; `index` and `time` must be writable.
enum PathsptStatus pathspt_stopping_time(const struct PathsptPath *path,
                                         double a,
                                         size_t *index,
                                         double *time);

// Roots of `½e^{A/2} = A` and the `A` where the appendix curve meets the line.
//
// # Safety
// The three outputs must be writable.
enum PathsptStatus pathspt_bound_crossings(size_t assets,
                                           double *lower,
                                           double *upper,
                                           double *appendix);

// `½e^{A/2}`.
double pathspt_fernholz_bound(double a);

// `1.25 J^{-3/2} A^{1/2}`.
//
// # Safety
// `out` must be writable.
enum PathsptStatus pathspt_appendix_bound(size_t assets, double a, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PATHSPT_H */

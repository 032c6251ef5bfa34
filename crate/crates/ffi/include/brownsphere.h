#ifndef BROWNSPHERE_H
#define BROWNSPHERE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BsStatus {
  BS_STATUS_OK = 0,
  BS_STATUS_NULL_POINTER = 1,
  BS_STATUS_INVALID_PARAMETER = 2,
  BS_STATUS_INDEX_OUT_OF_RANGE = 3,
  BS_STATUS_MALFORMED_STRUCTURE = 4,
  /**
   * The sample is too sparse for the inverse to answer.
   */
  BS_STATUS_SAMPLING_DENSITY = 5,
  BS_STATUS_IO = 6,
  BS_STATUS_FORMAT = 7,
  /**
   * A caller-provided buffer is too small; nothing was written.
   */
  BS_STATUS_BUFFER_TOO_SMALL = 8,
  BS_STATUS_PANIC = 9,
} BsStatus;

/**
 * The output of the inverse map.
 */
typedef struct BsRecovered BsRecovered;

/**
 * A discretized snake `(f, g)` on `n + 1` grid times.
 */
typedef struct BsSnake BsSnake;

/**
 * A marked sample of the sphere: distances, masses, `x⁰`, `x¹`, `ε`.
 */
typedef struct BsSphere BsSphere;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or an empty string. Valid
 * until the next call on the same thread.
 */
const char *bs_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *bs_version(void);

/**
 * Samples a snake with `n` grid intervals (`n` even, at least 2).
 */
enum BsStatus bs_snake_sample(size_t n, uint64_t seed, struct BsSnake **out);

/**
 * A snake from `len` values of `f` and `g`.
 */
enum BsStatus bs_snake_from_arrays(const double *f,
                                   const double *g,
                                   size_t len,
                                   uint64_t seed,
                                   struct BsSnake **out);

enum BsStatus bs_snake_load(const char *file, struct BsSnake **out);

enum BsStatus bs_snake_save(const struct BsSnake *snake, const char *file);

/**
 * Number of grid values, `n + 1`; zero for a null handle.
 */
size_t bs_snake_len(const struct BsSnake *snake);

enum BsStatus bs_snake_copy_f(const struct BsSnake *snake, double *buf, size_t len);

enum BsStatus bs_snake_copy_g(const struct BsSnake *snake, double *buf, size_t len);

/**
 * First argmin `s*` of the labels and the orientation bit `ε`.
 */
enum BsStatus bs_snake_marks(const struct BsSnake *snake, size_t *s_star, int8_t *epsilon);

/**
 * The time reversal `R(h)`.
 */
enum BsStatus bs_snake_reverse(const struct BsSnake *snake, struct BsSnake **out);

/**
 * Distance between grid times `s` and `t` in the tree coded by `f`.
 */
enum BsStatus bs_tree_dist(const struct BsSnake *snake, size_t s, size_t t, double *out);

void bs_snake_free(struct BsSnake *snake);

/**
 * Samples `m` grid times of `snake` plus its marked times and computes the
 * sphere distance on them. `k_max = 0` and `delta < 0` select the defaults.
 */
enum BsStatus bs_sphere_build(const struct BsSnake *snake,
                              size_t m,
                              size_t k_max,
                              double delta,
                              struct BsSphere **out);

/**
 * A sphere sample from a full `m × m` row-major distance matrix (only the
 * upper triangle is read), uniform masses and the marks. `epsilon` is `+1`,
 * `-1`, or `0` for unknown.
 */
enum BsStatus bs_sphere_from_matrix(const double *dist,
                                    size_t m,
                                    size_t i0,
                                    size_t i1,
                                    int8_t epsilon,
                                    struct BsSphere **out);

/**
 * Number of sample points; zero for a null handle.
 */
size_t bs_sphere_size(const struct BsSphere *sphere);

enum BsStatus bs_sphere_distance(const struct BsSphere *sphere, size_t i, size_t j, double *out);

/**
 * Grid times of the sample points, as `u64`.
 */
enum BsStatus bs_sphere_copy_points(const struct BsSphere *sphere, uint64_t *buf, size_t len);

/**
 * Indices of `x⁰` and `x¹` and the orientation (`0` when unknown).
 */
enum BsStatus bs_sphere_marks(const struct BsSphere *sphere,
                              size_t *i0,
                              size_t *i1,
                              int8_t *epsilon);

/**
 * Replaces the orientation: `+1`, `-1`, or `0` to forget it.
 */
enum BsStatus bs_sphere_set_epsilon(struct BsSphere *sphere, int8_t epsilon);

void bs_sphere_free(struct BsSphere *sphere);

/**
 * Runs the inverse map with default parameters.
 */
enum BsStatus bs_invert(const struct BsSphere *sphere, struct BsRecovered **out);

/**
 * Number of grid values of the recovered snake, `m + 1`.
 */
size_t bs_recovered_len(const struct BsRecovered *rec);

enum BsStatus bs_recovered_copy_f(const struct BsRecovered *rec, double *buf, size_t len);

enum BsStatus bs_recovered_copy_g(const struct BsRecovered *rec, double *buf, size_t len);

/**
 * Recovered time of `x¹`; NaN for a null handle.
 */
double bs_recovered_s_star(const struct BsRecovered *rec);

void bs_recovered_free(struct BsRecovered *rec);

/**
 * Duration of a time-changed Brownian path from its `len` values, over a
 * strictly decreasing spacing schedule.
 */
enum BsStatus bs_quadvar_duration(const double *values,
                                  size_t len,
                                  const double *schedule,
                                  size_t schedule_len,
                                  double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BROWNSPHERE_H */

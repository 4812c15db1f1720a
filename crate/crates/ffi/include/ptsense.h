#ifndef PTSENSE_H
#define PTSENSE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PtsStatus {
  PTS_OK = 0,
  PTS_ERR_NULL = 1,
  PTS_ERR_PARAMETER = 2,
  PTS_ERR_DEGENERATE = 3,
  PTS_ERR_PARSE = 4,
  PTS_ERR_IO = 5,
  PTS_ERR_PANIC = 6,
} PtsStatus;

typedef enum PtsOperatorKind {
  PTS_GAUSSIAN = 0,
  PTS_BERNOULLI = 1,
  PTS_THREE_VALUED = 2,
  PTS_PIECEWISE_TOEPLITZ = 3,
} PtsOperatorKind;

typedef enum PtsSolver {
  PTS_SVT = 0,
  PTS_ALS = 1,
} PtsSolver;

/**
 * Opaque dense matrix.
 */
typedef struct PtsMatrix PtsMatrix;

/**
 * Opaque sensing operator.
 */
typedef struct PtsOperator PtsOperator;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length without the NUL;
 * 0 when there is no error.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t pts_last_error_message(char *buf, size_t len);

/**
 * New `rows x cols` matrix from column-major `data`.
 *
 * # Safety
 * `data` must point to `rows * cols` doubles; `out` must be writable.
 */
enum PtsStatus pts_matrix_new(size_t rows, size_t cols, const double *data, struct PtsMatrix **out);

/**
 * Random `n1 x n2` matrix of rank `r`.
 *
 * # Safety
 * `out` must be writable.
 */
enum PtsStatus pts_matrix_low_rank(size_t n1,
                                   size_t n2,
                                   size_t r,
                                   uint64_t seed,
                                   struct PtsMatrix **out);

/**
 * # Safety
 * `m` must be null or a live matrix handle.
 */
size_t pts_matrix_rows(const struct PtsMatrix *m);

/**
 * # Safety
 * `m` must be null or a live matrix handle.
 */
size_t pts_matrix_cols(const struct PtsMatrix *m);

/**
 * Copy the entries (column-major) into `buf`, which holds `len` doubles.
 *
 * # Safety
 * `m` must be a live handle; `buf` must point to `len` writable doubles.
 */
enum PtsStatus pts_matrix_data(const struct PtsMatrix *m, double *buf, size_t len);

/**
 * # Safety
 * `m` must be null or a handle not yet freed.
 */
void pts_matrix_free(struct PtsMatrix *m);

/**
 * `||a - b||_F / ||b||_F`.
 *
 * # Safety
 * `a`, `b` must be live handles; `out` writable.
 */
enum PtsStatus pts_relative_error(const struct PtsMatrix *a,
                                  const struct PtsMatrix *b,
                                  double *out);

/**
 * Random operator with `m` measurements of `n1 x n2` matrices. `c0` is
 * the truncation constant of the piecewise Toeplitz law (ignored for the
 * other kinds).
 *
 * # Safety
 * `out` must be writable.
 */
enum PtsStatus pts_operator_generate(enum PtsOperatorKind kind,
                                     size_t m,
                                     size_t n1,
                                     size_t n2,
                                     double c0,
                                     uint64_t seed,
                                     struct PtsOperator **out);

/**
 * Dense copy of an operator (same measurements, explicit storage).
 *
 * # Safety
 * `op` must be a live handle; `out` writable.
 */
enum PtsStatus pts_operator_materialize(const struct PtsOperator *op, struct PtsOperator **out);

/**
 * # Safety
 * `op` must be null or a live handle.
 */
size_t pts_operator_measurements(const struct PtsOperator *op);

/**
 * Stored floating-point values.
 *
 * # Safety
 * `op` must be null or a live handle.
 */
size_t pts_operator_storage_cost(const struct PtsOperator *op);

/**
 * `y = A(X)`; `y` holds `len` doubles, `len` must equal the measurement count.
 *
 * # Safety
 * `op`, `x` live handles; `y` points to `len` writable doubles.
 */
enum PtsStatus pts_operator_apply(const struct PtsOperator *op,
                                  const struct PtsMatrix *x,
                                  double *y,
                                  size_t len);

/**
 * `A*(y)` as a new matrix.
 *
 * # Safety
 * `op` live handle; `y` points to `len` doubles; `out` writable.
 */
enum PtsStatus pts_operator_adjoint(const struct PtsOperator *op,
                                    const double *y,
                                    size_t len,
                                    struct PtsMatrix **out);

/**
 * # Safety
 * `op` must be null or a handle not yet freed.
 */
void pts_operator_free(struct PtsOperator *op);

/**
 * Recover `X` from `y = A(X)`.
 *
 * `rank` is required for ALS and ignored by SVT. `max_iters = 0` and a
 * NaN `tau` select the defaults. `iterations` may be null.
 *
 * # Safety
 * `op` live handle; `y` points to `len` doubles; `out` writable;
 * `iterations` null or writable.
 */
enum PtsStatus pts_solve(enum PtsSolver solver,
                         const struct PtsOperator *op,
                         const double *y,
                         size_t len,
                         size_t rank,
                         size_t max_iters,
                         double tau,
                         struct PtsMatrix **out,
                         size_t *iterations);

/**
 * `ceil(c r^2 (n1 + n2) ln(n1 n2))`.
 *
 * # Safety
 * `out` must be writable.
 */
enum PtsStatus pts_measurement_bound(size_t n1, size_t n2, size_t r, double c, uint64_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PTSENSE_H */

#ifndef MVZSL_H
#define MVZSL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum MvzslStatus {
  MVZSL_STATUS_OK = 0,
  MVZSL_STATUS_NULL_POINTER = 1,
  MVZSL_STATUS_INVALID_UTF8 = 2,
  MVZSL_STATUS_INVALID_ARGUMENT = 3,
  MVZSL_STATUS_DIMENSION_MISMATCH = 4,
  MVZSL_STATUS_NON_FINITE = 5,
  MVZSL_STATUS_SINGULAR_SYSTEM = 6,
  MVZSL_STATUS_EIGEN_FAILURE = 7,
  MVZSL_STATUS_DEGENERATE_BANDWIDTH = 8,
  MVZSL_STATUS_SINGULAR_PROPAGATION = 9,
  MVZSL_STATUS_NO_SUPERVISION = 10,
  MVZSL_STATUS_IO = 11,
  MVZSL_STATUS_PARSE = 12,
  MVZSL_STATUS_BUFFER_TOO_SMALL = 13,
  MVZSL_STATUS_PANIC = 14,
  MVZSL_STATUS_OTHER = 15,
} MvzslStatus;

/**
 * View identifiers, matching the library's `X`, `A` and `V`.
 */
typedef enum MvzslView {
  MVZSL_VIEW_FEATURES = 0,
  MVZSL_VIEW_ATTRIBUTES = 1,
  MVZSL_VIEW_WORD_VECTORS = 2,
} MvzslView;

/**
 * Opaque fitted multi-view CCA model.
 */
typedef struct MvzslMvcca MvzslMvcca;

/**
 * Opaque fused random walk over one or more graphs.
 */
typedef struct MvzslWalk MvzslWalk;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buf` (NUL
 * terminated, truncated to `len`). Returns the full message length in
 * bytes, or 0 when there is no error.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t mvzsl_last_error(char *buf, size_t len);

/**
 * Fits a multi-view CCA model on `n_views` views sharing `n_rows` rows.
 * `data[i]` holds view `i` as an `n_rows x dims[i]` row-major matrix.
 * `eps_relative` scales each view's mean covariance diagonal to give its
 * ridge.
 *
 * # Safety
 * `views`, `data` and `dims` must point to `n_views` valid entries and every
 * `data[i]` to `n_rows * dims[i]` doubles; `out` must be writable.
 */
enum MvzslStatus mvzsl_mvcca_fit(const enum MvzslView *views,
                                 const double *const *data,
                                 const size_t *dims,
                                 size_t n_views,
                                 size_t n_rows,
                                 double eps_relative,
                                 struct MvzslMvcca **out);

/**
 * Embedding dimension of a fitted model, 0 for a null handle.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
size_t mvzsl_mvcca_embedding_dim(const struct MvzslMvcca *model);

/**
 * Writes the `embedding_dim` generalized eigenvalues into `out`.
 *
 * # Safety
 * `model` must be a live handle and `out` point to `len` writable doubles.
 */
enum MvzslStatus mvzsl_mvcca_eigenvalues(const struct MvzslMvcca *model, double *out, size_t len);

/**
 * Embeds `n_rows` rows of `view` (row-major, `cols` wide) and writes the
 * unit-length embedded rows, `n_rows x embedding_dim`, into `out`.
 *
 * # Safety
 * `model` must be a live handle, `rows` hold `n_rows * cols` doubles and
 * `out` have room for `out_len` doubles.
 */
enum MvzslStatus mvzsl_mvcca_embed(const struct MvzslMvcca *model,
                                   enum MvzslView view,
                                   const double *rows,
                                   size_t n_rows,
                                   size_t cols,
                                   double *out,
                                   size_t out_len);

/**
 * # Safety
 * `model` must be null or a handle not yet freed.
 */
void mvzsl_mvcca_free(struct MvzslMvcca *model);

/**
 * Fuses `n_graphs` dense symmetric `n_nodes x n_nodes` weight matrices
 * (`weights[g]`, row-major, nonnegative, zero diagonal) into one random
 * walk.
 *
 * # Safety
 * `weights` must point to `n_graphs` arrays of `n_nodes^2` doubles; `out`
 * must be writable.
 */
enum MvzslStatus mvzsl_walk_new(const double *const *weights,
                                size_t n_graphs,
                                size_t n_nodes,
                                struct MvzslWalk **out);

/**
 * Writes the fused stationary distribution (`n_nodes` values) into `out`.
 *
 * # Safety
 * `walk` must be a live handle and `out` point to `len` writable doubles.
 */
enum MvzslStatus mvzsl_walk_stationary(const struct MvzslWalk *walk, double *out, size_t len);

/**
 * Propagates labels over the walk. `labels[k]` is the class of node `k` or
 * -1 when unknown. Writes `n_nodes x n_classes` scores (row-major) into
 * `scores` and, when `predictions` is non-null, the argmax class per node.
 *
 * # Safety
 * `walk` must be a live handle; `labels` must hold `n_nodes` entries,
 * `scores` room for `n_nodes * n_classes` doubles and `predictions`, if
 * non-null, room for `n_nodes` entries.
 */
enum MvzslStatus mvzsl_walk_propagate(const struct MvzslWalk *walk,
                                      const int64_t *labels,
                                      size_t n_classes,
                                      double eta,
                                      double *scores,
                                      size_t *predictions);

/**
 * # Safety
 * `walk` must be null or a handle not yet freed.
 */
void mvzsl_walk_free(struct MvzslWalk *walk);

/**
 * Runs an experiment described by a JSON config (the CLI's `ablate` format)
 * and returns the run records as a JSON array in `*out`, to be released
 * with [`mvzsl_string_free`].
 *
 * # Safety
 * `config_json` must be a NUL-terminated string and `out` writable.
 */
enum MvzslStatus mvzsl_run_experiment(const char *config_json, char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library and not yet freed.
 */
void mvzsl_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MVZSL_H */

#ifndef HFA_FFI_H
#define HFA_FFI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HfaStatus {
  HFA_STATUS_OK = 0,
  HFA_STATUS_NULL_POINTER = 1,
  HFA_STATUS_INVALID_INPUT = 2,
  HFA_STATUS_DEGENERATE = 3,
  HFA_STATUS_PARSE = 4,
  HFA_STATUS_INFEASIBLE = 5,
  HFA_STATUS_CONFIG = 6,
  HFA_STATUS_IO = 7,
  HFA_STATUS_BUFFER_TOO_SMALL = 8,
  HFA_STATUS_PANIC = 9,
} HfaStatus;

typedef enum HfaKernel {
  HFA_KERNEL_LINEAR = 0,
  HFA_KERNEL_RBF = 1,
} HfaKernel;

/**
 * Opaque trained model (one binary model per class).
 */
typedef struct HfaModel HfaModel;

/**
 * Training settings; fill with [`hfa_train_options_default`] and adjust.
 */
typedef struct HfaTrainOptions {
  double c;
  double lambda;
  enum HfaKernel kernel;
  /**
   * RBF bandwidth; a value `<= 0` selects the per-domain median heuristic.
   */
  double gamma;
  uint32_t t_max;
  double conv_tol;
} HfaTrainOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message, NUL-terminated, into `buf`.
 *
 * Returns the message length in bytes excluding the terminator; if that is
 * `>= len`, the message was truncated. `buf` may be null when `len` is 0.
 */
size_t hfa_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *hfa_version(void);

enum HfaStatus hfa_train_options_default(struct HfaTrainOptions *out);

/**
 * Trains one-vs-rest models from row-major feature arrays.
 *
 * `source_x` holds `n_source * source_dim` values, `source_y` holds `n_source`
 * class labels; likewise for the target. `options` may be null for defaults.
 * On success `*out` owns a new model that must be passed to [`hfa_model_free`].
 */
enum HfaStatus hfa_model_train(const double *source_x,
                               const uint32_t *source_y,
                               size_t n_source,
                               size_t source_dim,
                               const double *target_x,
                               const uint32_t *target_y,
                               size_t n_target,
                               size_t target_dim,
                               const struct HfaTrainOptions *options,
                               struct HfaModel **out);

/**
 * Loads a model file written by [`hfa_model_save`] or the `hfa train` command.
 */
enum HfaStatus hfa_model_load(const char *path, struct HfaModel **out);

enum HfaStatus hfa_model_save(const struct HfaModel *model, const char *path);

/**
 * Releases a model; null is ignored.
 */
void hfa_model_free(struct HfaModel *model);

/**
 * Number of classes, or 0 for a null model.
 */
size_t hfa_model_num_classes(const struct HfaModel *model);

/**
 * Target feature dimension, or 0 for a null model.
 */
size_t hfa_model_target_dim(const struct HfaModel *model);

/**
 * Writes the class labels, ascending, into `out` (capacity `len`).
 */
enum HfaStatus hfa_model_classes(const struct HfaModel *model, uint32_t *out, size_t len);

/**
 * Per-class decision values for one target vector `x` of length `dim`, in class order.
 */
enum HfaStatus hfa_model_decision_values(const struct HfaModel *model,
                                         const double *x,
                                         size_t dim,
                                         double *out,
                                         size_t len);

/**
 * Predicts a class for each of `n` row-major target vectors; ties go to the smaller class.
 */
enum HfaStatus hfa_model_predict(const struct HfaModel *model,
                                 const double *xs,
                                 size_t n,
                                 size_t dim,
                                 uint32_t *out_labels);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HFA_FFI_H */

#ifndef SVMSCREEN_H
#define SVMSCREEN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SvmStatus {
  SVM_STATUS_OK = 0,
  SVM_STATUS_NULL_POINTER = 1,
  SVM_STATUS_INVALID_ARGUMENT = 2,
  SVM_STATUS_PARSE = 3,
  SVM_STATUS_IO = 4,
  SVM_STATUS_INFEASIBLE = 5,
  SVM_STATUS_NOT_CONVERGED = 6,
  SVM_STATUS_BUFFER_TOO_SMALL = 7,
  SVM_STATUS_INTERNAL = 8,
  SVM_STATUS_PANIC = 9,
} SvmStatus;

/**
 * Training data.
 */
typedef struct SvmDataset SvmDataset;

/**
 * A solved model.
 */
typedef struct SvmModel SvmModel;

/**
 * Result of one screening pass.
 */
typedef struct SvmScreenReport SvmScreenReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *svm_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *svm_version(void);

/**
 * Reads a sparse `label index:value ...` file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SvmStatus svm_dataset_read(const char *path, struct SvmDataset **out);

/**
 * Parses sparse-format text held in memory.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SvmStatus svm_dataset_parse(const char *text, struct SvmDataset **out);

/**
 * Builds a dataset from a row-major `n_samples × n_features` matrix.
 *
 * # Safety
 * `rows` must point to `n_samples * n_features` doubles, `labels` to
 * `n_samples` doubles, and `out` must be valid.
 */
enum SvmStatus svm_dataset_from_dense(const double *rows,
                                      size_t n_samples,
                                      size_t n_features,
                                      const double *labels,
                                      struct SvmDataset **out);

/**
 * # Safety
 * `data` must come from a dataset constructor and not be used afterwards.
 */
void svm_dataset_free(struct SvmDataset *data);

/**
 * # Safety
 * `data` must be a live handle; out pointers must be valid.
 */
enum SvmStatus svm_dataset_shape(const struct SvmDataset *data,
                                 size_t *n_samples,
                                 size_t *n_features);

/**
 * Smallest λ with an all-zero solution and the bias of that solution.
 *
 * # Safety
 * `data` must be a live handle; out pointers must be valid.
 */
enum SvmStatus svm_lambda_max(const struct SvmDataset *data, double *lambda_max, double *bias);

/**
 * Solves at `lambda`. Non-positive `tol` or zero `max_iter` select the
 * defaults. A model is returned even when the solver did not converge; check
 * [`svm_model_converged`].
 *
 * # Safety
 * `data` must be a live handle and `out` valid.
 */
enum SvmStatus svm_solve(const struct SvmDataset *data,
                         double lambda,
                         double tol,
                         size_t max_iter,
                         struct SvmModel **out);

/**
 * # Safety
 * `model` must come from [`svm_solve`] and not be used afterwards.
 */
void svm_model_free(struct SvmModel *model);

/**
 * Copies the dense weight vector. Pass a null `buf` to query the length.
 *
 * # Safety
 * `model` must be live; `buf` must hold `len` doubles if non-null.
 */
enum SvmStatus svm_model_weights(const struct SvmModel *model,
                                 double *buf,
                                 size_t len,
                                 size_t *required);

/**
 * # Safety
 * `model` must be live; out pointers must be valid or null.
 */
enum SvmStatus svm_model_summary(const struct SvmModel *model,
                                 double *bias,
                                 double *objective,
                                 bool *converged);

/**
 * # Safety
 * `model` must be live and `converged` valid.
 */
enum SvmStatus svm_model_converged(const struct SvmModel *model, bool *converged);

/**
 * Screens every feature for `lambda2`.
 *
 * The dual point at `lambda1` is taken from `theta1` (length `n_samples`)
 * when non-null. Otherwise it is computed: in closed form when `lambda1` is
 * non-positive or equals λ_max, by a full solve otherwise.
 *
 * # Safety
 * `data` must be live; `theta1` must hold `theta1_len` doubles if non-null;
 * `out` must be valid.
 */
enum SvmStatus svm_screen(const struct SvmDataset *data,
                          double lambda1,
                          const double *theta1,
                          size_t theta1_len,
                          double lambda2,
                          struct SvmScreenReport **out);

/**
 * # Safety
 * `report` must come from [`svm_screen`] and not be used afterwards.
 */
void svm_report_free(struct SvmScreenReport *report);

/**
 * 0-based indices of kept features. Pass a null `buf` to query the count.
 *
 * # Safety
 * `report` must be live; `buf` must hold `len` entries if non-null.
 */
enum SvmStatus svm_report_kept(const struct SvmScreenReport *report,
                               size_t *buf,
                               size_t len,
                               size_t *required);

/**
 * Per-feature bounds; a feature is kept when its bound is at least `1 − 1e-9`.
 *
 * # Safety
 * `report` must be live; `buf` must hold `len` doubles if non-null.
 */
enum SvmStatus svm_report_bounds(const struct SvmScreenReport *report,
                                 double *buf,
                                 size_t len,
                                 size_t *required);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SVMSCREEN_H */

#ifndef STEINIS_H
#define STEINIS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SteinisStatus {
  STEINIS_STATUS_OK = 0,
  STEINIS_STATUS_NULL_POINTER = 1,
  STEINIS_STATUS_CONTRACT = 2,
  STEINIS_STATUS_DOMAIN = 3,
  STEINIS_STATUS_NUMERICAL = 4,
  STEINIS_STATUS_INPUT = 5,
  STEINIS_STATUS_PARSE = 6,
  STEINIS_STATUS_CONFIG = 7,
  STEINIS_STATUS_IO = 8,
  STEINIS_STATUS_PANIC = 9,
} SteinisStatus;

typedef enum SteinisKernelFamily {
  STEINIS_KERNEL_FAMILY_IMQ = 0,
  STEINIS_KERNEL_FAMILY_GAUSSIAN = 1,
  STEINIS_KERNEL_FAMILY_INVERSE_LOG = 2,
} SteinisKernelFamily;

// Opaque Gram matrix.
typedef struct SteinisGram SteinisGram;

// Opaque Bayesian logistic-regression posterior.
typedef struct SteinisLogistic SteinisLogistic;

// Base kernel parameters; `beta` is used by the IMQ family only.
typedef struct SteinisKernel {
  enum SteinisKernelFamily family;
  double alpha;
  double beta;
} SteinisKernel;

typedef struct SteinisQpReport {
  double objective;
  double kkt_residual;
  size_t iterations;
  // 1 when the KKT residual met the tolerance, 0 at the iteration cap.
  int32_t converged;
  double jitter;
} SteinisQpReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. The pointer is
// valid until the next failing call on the same thread.
const char *steinis_last_error(void);

// Copies an `n x n` row-major symmetric matrix into a new Gram handle.
//
// # Safety
// `entries` must point to `n * n` doubles; `out` must be writable.
enum SteinisStatus steinis_gram_from_entries(size_t n,
                                             const double *entries,
                                             struct SteinisGram **out);

// Gram matrix of a Stein kernel on `n` points in `d` dimensions with
// caller-supplied scores. `marginal` selects the coordinate-wise kernel.
//
// # Safety
// `points` and `scores` must each point to `n * d` doubles; `kernel` and
// `out` must be valid.
enum SteinisStatus steinis_gram_from_scores(const double *points,
                                            const double *scores,
                                            size_t n,
                                            size_t d,
                                            const struct SteinisKernel *kernel,
                                            int32_t marginal,
                                            struct SteinisGram **out);

// Canonical Stein Gram matrix of `n` points under a logistic posterior.
//
// # Safety
// `model`, `kernel` and `out` must be valid; `points` must hold `n * dim` doubles
// where `dim` is [`steinis_logistic_dim`].
enum SteinisStatus steinis_gram_from_logistic(const struct SteinisLogistic *model,
                                              const double *points,
                                              size_t n,
                                              const struct SteinisKernel *kernel,
                                              struct SteinisGram **out);

// # Safety
// `gram` must come from a `steinis_gram_*` constructor, or be NULL.
void steinis_gram_free(struct SteinisGram *gram);

// Side length of the matrix, or 0 for NULL.
//
// # Safety
// `gram` must be a live handle or NULL.
size_t steinis_gram_size(const struct SteinisGram *gram);

// Copies the `n * n` row-major entries into `out`.
//
// # Safety
// `gram` must be live; `out` must hold `len` doubles.
enum SteinisStatus steinis_gram_entries(const struct SteinisGram *gram, double *out, size_t len);

// Solves `min wᵀKw` over the probability simplex. `max_iter = 0` uses the
// default cap. `report` may be NULL.
//
// # Safety
// `gram` must be live; `weights_out` must hold `n` doubles.
enum SteinisStatus steinis_solve(const struct SteinisGram *gram,
                                 double tol,
                                 size_t max_iter,
                                 double *weights_out,
                                 size_t n,
                                 struct SteinisQpReport *report);

// `wᵀKw`; `weights` must lie on the simplex.
//
// # Safety
// `gram` must be live; `weights` must hold `n` doubles; `out` must be writable.
enum SteinisStatus steinis_ksd_squared(const struct SteinisGram *gram,
                                       const double *weights,
                                       size_t n,
                                       double *out);

// Euclidean projection of `v` onto the probability simplex.
//
// # Safety
// `v` and `out` must each hold `n` doubles.
enum SteinisStatus steinis_project_simplex(const double *v, size_t n, double *out);

// Logistic posterior from `n_data` rows of `dim` raw features and labels in
// {0, 1} or {-1, 1}. Standardization and the intercept column follow the flags.
//
// # Safety
// `features` must hold `n_data * dim` doubles, `labels` `n_data`; `out` writable.
enum SteinisStatus steinis_logistic_new(const double *features,
                                        const double *labels,
                                        size_t n_data,
                                        size_t dim,
                                        double prior_precision,
                                        int32_t standardize,
                                        int32_t intercept,
                                        struct SteinisLogistic **out);

// # Safety
// `model` must come from [`steinis_logistic_new`], or be NULL.
void steinis_logistic_free(struct SteinisLogistic *model);

// Parameter dimension (features plus intercept when enabled), 0 for NULL.
//
// # Safety
// `model` must be live or NULL.
size_t steinis_logistic_dim(const struct SteinisLogistic *model);

// Full-data score `∇ log p(x)`.
//
// # Safety
// `model` must be live; `x` and `out` must each hold `dim` doubles.
enum SteinisStatus steinis_logistic_score(const struct SteinisLogistic *model,
                                          const double *x,
                                          size_t dim,
                                          double *out);

// Runs TULA (`gamma = 0` gives ULA) on the `dim`-dimensional standard
// Gaussian from the origin and writes `n_steps` points row-major to `out`.
//
// # Safety
// `out` must hold `n_steps * dim` doubles.
enum SteinisStatus steinis_tula_gaussian(size_t dim,
                                         double h,
                                         double gamma,
                                         size_t n_steps,
                                         uint64_t seed,
                                         double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STEINIS_H */

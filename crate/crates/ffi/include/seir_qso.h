#ifndef SEIR_QSO_H
#define SEIR_QSO_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Violation bits set by [`seir_validate_params`].
 */
#define SEIR_VIOLATION_A 1

#define SEIR_VIOLATION_B (1 << 1)

#define SEIR_VIOLATION_BETA (1 << 2)

#define SEIR_VIOLATION_Q (1 << 3)

#define SEIR_VIOLATION_BETA_Q (1 << 4)

typedef enum SeirStatus {
  SEIR_STATUS_OK = 0,
  SEIR_STATUS_NULL_POINTER = 1,
  SEIR_STATUS_NON_FINITE = 2,
  SEIR_STATUS_INADMISSIBLE = 3,
  SEIR_STATUS_OFF_SIMPLEX = 4,
  SEIR_STATUS_DRIFT = 5,
  SEIR_STATUS_ALPHA_OUT_OF_RANGE = 6,
  SEIR_STATUS_UNDEFINED_THRESHOLD = 7,
  SEIR_STATUS_DEGENERATE_WINDOW = 8,
  SEIR_STATUS_TOO_SHORT = 9,
  SEIR_STATUS_INDEX_OUT_OF_RANGE = 10,
  SEIR_STATUS_INTERNAL = 255,
} SeirStatus;

/**
 * Opaque 4×4×4 coefficient tensor.
 */
typedef struct SeirTensor SeirTensor;

/**
 * Opaque simulated trajectory.
 */
typedef struct SeirTrajectory SeirTrajectory;

typedef struct SeirParams {
  double beta;
  double q;
  double a;
  double b;
} SeirParams;

typedef struct SeirState {
  double s;
  double e;
  double i;
  double r;
} SeirState;

/**
 * `bound_ok`: -1 not applicable, 0 violated, 1 satisfied.
 */
typedef struct SeirLimitReport {
  struct SeirState limit_state;
  uint64_t iterations;
  bool converged;
  int32_t bound_ok;
  /**
   * NaN when undefined.
   */
  double critical_alpha;
} SeirLimitReport;

/**
 * `regime`: -1 undefined (β = 0), 0 below, 1 at, 2 above the threshold.
 */
typedef struct SeirSpectralReport {
  double alpha;
  double mu1;
  double mu2;
  double mu3;
  double discriminant;
  /**
   * NaN when undefined.
   */
  double critical_alpha;
  int32_t regime;
  uint32_t stable_dim;
  uint32_t center_dim;
  uint32_t unstable_dim;
} SeirSpectralReport;

/**
 * Per-family axiom results; `*_at` are 1-based `(i, j, k)` of the worst entry.
 */
typedef struct SeirTensorReport {
  bool passed;
  bool symmetry_passed;
  double symmetry_worst;
  uint32_t symmetry_at[3];
  bool non_negativity_passed;
  double non_negativity_worst;
  uint32_t non_negativity_at[3];
  bool stochasticity_passed;
  double stochasticity_worst;
  uint32_t stochasticity_at[3];
} SeirTensorReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static, NUL-terminated description of a status code.
 */
const char *seir_status_message(enum SeirStatus status);

/**
 * Writes a bitmask of `SEIR_VIOLATION_*` flags; 0 means admissible.
 *
 * # Safety
 * `p` must point to a valid `SeirParams` and `violations` to writable memory.
 */
enum SeirStatus seir_validate_params(const struct SeirParams *p, uint32_t *violations);

/**
 * One day of the map.
 *
 * # Safety
 * Pointers must be valid; `out` may alias `x`.
 */
enum SeirStatus seir_step(const struct SeirParams *p,
                          const struct SeirState *x,
                          struct SeirState *out);

/**
 * Simulates `steps` days; the handle holds `steps + 1` states.
 *
 * # Safety
 * Pointers must be valid. On success `*out` owns a handle to release with
 * [`seir_trajectory_free`]; on failure it is set to null.
 */
enum SeirStatus seir_simulate(const struct SeirParams *p,
                              const struct SeirState *x0,
                              size_t steps,
                              struct SeirTrajectory **out);

/**
 * # Safety
 * `t` must be null or a handle from [`seir_simulate`] not yet freed.
 */
void seir_trajectory_free(struct SeirTrajectory *t);

/**
 * Number of stored states (days 0 through `steps`).
 *
 * # Safety
 * `t` must be a live handle and `len` writable.
 */
enum SeirStatus seir_trajectory_len(const struct SeirTrajectory *t, size_t *len);

/**
 * # Safety
 * `t` must be a live handle and `out` writable.
 */
enum SeirStatus seir_trajectory_state(const struct SeirTrajectory *t,
                                      size_t day,
                                      struct SeirState *out);

/**
 * Day and value of the largest infectious fraction (earliest on ties).
 *
 * # Safety
 * `t` must be a live handle; `day` and `value` writable.
 */
enum SeirStatus seir_trajectory_peak(const struct SeirTrajectory *t, size_t *day, double *value);

/**
 * First day at or after the peak with `i < threshold`; `*found` is false
 * when the horizon ends first.
 *
 * # Safety
 * `t` must be a live handle; `day` and `found` writable.
 */
enum SeirStatus seir_trajectory_completion_day(const struct SeirTrajectory *t,
                                               double threshold,
                                               size_t *day,
                                               bool *found);

/**
 * Largest four-day recurrence defect of the recovered fraction.
 *
 * # Safety
 * `t` must be a live handle and `out` writable.
 */
enum SeirStatus seir_trajectory_recurrence_residual(const struct SeirTrajectory *t, double *out);

/**
 * Iterates until `e + i < tol` and `|Δs| < tol`, or `max_iter` days.
 * Pass `tol <= 0` or `max_iter == 0` for the library defaults.
 *
 * # Safety
 * Pointers must be valid.
 */
enum SeirStatus seir_find_limit(const struct SeirParams *p,
                                const struct SeirState *x0,
                                double tol,
                                size_t max_iter,
                                struct SeirLimitReport *out);

/**
 * `ab / (β(a + bq))`.
 *
 * # Safety
 * `p` must be valid and `out` writable.
 */
enum SeirStatus seir_critical_alpha(const struct SeirParams *p, double *out);

/**
 * Spectrum and eigenspace dimensions at the fixed point `(α, 0, 0, 1 − α)`.
 *
 * # Safety
 * `p` must be valid and `out` writable.
 */
enum SeirStatus seir_classify(double alpha,
                              const struct SeirParams *p,
                              struct SeirSpectralReport *out);

/**
 * Builds the coefficient tensor. Any finite rates are accepted; use
 * [`seir_tensor_verify`] to check the axioms.
 *
 * # Safety
 * `p` must be valid. On success `*out` owns a handle to release with
 * [`seir_tensor_free`]; on failure it is set to null.
 */
enum SeirStatus seir_tensor_build(const struct SeirParams *p, struct SeirTensor **out);

/**
 * # Safety
 * `t` must be null or a handle from [`seir_tensor_build`] not yet freed.
 */
void seir_tensor_free(struct SeirTensor *t);

/**
 * Coefficient `P_{ij,k}` with 0-based indices below 4.
 *
 * # Safety
 * `t` must be a live handle and `out` writable.
 */
enum SeirStatus seir_tensor_get(const struct SeirTensor *t,
                                size_t i,
                                size_t j,
                                size_t k,
                                double *out);

/**
 * Checks symmetry and stochasticity within `tol`, non-negativity exactly.
 *
 * # Safety
 * `t` must be a live handle and `out` writable.
 */
enum SeirStatus seir_tensor_verify(const struct SeirTensor *t,
                                   double tol,
                                   struct SeirTensorReport *out);

/**
 * `x'_k = Σ_{i,j} P_{ij,k} x_i x_j`.
 *
 * # Safety
 * Pointers must be valid; `out` may alias `x`.
 */
enum SeirStatus seir_tensor_apply(const struct SeirTensor *t,
                                  const struct SeirState *x,
                                  struct SeirState *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SEIR_QSO_H */

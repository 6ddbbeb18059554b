#ifndef WIGNER_H
#define WIGNER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum WignerStatus {
  WIGNER_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  WIGNER_STATUS_NULL_POINTER = 1,
  /**
   * Malformed spec, grid, dimension or out-of-range index.
   */
  WIGNER_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Input matrix is not a valid density matrix.
   */
  WIGNER_STATUS_VALIDATION = 3,
  /**
   * Reconstruction has no physical solution for this input.
   */
  WIGNER_STATUS_INFEASIBLE = 4,
  /**
   * Truncation, padding or solver limits were hit.
   */
  WIGNER_STATUS_NUMERICAL = 5,
  /**
   * An internal panic was caught at the boundary.
   */
  WIGNER_STATUS_PANIC = 6,
} WignerStatus;

typedef enum WignerDriveMode {
  WIGNER_DRIVE_MODE_INCOHERENT = 0,
  WIGNER_DRIVE_MODE_COHERENT = 1,
} WignerDriveMode;

/**
 * Opaque density matrix.
 */
typedef struct WignerDensity WignerDensity;

/**
 * Opaque sampled Wigner function.
 */
typedef struct WignerField WignerField;

/**
 * Rectangular grid, `nx` by `ny` samples including both end points.
 */
typedef struct WignerGrid {
  double x_min;
  double x_max;
  size_t nx;
  double y_min;
  double y_max;
  size_t ny;
} WignerGrid;

/**
 * `negativity` is NaN when the field has not decayed at the grid edge.
 */
typedef struct WignerMetrics {
  double integral;
  double negativity;
  double min;
  double argmin_x;
  double argmin_y;
  double max_abs;
} WignerMetrics;

typedef struct WignerDrive {
  enum WignerDriveMode mode;
  double gamma;
  /**
   * Incoherent pump rate; ignored for coherent drive.
   */
  double pump;
  /**
   * Rabi frequency; ignored for incoherent drive.
   */
  double omega;
  /**
   * Laser detuning; ignored for incoherent drive.
   */
  double delta;
} WignerDrive;

typedef struct WignerDetector {
  double gamma;
  double detuning;
  /**
   * Fock truncation of the detector mode, at least 3.
   */
  size_t dim;
} WignerDetector;

typedef struct WignerCascadeSummary {
  double n_emitter;
  double n_observed;
  double residual;
} WignerCascadeSummary;

/**
 * Weights of a reconstruction. For the mixture model `beta` is zero and
 * `norm` is one.
 */
typedef struct WignerReconstruction {
  double alpha;
  double beta_re;
  double beta_im;
  double norm;
  double residual;
  double occupation_error;
} WignerReconstruction;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *wigner_version(void);

/**
 * Copies the last error message of this thread into `buf`, truncating to
 * `len - 1` bytes plus a terminating NUL. Returns the full message length
 * including the NUL, or 0 when no error has been recorded. `buf` may be
 * null to query the length.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t wigner_last_error_message(char *buf, size_t len);

/**
 * Builds a state from a text spec such as `fock:2` or `coherent:1,0.5`.
 * `dim == 0` selects the default dimension of the spec.
 *
 * # Safety
 * `spec` must be a NUL-terminated string; `out` must be writable.
 */
enum WignerStatus wigner_density_from_spec(const char *spec,
                                           size_t dim,
                                           struct WignerDensity **out);

/**
 * Validates and wraps a `dim x dim` matrix given row-major. `im` may be
 * null for a real matrix.
 *
 * # Safety
 * `re` (and `im` when non-null) must point to `dim * dim` doubles.
 */
enum WignerStatus wigner_density_from_parts(size_t dim,
                                            const double *re,
                                            const double *im,
                                            struct WignerDensity **out);

/**
 * # Safety
 * `rho` must be null or a handle from this library not yet freed.
 */
void wigner_density_free(struct WignerDensity *rho);

/**
 * Dimension of the state, or 0 for a null handle.
 *
 * # Safety
 * `rho` must be null or a live handle.
 */
size_t wigner_density_dim(const struct WignerDensity *rho);

/**
 * # Safety
 * `rho` must be a live handle; `re` and `im` must be writable.
 */
enum WignerStatus wigner_density_entry(const struct WignerDensity *rho,
                                       size_t row,
                                       size_t col,
                                       double *re,
                                       double *im);

/**
 * Copies the matrix row-major into `re` and `im`, each of length `len`,
 * which must be at least `dim * dim`.
 *
 * # Safety
 * `rho` must be a live handle; `re` and `im` must point to `len` doubles.
 */
enum WignerStatus wigner_density_copy(const struct WignerDensity *rho,
                                      double *re,
                                      double *im,
                                      size_t len);

/**
 * Mean photon number `tr(a†a ρ)`.
 *
 * # Safety
 * `rho` must be a live handle; `out` must be writable.
 */
enum WignerStatus wigner_density_occupation(const struct WignerDensity *rho, double *out);

/**
 * Evaluates the Wigner function of `rho` on `grid` by the Fock-basis series.
 *
 * # Safety
 * `rho` must be a live handle; `grid` readable; `out` writable.
 */
enum WignerStatus wigner_field_series(const struct WignerDensity *rho,
                                      const struct WignerGrid *grid,
                                      struct WignerField **out);

/**
 * # Safety
 * `field` must be null or a handle from this library not yet freed.
 */
void wigner_field_free(struct WignerField *field);

/**
 * Number of samples, or 0 for a null handle.
 *
 * # Safety
 * `field` must be null or a live handle.
 */
size_t wigner_field_len(const struct WignerField *field);

/**
 * Copies the samples with `x` varying fastest.
 *
 * # Safety
 * `field` must be a live handle; `buf` must point to `len` doubles.
 */
enum WignerStatus wigner_field_values(const struct WignerField *field, double *buf, size_t len);

/**
 * # Safety
 * `field` must be a live handle; `out` must be writable.
 */
enum WignerStatus wigner_field_metrics(const struct WignerField *field, struct WignerMetrics *out);

/**
 * Steady state of an emitter feeding a detector mode. Returns the reduced
 * detector state in `out` and, when `summary` is non-null, occupations and
 * the solver residual.
 *
 * # Safety
 * `drive` and `detector` must be readable; `out` writable; `summary` null
 * or writable.
 */
enum WignerStatus wigner_cascade(const struct WignerDrive *drive,
                                 const struct WignerDetector *detector,
                                 struct WignerDensity **out,
                                 struct WignerCascadeSummary *summary);

/**
 * Removes a vacuum admixture so the remainder has mean photon number
 * `n_target`.
 *
 * # Safety
 * `observed` must be a live handle; `out` writable; `weights` null or
 * writable.
 */
enum WignerStatus wigner_reconstruct_mixture(const struct WignerDensity *observed,
                                             double n_target,
                                             struct WignerDensity **out,
                                             struct WignerReconstruction *weights);

/**
 * Fits a coherent superposition of vacuum and an effective state with
 * mean photon number at least `n_target`. `seed` fixes the random starts.
 *
 * # Safety
 * Same as [`wigner_reconstruct_mixture`].
 */
enum WignerStatus wigner_reconstruct_superposition(const struct WignerDensity *observed,
                                                   double n_target,
                                                   uint64_t seed,
                                                   struct WignerDensity **out,
                                                   struct WignerReconstruction *weights);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WIGNER_H */

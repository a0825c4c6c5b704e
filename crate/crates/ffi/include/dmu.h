#ifndef DMU_H
#define DMU_H

/* Generated by cbindgen from crates/ffi. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every exported function.
 */
typedef enum DmuStatus {
  DMU_STATUS_OK = 0,
  DMU_STATUS_NULL_POINTER = 1,
  DMU_STATUS_INVALID_ARGUMENT = 2,
  DMU_STATUS_OUTSIDE_DISK = 3,
  DMU_STATUS_NUMERICAL = 4,
  DMU_STATUS_PARSE = 5,
  DMU_STATUS_BUFFER_TOO_SMALL = 6,
  DMU_STATUS_PANIC = 7,
} DmuStatus;

/**
 * Reproducing kernels of `D(μ)`: closed form for one atom, Gram-truncated
 * otherwise.
 */
typedef struct DmuKernel DmuKernel;

/**
 * Finite atomic measure on the unit circle.
 */
typedef struct DmuMeasure DmuMeasure;

/**
 * Polynomial with complex coefficients.
 */
typedef struct DmuPoly DmuPoly;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *dmu_version(void);

/**
 * Message of the last failure on this thread, or null if none. Valid until
 * the next failing call on the same thread.
 */
const char *dmu_last_error_message(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void dmu_string_free(char *s);

/**
 * Polynomial from `len` coefficients in ascending degree.
 *
 * # Safety
 * `re` and `im` must point to `len` doubles; `out` must be writable.
 */
enum DmuStatus dmu_poly_new(const double *re,
                            const double *im,
                            size_t len,
                            struct DmuPoly **out_poly);

/**
 * # Safety
 * `p` must be null or a handle from this library, freed at most once.
 */
void dmu_poly_free(struct DmuPoly *p);

/**
 * Number of stored coefficients (degree + 1, or 0 for the zero polynomial).
 *
 * # Safety
 * `p` must be a valid handle.
 */
enum DmuStatus dmu_poly_len(const struct DmuPoly *p, size_t *out_len);

/**
 * Copy the coefficients into `re`/`im`, which hold `cap` doubles each.
 *
 * # Safety
 * `p` must be a valid handle; `re` and `im` must be writable for `cap`.
 */
enum DmuStatus dmu_poly_coeffs(const struct DmuPoly *p, double *re, double *im, size_t cap);

/**
 * # Safety
 * `p` must be a valid handle; outputs must be writable.
 */
enum DmuStatus dmu_poly_eval(const struct DmuPoly *p,
                             double re,
                             double im,
                             double *out_re,
                             double *out_im);

/**
 * Measure `Σ masses[j] δ_{exp(i angles[j])}`.
 *
 * # Safety
 * `angles` and `masses` must point to `len` doubles; `out` must be writable.
 */
enum DmuStatus dmu_measure_new(const double *angles,
                               const double *masses,
                               size_t len,
                               struct DmuMeasure **out_measure);

/**
 * # Safety
 * `m` must be null or a handle from this library, freed at most once.
 */
void dmu_measure_free(struct DmuMeasure *m);

/**
 * `‖f‖²_μ`, `‖f‖²_{H²}` and `D_μ(f)`. Any output may be null.
 *
 * # Safety
 * Handles must be valid; non-null outputs must be writable.
 */
enum DmuStatus dmu_norm(const struct DmuMeasure *mu,
                        const struct DmuPoly *f,
                        double *out_norm_sq,
                        double *out_h2_norm_sq,
                        double *out_dirichlet);

/**
 * Local Dirichlet integral `D_λ(f)` at `λ = exp(i angle)`.
 *
 * # Safety
 * `f` must be valid; `out_value` must be writable.
 */
enum DmuStatus dmu_local_dirichlet(const struct DmuPoly *f, double angle, double *out_value);

/**
 * `f = p + ∏(z - λ_j) g`; both outputs are new handles.
 *
 * # Safety
 * Handles must be valid; outputs must be writable.
 */
enum DmuStatus dmu_decompose(const struct DmuMeasure *mu,
                             const struct DmuPoly *f,
                             struct DmuPoly **out_p,
                             struct DmuPoly **out_g);

/**
 * Kernel family of `D(μ)`. For more than one atom the kernels are truncated
 * at `degree`, or at the automatic degree for `|w| ≤ r_max` when `degree`
 * is 0.
 *
 * # Safety
 * `mu` must be valid; `out_kernel` must be writable.
 */
enum DmuStatus dmu_kernel_new(const struct DmuMeasure *mu,
                              size_t degree,
                              double r_max,
                              struct DmuKernel **out_kernel);

/**
 * # Safety
 * `k` must be null or a handle from this library, freed at most once.
 */
void dmu_kernel_free(struct DmuKernel *k);

/**
 * Truncation degree, or 0 for the closed-form one-atom kernel.
 *
 * # Safety
 * `k` must be valid; `out_degree` must be writable.
 */
enum DmuStatus dmu_kernel_degree(const struct DmuKernel *k, size_t *out_degree);

/**
 * `k_w(z)`.
 *
 * # Safety
 * `k` must be valid; outputs must be writable.
 */
enum DmuStatus dmu_kernel_eval(const struct DmuKernel *k,
                               double w_re,
                               double w_im,
                               double z_re,
                               double z_im,
                               double *out_re,
                               double *out_im);

/**
 * `‖k_w‖²_μ`.
 *
 * # Safety
 * `k` must be valid; `out_norm_sq` must be writable.
 */
enum DmuStatus dmu_kernel_norm_sq(const struct DmuKernel *k,
                                  double w_re,
                                  double w_im,
                                  double *out_norm_sq);

/**
 * Carleson box scan of a planar measure given as JSON. With `mu_json` null
 * the `H²` condition is tested, otherwise the `D(μ)` condition. `config_json`
 * may be null for the default grid. Writes the scan report as JSON.
 *
 * # Safety
 * Non-null strings must be NUL-terminated; `out_json` must be writable.
 */
enum DmuStatus dmu_carleson_json(const char *nu_json,
                                 const char *mu_json,
                                 const char *config_json,
                                 char **out_json);

/**
 * Reproducing-kernel scan of `ν` in `D(μ)`, both given as JSON.
 * `config_json` may be null for the default grid of `μ`.
 *
 * # Safety
 * Non-null strings must be NUL-terminated; `out_json` must be writable.
 */
enum DmuStatus dmu_rkt_json(const char *nu_json,
                            const char *mu_json,
                            const char *config_json,
                            char **out_json);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* DMU_H */

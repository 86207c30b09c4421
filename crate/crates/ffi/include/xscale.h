#ifndef XSCALE_H
#define XSCALE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Inequality statements, in the order of the library's kind list.
 */
typedef enum XsKind {
  XS_KIND_CLASSICAL_HARDY = 0,
  XS_KIND_LOCALIZED_HARDY = 1,
  XS_KIND_GENERALIZED_SOBOLEV = 2,
  XS_KIND_INTERPOLATION = 3,
  XS_KIND_HARDY_SOBOLEV = 4,
  XS_KIND_GENERALIZED_CKN = 5,
  XS_KIND_ENDPOINT_LOG = 6,
  XS_KIND_ENDPOINT_CKN = 7,
  XS_KIND_TRUDINGER_MOSER = 8,
  XS_KIND_K_METHOD = 9,
} XsKind;

/**
 * Result code of every call.
 */
typedef enum XsStatus {
  XS_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  XS_STATUS_NULL_POINTER = 1,
  /**
   * An argument lies outside the domain of the operation.
   */
  XS_STATUS_DOMAIN = 2,
  /**
   * The parameter tuple fails the admissibility checks of the kind.
   */
  XS_STATUS_INADMISSIBLE = 3,
  /**
   * Quadrature did not reach its target; the best estimate is still written.
   */
  XS_STATUS_ACCURACY = 4,
  /**
   * Internal failure; the call had no effect.
   */
  XS_STATUS_PANIC = 5,
} XsStatus;

typedef enum XsVerdict {
  XS_VERDICT_BOUNDED = 0,
  XS_VERDICT_VIOLATED = 1,
  XS_VERDICT_INCONCLUSIVE = 2,
} XsVerdict;

/**
 * Opaque test function handle.
 */
typedef struct XsFunction XsFunction;

/**
 * Quadrature settings; start from [`xs_quadrature_default`].
 */
typedef struct XsQuadrature {
  uint32_t radial_nodes;
  uint32_t sphere_points;
  uint32_t refinement_levels;
  double target_rel_err;
  uint32_t pair_budget;
  uint64_t seed;
} XsQuadrature;

/**
 * Parameter tuple with reciprocal exponents `s = 1/p`.
 */
typedef struct XsTuple {
  double s_p;
  double s_r;
  double s_q;
  double a;
  double b;
  double c;
  double lambda;
  double theta;
  uint32_t n;
} XsTuple;

/**
 * Norm value with its error estimate.
 */
typedef struct XsNorm {
  double value;
  double err_estimate;
  /**
   * Nonzero when the value is a sampled lower bound (sup and Hölder norms).
   */
  uint8_t is_lower_bound;
} XsNorm;

/**
 * Summary of one inequality evaluation.
 */
typedef struct XsReport {
  double lhs;
  double rhs;
  double ratio;
  double ratio_err;
  /**
   * Upper bound on the best constant, or NaN when none is known.
   */
  double reference_bound;
  enum XsVerdict verdict;
} XsReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message, NUL-terminated, into `buf`.
 *
 * Returns the message length without the terminator; when that is at least `len`
 * the message was truncated. `buf` may be null to query the length.
 *
 * # Safety
 * `buf` is null or valid for writes of `len` bytes.
 */
size_t xs_last_error_message(char *buf, size_t len);

/**
 * Default quadrature settings.
 */
struct XsQuadrature xs_quadrature_default(void);

/**
 * Derivative count and Hölder exponent of a negative reciprocal exponent `s`.
 *
 * # Safety
 * `k1` and `alpha` are valid for writes.
 */
enum XsStatus xs_holder_index(double s, uint32_t n, uint32_t *k1, double *alpha);

/**
 * `1/p* = 1/p − 1/n`.
 */
double xs_sobolev_conjugate(double s, uint32_t n);

/**
 * Interpolated pair `1/q = (1−λ)/p + λ/r`, `b = (1−λ)a + λc`.
 *
 * # Safety
 * `s_q` and `b` are valid for writes.
 */
enum XsStatus xs_interpolate_pair(double s_p,
                                  double s_r,
                                  double a,
                                  double c,
                                  double lambda,
                                  double *s_q,
                                  double *b);

/**
 * Target pair `(1/q, b)` of the weighted interpolation inequality with a gradient term.
 *
 * # Safety
 * `s_q` and `b` are valid for writes.
 */
enum XsStatus xs_ckn_targets(double s_p,
                             double s_r,
                             double a,
                             double c,
                             double lambda,
                             double theta,
                             uint32_t n,
                             double *s_q,
                             double *b);

/**
 * Dimensional-balance residual of a tuple (zero for compatible tuples).
 *
 * # Safety
 * `tuple` is valid for reads and `out` for writes.
 */
enum XsStatus xs_compatibility_residual(const struct XsTuple *tuple, double *out);

/**
 * Number of admissibility violations of `tuple` for `kind`; zero means admissible.
 * The violations are joined into the last error message.
 *
 * # Safety
 * `tuple` is valid for reads and `count` for writes.
 */
enum XsStatus xs_validate_admissible(enum XsKind kind,
                                     const struct XsTuple *tuple,
                                     uint32_t *count);

/**
 * Smooth radial bump `exp(−σ/(1 − t²))` on the annulus `rho_in < |x| < rho_out` in dimension `n`.
 *
 * # Safety
 * `out` is valid for writes; the handle must be released with [`xs_function_free`].
 */
enum XsStatus xs_function_radial_bump(uint32_t n,
                                      double rho_in,
                                      double rho_out,
                                      double sharpness,
                                      struct XsFunction **out);

/**
 * `|x|^β` with smooth cutoffs over a fraction `cut_fraction` of the log-radius range at both ends.
 *
 * # Safety
 * `out` is valid for writes; the handle must be released with [`xs_function_free`].
 */
enum XsStatus xs_function_power_bump(uint32_t n,
                                     double rho_in,
                                     double rho_out,
                                     double beta,
                                     double cut_fraction,
                                     struct XsFunction **out);

/**
 * Multiplies a radial function by `Re[(x₁ + i x₂)^m]/|x|^m`.
 *
 * # Safety
 * `base` is a live handle and `out` is valid for writes.
 */
enum XsStatus xs_function_angular(const struct XsFunction *base,
                                  uint32_t mode,
                                  struct XsFunction **out);

/**
 * Releases a handle; null is ignored.
 *
 * # Safety
 * `f` is null or a handle not yet released.
 */
void xs_function_free(struct XsFunction *f);

/**
 * `u(x)` for a point with `dim` coordinates.
 *
 * # Safety
 * `f` is a live handle, `x` is valid for `dim` reads and `out` for writes.
 */
enum XsStatus xs_function_eval(const struct XsFunction *f,
                               const double *x,
                               uint32_t dim,
                               double *out);

/**
 * `∇u(x)` written to `grad` (`dim` entries).
 *
 * # Safety
 * `f` is a live handle, `x` is valid for `dim` reads and `grad` for `dim` writes.
 */
enum XsStatus xs_function_gradient(const struct XsFunction *f,
                                   const double *x,
                                   uint32_t dim,
                                   double *grad);

/**
 * `‖|x|^{−a} u‖` on the scale at `s = 1/p ∈ (−1/n, 1]` over the function's own annulus.
 * `quad` may be null for defaults.
 *
 * # Safety
 * `f` is a live handle, `quad` null or valid, `out` valid for writes.
 */
enum XsStatus xs_x_norm(const struct XsFunction *f,
                        double s,
                        double a,
                        const struct XsQuadrature *quad,
                        struct XsNorm *out);

/**
 * `‖|x|^{−a} ∇u‖` on the scale at `s = 1/p`.
 *
 * # Safety
 * `f` is a live handle, `quad` null or valid, `out` valid for writes.
 */
enum XsStatus xs_gradient_xnorm(const struct XsFunction *f,
                                double s,
                                double a,
                                const struct XsQuadrature *quad,
                                struct XsNorm *out);

/**
 * Evaluates one inequality on a test function with default lab settings and the given quadrature.
 *
 * # Safety
 * `tuple` and `f` are valid, `quad` null or valid, `out` valid for writes.
 */
enum XsStatus xs_evaluate_instance(enum XsKind kind,
                                   const struct XsTuple *tuple,
                                   const struct XsFunction *f,
                                   const struct XsQuadrature *quad,
                                   struct XsReport *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* XSCALE_H */

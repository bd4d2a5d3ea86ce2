/* C ABI for the hls-lab verification library (cbindgen layout; kept in sync
 * with src/lib.rs — regenerate with `cbindgen --crate hls-lab-capi` when the
 * surface changes). */

#ifndef HLS_LAB_H
#define HLS_LAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum HlsStatus {
  HLS_STATUS_OK = 0,
  /**
   * A required pointer was null.
   */
  HLS_STATUS_NULL_POINTER = 1,
  /**
   * An argument lies outside the mathematical domain.
   */
  HLS_STATUS_DOMAIN = 2,
  /**
   * Grid or cutoff configuration is inconsistent.
   */
  HLS_STATUS_CONFIG = 3,
  /**
   * Evaluation point collides with a kernel singularity.
   */
  HLS_STATUS_SINGULAR = 4,
  /**
   * Non-finite values were produced or supplied.
   */
  HLS_STATUS_OVERFLOW = 5,
  /**
   * Output buffer is too small.
   */
  HLS_STATUS_BUFFER_TOO_SMALL = 6,
  /**
   * Internal failure (a panic was contained).
   */
  HLS_STATUS_INTERNAL = 7,
} HlsStatus;

/**
 * Opaque handle: a zonal field over a grid.
 */
typedef struct HlsField HlsField;

/**
 * Opaque handle: a quadrature grid with a spectral cutoff.
 */
typedef struct HlsGrid HlsGrid;

/**
 * Opaque handle: the (n, s) parameter pair.
 */
typedef struct HlsParams HlsParams;

/**
 * Explicit constants of the stability theory for one (n, s).
 */
typedef struct HlsConstants {
  double s_sharp;
  double c_crit;
  double d_crit;
  double c_loc;
  double k_cmp;
  double c_ps;
} HlsConstants;

/**
 * Result of a nearest-bubble projection.
 */
typedef struct HlsProjection {
  double c;
  double zeta;
  double dist;
  /**
   * 1 when the solver met its convergence criterion.
   */
  int converged;
  /**
   * 1 when the minimizer sits on the parameter box boundary.
   */
  int boundary_hit;
} HlsProjection;

#ifdef __cplusplus
extern "C" {
#endif /* __cplusplus */

/**
 * Static description of a status code.
 */
const char *hls_status_message(enum HlsStatus status);

/**
 * Library version as a static C string.
 */
const char *hls_version(void);

/**
 * Creates a parameter handle; requires n >= 1 and 0 < s < n/2.
 */
enum HlsStatus hls_params_new(uint32_t n, double s, struct HlsParams **out);

void hls_params_free(struct HlsParams *params);

/**
 * Evaluates every explicit constant.
 */
enum HlsStatus hls_constants(const struct HlsParams *params, struct HlsConstants *out);

/**
 * Funk-Hecke eigenvalue of P_2s on degree-l harmonics.
 */
enum HlsStatus hls_funk_hecke_multiplier(const struct HlsParams *params, size_t l, double *out);

/**
 * Builds a grid with spectral cutoff `cutoff` and `m` quadrature nodes
 * (m >= 2 cutoff + 4, n >= 2).
 */
enum HlsStatus hls_grid_new(const struct HlsParams *params,
                            size_t cutoff,
                            size_t m,
                            struct HlsGrid **out);

void hls_grid_free(struct HlsGrid *grid);

/**
 * Number of quadrature nodes.
 */
enum HlsStatus hls_grid_len(const struct HlsGrid *grid, size_t *out);

/**
 * Copies the polar node coordinates into `buf` (capacity `len`).
 */
enum HlsStatus hls_grid_nodes(const struct HlsGrid *grid, double *buf, size_t len);

/**
 * Creates the constant field.
 */
enum HlsStatus hls_field_constant(const struct HlsGrid *grid, double value, struct HlsField **out);

/**
 * Creates a bubble field; `kind` is 0 for the integral-equation profile
 * (power (n+2s)/2), 1 for the Aubin-Talenti profile (power (n-2s)/2).
 */
enum HlsStatus hls_field_bubble(const struct HlsGrid *grid,
                                double c,
                                double zeta,
                                int kind,
                                struct HlsField **out);

/**
 * Creates a field from node values (`len` must equal the grid size).
 */
enum HlsStatus hls_field_from_values(const struct HlsGrid *grid,
                                     const double *values,
                                     size_t len,
                                     struct HlsField **out);

void hls_field_free(struct HlsField *field);

/**
 * Copies the node values into `buf` (capacity `len`).
 */
enum HlsStatus hls_field_values(const struct HlsField *field, double *buf, size_t len);

/**
 * L^p norm of the field (p >= 1).
 */
enum HlsStatus hls_lp_norm(const struct HlsField *field, double p, double *out);

/**
 * Sharp-inequality deficit of the field.
 */
enum HlsStatus hls_deficit_of(const struct HlsField *field, double *out);

/**
 * Euler-Lagrange residual norm in L^{2n/(n-2s)} on the integral side.
 */
enum HlsStatus hls_residual_norm(const struct HlsField *field, double *out);

/**
 * Gradient-side residual norm in H^{-s}.
 */
enum HlsStatus hls_sobolev_residual_norm(const struct HlsField *field, double *out);

/**
 * Nearest-bubble projection in the non-Hilbert metric. `manifold` is 0 for
 * the free-amplitude optimizer manifold, 1 for the critical manifold.
 */
enum HlsStatus hls_nearest_bubble(const struct HlsField *field,
                                  int manifold,
                                  struct HlsProjection *out);

/**
 * Nearest-bubble projection in the Hilbert <P ., .> metric over the
 * critical manifold.
 */
enum HlsStatus hls_nearest_bubble_hilbert(const struct HlsField *field, struct HlsProjection *out);

/**
 * Stability quotient: residual norm over distance to the critical
 * manifold. On manifold points the distance vanishes and the quotient is
 * reported as +infinity.
 */
enum HlsStatus hls_stability_quotient(const struct HlsField *field,
                                      double *out_residual,
                                      double *out_dist,
                                      double *out_quotient);

#ifdef __cplusplus
}  /* extern "C" */
#endif /* __cplusplus */

#endif /* HLS_LAB_H */

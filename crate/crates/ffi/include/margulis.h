#ifndef MARGULIS_H
#define MARGULIS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
#define MARGULIS_OK 0

/**
 * Malformed spec string or argument out of domain.
 */
#define MARGULIS_ERR_INPUT 1

/**
 * An internal cross-validation oracle rejected a computed result.
 */
#define MARGULIS_ERR_VALIDATION 2

/**
 * The requested quantity cannot be certified within the precision budget.
 */
#define MARGULIS_ERR_PRECISION 3

/**
 * A required pointer argument was null.
 */
#define MARGULIS_ERR_NULL 4

/**
 * A caller-provided buffer was too small; the required length is reported.
 */
#define MARGULIS_ERR_BUFFER 5

/**
 * Opaque handle to a parsed rotation angle.
 */
typedef struct MargulisAngle MargulisAngle;

/**
 * Opaque handle to a Margulis-region computation (angle + threshold ε).
 */
typedef struct MargulisRegion MargulisRegion;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent error on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *margulis_last_error(void);

/**
 * Parse an angle spec ("1,2,2", "pre:[2];per:[1,3]", "rat:1/3", or a
 * decimal). `depth` 0 selects the default working depth; `guard_depth` 0
 * selects `depth + 10`.
 */
int32_t margulis_angle_parse(const char *spec,
                             uintptr_t depth,
                             uintptr_t guard_depth,
                             struct MargulisAngle **out);

/**
 * Free an angle handle (null is a no-op).
 */
void margulis_angle_free(struct MargulisAngle *angle);

/**
 * ‖kθ‖, the distance from kθ to 2πZ.
 */
int32_t margulis_angle_norm(const struct MargulisAngle *angle, uint64_t k, double *out);

/**
 * Closest-return moments up to `k_max`, written into `buf`. On success
 * `*len` is the number written; on MARGULIS_ERR_BUFFER it is the required
 * capacity.
 */
int32_t margulis_closest_returns(const struct MargulisAngle *angle,
                                 uint64_t k_max,
                                 uint64_t *buf,
                                 uintptr_t cap,
                                 uintptr_t *len);

/**
 * Build a region from a spec string and threshold ε. `depth`/`guard_depth`
 * 0 select defaults.
 */
int32_t margulis_region_new(const char *spec,
                            double epsilon,
                            uintptr_t depth,
                            uintptr_t guard_depth,
                            struct MargulisRegion **out);

/**
 * Free a region handle (null is a no-op).
 */
void margulis_region_free(struct MargulisRegion *region);

/**
 * Boundary value b(r) and a minimizing index k.
 */
int32_t margulis_envelope_value(const struct MargulisRegion *region,
                                double r,
                                double *b_out,
                                uint64_t *k_out);

/**
 * u_k(r) for one curve of the family.
 */
int32_t margulis_curve_value(const struct MargulisRegion *region,
                             uint64_t k,
                             double r,
                             double *out);

/**
 * Piece decomposition of b on [0, r_max]. Piece m is `indices[m]` active on
 * [breakpoints[m], breakpoints[m+1]); `breakpoints` must hold one more
 * entry than `indices`. On success `*len` is the piece count; on
 * MARGULIS_ERR_BUFFER it is the required capacity for `indices`.
 */
int32_t margulis_decompose(const struct MargulisRegion *region,
                           double r_max,
                           uint64_t *indices,
                           double *breakpoints,
                           uintptr_t cap,
                           uintptr_t *len);

/**
 * Hyperbolic distance between upper-half-space points (heights must be
 * positive).
 */
int32_t margulis_dist(double x1,
                      double y1,
                      double z1,
                      double u1,
                      double x2,
                      double y2,
                      double z2,
                      double u2,
                      double *out);

/**
 * Height profile a(r) of the model region.
 */
double margulis_profile_a(double r);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MARGULIS_H */

#ifndef LAGFLOW_H
#define LAGFLOW_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LfStatus {
  LF_STATUS_OK = 0,
  LF_STATUS_NULL_POINTER = 1,
  LF_STATUS_INVALID_ARGUMENT = 2,
  LF_STATUS_DEGENERATE_CURVE = 3,
  LF_STATUS_ORIGIN_CONTACT = 4,
  LF_STATUS_NON_MONOTONE = 5,
  LF_STATUS_DOMAIN = 6,
  LF_STATUS_NUMERICAL = 7,
  LF_STATUS_RANGE = 8,
  LF_STATUS_BUFFER_TOO_SMALL = 9,
  LF_STATUS_PANIC = 10,
} LfStatus;

/**
 * A sampled plane curve.
 */
typedef struct LfCurve LfCurve;

/**
 * An evolving flow state with its stepping configuration.
 */
typedef struct LfFlow LfFlow;

/**
 * Stop report of `lf_flow_evolve`.
 */
typedef struct LfSingularity {
  /**
   * Non-zero when the run stopped at a singularity.
   */
  uint8_t detected;
  /**
   * 0 none, 1 origin contact, 2 curvature blow-up, 3 step underflow.
   */
  uint8_t trigger;
  double t_stop;
  double t_estimate;
  double bracket_lo;
  double bracket_hi;
  double point_x;
  double point_y;
  double min_radius;
} LfSingularity;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. Valid until the next failing
 * call on the same thread.
 */
const char *lf_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *lf_version(void);

/**
 * Builds a curve from `count` interleaved coordinates `x0, y0, x1, y1, ...`.
 *
 * # Safety
 * `xy` must point to `2 * count` readable doubles and `out` to writable storage.
 */
enum LfStatus lf_curve_new(const double *xy, size_t count, bool closed, struct LfCurve **out);

/**
 * # Safety
 * `curve` must be null or a handle from this library not yet freed.
 */
void lf_curve_free(struct LfCurve *curve);

/**
 * # Safety
 * `curve` must be a live handle and `out` writable.
 */
enum LfStatus lf_curve_node_count(const struct LfCurve *curve, size_t *out);

/**
 * Copies the nodes into `xy` (capacity in points). Always writes the node count to
 * `count`; returns `BufferTooSmall` when `capacity` is insufficient.
 *
 * # Safety
 * `xy` must have room for `2 * capacity` doubles; `count` must be writable.
 */
enum LfStatus lf_curve_points(const struct LfCurve *curve,
                              double *xy,
                              size_t capacity,
                              size_t *count);

/**
 * Signed enclosed area of a closed curve.
 *
 * # Safety
 * `curve` must be a live handle and `out` writable.
 */
enum LfStatus lf_curve_area(const struct LfCurve *curve, double *out);

/**
 * Liouville and Maslov integrals and their ratio c.
 *
 * # Safety
 * `curve` must be a live handle; the outputs must be writable.
 */
enum LfStatus lf_curve_monotone(const struct LfCurve *curve,
                                double *liouville,
                                double *maslov,
                                double *constant);

/**
 * New curve with `count` nodes equally spaced in arclength.
 *
 * # Safety
 * `curve` must be a live handle and `out` writable.
 */
enum LfStatus lf_curve_resample(const struct LfCurve *curve, size_t count, struct LfCurve **out);

/**
 * New curve scaled to monotonicity constant 1; the factor goes to `scale`.
 *
 * # Safety
 * `curve` must be a live handle; `out` and `scale` writable.
 */
enum LfStatus lf_curve_normalize(const struct LfCurve *curve, struct LfCurve **out, double *scale);

/**
 * Gaussian density Θ((x, y), T; t) of the surface generated by the curve.
 *
 * # Safety
 * `curve` must be a live handle and `out` writable.
 */
enum LfStatus lf_curve_gaussian_density(const struct LfCurve *curve,
                                        double x,
                                        double y,
                                        double reference_time,
                                        double t,
                                        double *out);

/**
 * Starts a flow at t = 0 from a copy of `curve` with default stepping; `heun`
 * selects the two-stage scheme.
 *
 * # Safety
 * `curve` must be a live handle and `out` writable.
 */
enum LfStatus lf_flow_new(const struct LfCurve *curve, bool heun, struct LfFlow **out);

/**
 * # Safety
 * `flow` must be null or a handle from this library not yet freed.
 */
void lf_flow_free(struct LfFlow *flow);

/**
 * # Safety
 * `flow` must be a live handle and `out` writable.
 */
enum LfStatus lf_flow_time(const struct LfFlow *flow, double *out);

/**
 * One explicit step; `dt > 0` fixes the step size, otherwise it is adaptive.
 *
 * # Safety
 * `flow` must be a live handle; `t_out` may be null.
 */
enum LfStatus lf_flow_step(struct LfFlow *flow, double dt, double *t_out);

/**
 * Evolves until `t_end` or a singularity. The flow handle holds the final state
 * afterwards; the stop report goes to `report`.
 *
 * # Safety
 * `flow` must be a live handle and `report` writable.
 */
enum LfStatus lf_flow_evolve(struct LfFlow *flow, double t_end, struct LfSingularity *report);

/**
 * Copy of the flow's current curve.
 *
 * # Safety
 * `flow` must be a live handle and `out` writable.
 */
enum LfStatus lf_flow_curve(const struct LfFlow *flow, struct LfCurve **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LAGFLOW_H */

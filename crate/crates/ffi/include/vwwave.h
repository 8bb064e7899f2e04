#ifndef VWWAVE_H
#define VWWAVE_H

#include <stddef.h>
#include <stdint.h>

typedef enum VwwStatus {
  VWW_STATUS_OK = 0,
  VWW_STATUS_NULL_POINTER = 1,
  VWW_STATUS_INVALID_PARAMETER = 2,
  VWW_STATUS_SHAPE_MISMATCH = 3,
  VWW_STATUS_SINGULAR_SYSTEM = 4,
  VWW_STATUS_IO = 5,
  VWW_STATUS_PARSE = 6,
  VWW_STATUS_PANIC = 7,
  VWW_STATUS_OUT_OF_RANGE = 8,
} VwwStatus;

/**
 * Regularized depth `h_ε`.
 */
typedef struct VwwDepth VwwDepth;

/**
 * Piecewise-constant depth with optional singular terms.
 */
typedef struct VwwProfile VwwProfile;

/**
 * Result of a 1D simulation.
 */
typedef struct VwwRun1D VwwRun1D;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *vww_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *vww_version(void);

/**
 * Normalization constant `c` of the mollifier.
 */
double vww_mollifier_constant(void);

/**
 * Built-in profile `case_id` (1, 2 or 3) with singular amplitude `amp`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum VwwStatus vww_profile_builtin(uint8_t case_id, double amp, struct VwwProfile **out);

/**
 * Profile from its JSON form.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum VwwStatus vww_profile_from_json(const char *json, struct VwwProfile **out);

/**
 * # Safety
 * `profile` must come from this library and not be used afterwards.
 */
void vww_profile_free(struct VwwProfile *profile);

/**
 * Regularizes `profile` with parameter `eps` in (0, 1].
 *
 * # Safety
 * `profile` must be a live handle; `out` must be writable.
 */
enum VwwStatus vww_regularize(const struct VwwProfile *profile, double eps, struct VwwDepth **out);

/**
 * Writes `h_ε(xs[i])` into `values[i]` for `i < n`.
 *
 * # Safety
 * `depth` must be live; `xs` and `values` must hold `n` elements.
 */
enum VwwStatus vww_depth_sample(const struct VwwDepth *depth,
                                const double *xs,
                                size_t n,
                                double *values);

/**
 * # Safety
 * `depth` must come from this library and not be used afterwards.
 */
void vww_depth_free(struct VwwDepth *depth);

/**
 * Thomas algorithm. All bands have length `n`; `lower[0]` and
 * `upper[n-1]` are ignored.
 *
 * # Safety
 * All pointers must reference `n` valid elements.
 */
enum VwwStatus vww_thomas_solve(const double *lower,
                                const double *diag,
                                const double *upper,
                                const double *rhs,
                                size_t n,
                                double *x);

/**
 * Cyclic reduction with the same band layout as [`vww_thomas_solve`].
 *
 * # Safety
 * All pointers must reference `n` valid elements.
 */
enum VwwStatus vww_cyclic_reduction_solve(const double *lower,
                                          const double *diag,
                                          const double *upper,
                                          const double *rhs,
                                          size_t n,
                                          double *x);

/**
 * Runs the 1D solver with Gaussian data up to `t_final`, keeping one
 * snapshot at `t_final`.
 *
 * # Safety
 * `profile` must be live; `out` must be writable.
 */
enum VwwStatus vww_run_1d(const struct VwwProfile *profile,
                          double eps,
                          double dt,
                          double dx,
                          double t_final,
                          struct VwwRun1D **out);

/**
 * Runs the 1D solver from a JSON `SimConfig1D`.
 *
 * # Safety
 * `config_json` must be NUL-terminated; `out` must be writable.
 */
enum VwwStatus vww_run_1d_json(const char *config_json, struct VwwRun1D **out);

/**
 * Grid nodes per snapshot.
 *
 * # Safety
 * `run` must be live.
 */
size_t vww_run_1d_node_count(const struct VwwRun1D *run);

/**
 * Number of stored snapshots.
 *
 * # Safety
 * `run` must be live.
 */
size_t vww_run_1d_snapshot_count(const struct VwwRun1D *run);

/**
 * Copies snapshot `k` into `u` (length `len`, equal to the node count)
 * and its time into `t`.
 *
 * # Safety
 * `run` must be live; `t` must be writable; `u` must hold `len` elements.
 */
enum VwwStatus vww_run_1d_snapshot(const struct VwwRun1D *run,
                                   size_t k,
                                   double *t,
                                   double *u,
                                   size_t len);

/**
 * Largest relative change of the conserved discrete energy.
 *
 * # Safety
 * `run` must be live; `drift` must be writable.
 */
enum VwwStatus vww_run_1d_energy_drift(const struct VwwRun1D *run, double *drift);

/**
 * # Safety
 * `run` must come from this library and not be used afterwards.
 */
void vww_run_1d_free(struct VwwRun1D *run);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VWWAVE_H */

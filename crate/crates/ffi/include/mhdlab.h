#ifndef MHDLAB_H
#define MHDLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Return codes of every fallible call.
 */
typedef enum MhdStatus {
  MHD_STATUS_OK = 0,
  MHD_STATUS_NULL_POINTER = 1,
  MHD_STATUS_INVALID_ARGUMENT = 2,
  MHD_STATUS_CONFIG = 3,
  MHD_STATUS_DOMAIN = 4,
  MHD_STATUS_NUMERICAL = 5,
  MHD_STATUS_IO = 6,
  MHD_STATUS_PANIC = 7,
} MhdStatus;

/*
 Validated run configuration.
 */
typedef struct MhdConfig MhdConfig;

/*
 Time stepper built from a configuration and its initial data.
 */
typedef struct MhdSolver MhdSolver;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread; empty after a success.
 The pointer stays valid until the next call on the same thread.
 */
const char *mhd_last_error(void);

/*
 Library version, static storage.
 */
const char *mhd_version(void);

/*
 Roots λ₊, λ₋ of λ² + |ξ|²λ + ξ₁²; `out` receives re λ₊, im λ₊, re λ₋, im λ₋.

 # Safety
 `out` must point to 4 writable doubles.
 */
enum MhdStatus mhd_lambda_pm(double xi1,
                             double xi2,
                             double *out);

/*
 Principal ω(λ; ξ₁) with ω² = λ + ξ₁² + ξ₁²/λ; `out` receives re ω, im ω.

 # Safety
 `out` must point to 2 writable doubles.
 */
enum MhdStatus mhd_omega(double re_lambda, double im_lambda, double xi1, double *out);

/*
 Default configuration.

 # Safety
 `out` must be a valid pointer; the handle is released with [`mhd_config_free`].
 */
enum MhdStatus mhd_config_new_default(struct MhdConfig **out);

/*
 Parses JSON text (defaults filled, validated). On failure `*out` is null.

 # Safety
 `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum MhdStatus mhd_config_from_json(const char *json, struct MhdConfig **out);

/*
 Effective configuration as JSON; free the string with [`mhd_string_free`].

 # Safety
 `cfg` must be a live handle and `out` a valid pointer.
 */
enum MhdStatus mhd_config_to_json(const struct MhdConfig *cfg, char **out);

/*
 # Safety
 `cfg` must be null or a handle from this library, not yet freed.
 */
void mhd_config_free(struct MhdConfig *cfg);

/*
 # Safety
 `s` must be null or a string returned by this library, not yet freed.
 */
void mhd_string_free(char *s);

/*
 Builds the grid and initial data of `cfg` and a solver on them.

 # Safety
 `cfg` must be a live handle and `out` a valid pointer.
 */
enum MhdStatus mhd_solver_new(const struct MhdConfig *cfg, struct MhdSolver **out);

/*
 Takes `n` steps.

 # Safety
 `s` must be a live handle.
 */
enum MhdStatus mhd_solver_step(struct MhdSolver *s, uint64_t n);

/*
 Steps until the time reaches `t` (rounded to whole steps).

 # Safety
 `s` must be a live handle.
 */
enum MhdStatus mhd_solver_advance_to(struct MhdSolver *s, double t);

/*
 Current time, energy ½(‖u‖²+‖b‖²) and accumulated dissipation ∫‖∇u‖².
 Any output pointer may be null.

 # Safety
 `s` must be a live handle; non-null outputs must be writable.
 */
enum MhdStatus mhd_solver_stats(const struct MhdSolver *s,
                                double *t,
                                double *energy,
                                double *dissipation);

/*
 Evaluates a monitor such as "u:L2" or "b1:Linf" on the current state.

 # Safety
 `s` must be a live handle, `monitor` a NUL-terminated string, `out` writable.
 */
enum MhdStatus mhd_solver_monitor(const struct MhdSolver *s, const char *monitor, double *out);

/*
 # Safety
 `s` must be null or a handle from this library, not yet freed.
 */
void mhd_solver_free(struct MhdSolver *s);

/*
 Least-squares exponent α of y ≈ C⟨t⟩^α over samples with t in [t0, t1].

 # Safety
 `t` and `y` must point to `n` doubles; `alpha` must be writable; `r2` may be null.
 */
enum MhdStatus mhd_fit_exponent(const double *t,
                                const double *y,
                                size_t n,
                                double t0,
                                double t1,
                                double *alpha,
                                double *r2);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MHDLAB_H */

#ifndef SWINGUP_H
#define SWINGUP_H

#include <stdint.h>
#include <stddef.h>

#define SWINGUP_OK 0

/**
 * A required pointer argument was NULL.
 */
#define SWINGUP_ERR_NULL -1

/**
 * Invalid parameters.
 */
#define SWINGUP_ERR_DOMAIN -2

/**
 * The integrator failed its trace/purity check.
 */
#define SWINGUP_ERR_INTEGRATION -3

/**
 * A Rust panic was caught at the boundary.
 */
#define SWINGUP_ERR_PANIC -4

#define SWINGUP_FLAG_ZERO_CENTER_COUNT 1

#define SWINGUP_FLAG_CLAMPED_NEGATIVE 2

#define SWINGUP_FLAG_DEGENERATE 4

/**
 * Opaque simulation configuration.
 */
typedef struct SwingupConfig SwingupConfig;

/**
 * Opaque correlation histogram.
 */
typedef struct SwingupHistogram SwingupHistogram;

/**
 * Opaque recorded trajectory.
 */
typedef struct SwingupTrajectory SwingupTrajectory;

/**
 * One Gaussian pulse. Detuning in meV, area in units of π, FWHM and delay
 * in ps, phase in rad.
 */
typedef struct SwingupPulse {
  double detuning;
  double area;
  double fwhm;
  double delay;
  double phase;
} SwingupPulse;

/**
 * Window settings in ns. `nominal` != 0 places peaks exactly at multiples
 * of the repetition period instead of searching for the highest bin.
 */
typedef struct SwingupWindows {
  double peak_window;
  double background_window;
  uint32_t n_side_peaks;
  uint8_t nominal;
} SwingupWindows;

/**
 * Scalar part of a statistic; `flags` is a bitmask of `SWINGUP_FLAG_*`.
 */
typedef struct SwingupStat {
  double value;
  double error_low;
  double error_high;
  uint32_t flags;
} SwingupStat;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or NULL if none. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *swingup_last_error(void);

/**
 * Creates a configuration with the default [-40, 40] ps window. `pulse2` may
 * be NULL for a single pulse; `step_ps` <= 0 selects the default 1 fs step.
 *
 * # Safety
 * Pointers must be NULL or valid for the access implied by their type.
 */
int32_t swingup_config_new(const struct SwingupPulse *pulse1,
                           const struct SwingupPulse *pulse2,
                           double step_ps,
                           struct SwingupConfig **out);

/**
 * Overrides the integration window in ps.
 *
 * # Safety
 * `config` must be NULL or a live handle.
 */
int32_t swingup_config_set_window(struct SwingupConfig *config, double t_start, double t_end);

/**
 * # Safety
 * `config` must be NULL or a handle from `swingup_config_new` not yet freed.
 */
void swingup_config_free(struct SwingupConfig *config);

/**
 * Excited-state population at the end of the window.
 *
 * # Safety
 * Pointers must be NULL or valid.
 */
int32_t swingup_final_population(const struct SwingupConfig *config, double *out);

/**
 * Integrates and records every `stride`-th step.
 *
 * # Safety
 * Pointers must be NULL or valid.
 */
int32_t swingup_evolve(const struct SwingupConfig *config,
                       uint32_t stride,
                       struct SwingupTrajectory **out);

/**
 * Number of recorded samples, 0 for NULL.
 *
 * # Safety
 * `traj` must be NULL or a live handle.
 */
uintptr_t swingup_trajectory_len(const struct SwingupTrajectory *traj);

/**
 * Copies the samples into caller buffers of `len` elements each; `len` must
 * equal `swingup_trajectory_len`. Any of the three buffers may be NULL to skip it.
 *
 * # Safety
 * Non-NULL buffers must be valid for `len` writes.
 */
int32_t swingup_trajectory_copy(const struct SwingupTrajectory *traj,
                                double *times,
                                double *population,
                                double *coherence_abs,
                                uintptr_t len);

/**
 * # Safety
 * `traj` must be NULL or a handle from `swingup_evolve` not yet freed.
 */
void swingup_trajectory_free(struct SwingupTrajectory *traj);

/**
 * Fidelity map over pulse-2 detuning (meV) and area ratio α₂/α₁, with pulse 1
 * and the fixed parts of pulse 2 taken from `base`. `out` receives
 * `n_ratio * n_detuning` values, row-major with one row per ratio.
 * `threads` = 0 uses all cores.
 *
 * # Safety
 * Axis pointers must be valid for their lengths, `out` for the product.
 */
int32_t swingup_sweep(const struct SwingupConfig *base,
                      const double *detuning,
                      uintptr_t n_detuning,
                      const double *ratio,
                      uintptr_t n_ratio,
                      uint32_t threads,
                      double *out);

/**
 * Histogram from pre-binned counts. Bin width and offset in ps, repetition
 * period in ns.
 *
 * # Safety
 * `counts` must be valid for `n` reads.
 */
int32_t swingup_histogram_new(double bin_width_ps,
                              const uint64_t *counts,
                              uintptr_t n,
                              double t0_offset_ps,
                              double rep_period_ns,
                              struct SwingupHistogram **out);

/**
 * Histogram from start-stop time differences in ps.
 *
 * # Safety
 * `delays_ps` must be valid for `n` reads.
 */
int32_t swingup_histogram_from_timetags(const double *delays_ps,
                                        uintptr_t n,
                                        double bin_width_ps,
                                        double rep_period_ns,
                                        struct SwingupHistogram **out);

/**
 * # Safety
 * `hist` must be NULL or a live handle not yet freed.
 */
void swingup_histogram_free(struct SwingupHistogram *hist);

/**
 * Raw g²(0). `win` may be NULL for 6 ns / 4.5 ns windows with three side
 * peaks per side.
 *
 * # Safety
 * Pointers must be NULL or valid.
 */
int32_t swingup_g2_raw(const struct SwingupHistogram *hist,
                       const struct SwingupWindows *win,
                       struct SwingupStat *out);

/**
 * Background-corrected g²(0); same windows as [`swingup_g2_raw`].
 *
 * # Safety
 * Pointers must be NULL or valid.
 */
int32_t swingup_g2_corrected(const struct SwingupHistogram *hist,
                             const struct SwingupWindows *win,
                             struct SwingupStat *out);

/**
 * Two-photon interference visibility. `win` may be NULL for windows one
 * repetition period wide; `jitter_ps` widens the error bound.
 *
 * # Safety
 * Pointers must be NULL or valid.
 */
int32_t swingup_hom(const struct SwingupHistogram *hist,
                    const struct SwingupWindows *win,
                    double jitter_ps,
                    struct SwingupStat *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SWINGUP_H */

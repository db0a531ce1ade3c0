//! C ABI for the swingup simulator.
//!
//! Every fallible function returns a status code (`SWINGUP_OK` or a negative
//! error) and writes results through out-pointers. The message for the most
//! recent failure on the calling thread is available from
//! [`swingup_last_error`]. Objects are opaque handles released with their
//! `*_free` function; passing NULL to a `*_free` function is a no-op.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use swingup::{
    bin_timetags, evolve, final_population, g2_corrected, g2_raw, hom_visibility, CorrelationHistogram, Error,
    PeakLocation, PulseSpec, SimConfig, StatFlag, SweepGrid, Trajectory, WindowSpec,
};

pub const SWINGUP_OK: i32 = 0;
/// A required pointer argument was NULL.
pub const SWINGUP_ERR_NULL: i32 = -1;
/// Invalid parameters.
pub const SWINGUP_ERR_DOMAIN: i32 = -2;
/// The integrator failed its trace/purity check.
pub const SWINGUP_ERR_INTEGRATION: i32 = -3;
/// A Rust panic was caught at the boundary.
pub const SWINGUP_ERR_PANIC: i32 = -4;

pub const SWINGUP_FLAG_ZERO_CENTER_COUNT: u32 = 1;
pub const SWINGUP_FLAG_CLAMPED_NEGATIVE: u32 = 2;
pub const SWINGUP_FLAG_DEGENERATE: u32 = 4;

/// One Gaussian pulse. Detuning in meV, area in units of π, FWHM and delay
/// in ps, phase in rad.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SwingupPulse {
    pub detuning: f64,
    pub area: f64,
    pub fwhm: f64,
    pub delay: f64,
    pub phase: f64,
}

/// Window settings in ns. `nominal` != 0 places peaks exactly at multiples
/// of the repetition period instead of searching for the highest bin.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SwingupWindows {
    pub peak_window: f64,
    pub background_window: f64,
    pub n_side_peaks: u32,
    pub nominal: u8,
}

/// Scalar part of a statistic; `flags` is a bitmask of `SWINGUP_FLAG_*`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SwingupStat {
    pub value: f64,
    pub error_low: f64,
    pub error_high: f64,
    pub flags: u32,
}

/// Opaque simulation configuration.
pub struct SwingupConfig(SimConfig);

/// Opaque recorded trajectory.
pub struct SwingupTrajectory(Trajectory);

/// Opaque correlation histogram.
pub struct SwingupHistogram(CorrelationHistogram);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(err: Error) -> i32 {
    let code = if err.is_numerical() { SWINGUP_ERR_INTEGRATION } else { SWINGUP_ERR_DOMAIN };
    set_error(err.to_string());
    code
}

fn null(name: &str) -> i32 {
    set_error(format!("{name} is NULL"));
    SWINGUP_ERR_NULL
}

/// Runs `f` with panics converted to `SWINGUP_ERR_PANIC`.
fn guard(f: impl FnOnce() -> i32) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(code) => code,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            SWINGUP_ERR_PANIC
        }
    }
}

macro_rules! deref {
    ($p:expr, $name:literal) => {
        match unsafe { $p.as_ref() } {
            Some(v) => v,
            None => return null($name),
        }
    };
}

/// Message of the last failure on this thread, or NULL if none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn swingup_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

impl From<SwingupPulse> for PulseSpec {
    fn from(p: SwingupPulse) -> Self {
        PulseSpec { detuning: p.detuning, area: p.area, fwhm: p.fwhm, delay: p.delay, phase: p.phase }
    }
}

/// Creates a configuration with the default [-40, 40] ps window. `pulse2` may
/// be NULL for a single pulse; `step_ps` <= 0 selects the default 1 fs step.
///
/// # Safety
/// Pointers must be NULL or valid for the access implied by their type.
#[no_mangle]
pub unsafe extern "C" fn swingup_config_new(
    pulse1: *const SwingupPulse,
    pulse2: *const SwingupPulse,
    step_ps: f64,
    out: *mut *mut SwingupConfig,
) -> i32 {
    guard(|| {
        let p1: PulseSpec = (*deref!(pulse1, "pulse1")).into();
        let p2 = match unsafe { pulse2.as_ref() } {
            Some(p) => (*p).into(),
            None => PulseSpec::off(p1.fwhm),
        };
        if out.is_null() {
            return null("out");
        }
        let mut cfg = SimConfig::new(p1, p2);
        if step_ps > 0.0 {
            cfg = cfg.with_step(step_ps);
        }
        if let Err(e) = cfg.validate() {
            return fail(e);
        }
        unsafe { *out = Box::into_raw(Box::new(SwingupConfig(cfg))) };
        SWINGUP_OK
    })
}

/// Overrides the integration window in ps.
///
/// # Safety
/// `config` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn swingup_config_set_window(config: *mut SwingupConfig, t_start: f64, t_end: f64) -> i32 {
    guard(|| {
        let cfg = match unsafe { config.as_mut() } {
            Some(c) => c,
            None => return null("config"),
        };
        let candidate = SimConfig { t_start, t_end, ..cfg.0 };
        if let Err(e) = candidate.validate() {
            return fail(e);
        }
        cfg.0 = candidate;
        SWINGUP_OK
    })
}

/// # Safety
/// `config` must be NULL or a handle from `swingup_config_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn swingup_config_free(config: *mut SwingupConfig) {
    if !config.is_null() {
        drop(unsafe { Box::from_raw(config) });
    }
}

/// Excited-state population at the end of the window.
///
/// # Safety
/// Pointers must be NULL or valid.
#[no_mangle]
pub unsafe extern "C" fn swingup_final_population(config: *const SwingupConfig, out: *mut f64) -> i32 {
    guard(|| {
        let cfg = deref!(config, "config");
        if out.is_null() {
            return null("out");
        }
        match final_population(&cfg.0) {
            Ok(p) => {
                unsafe { *out = p };
                SWINGUP_OK
            }
            Err(e) => fail(e),
        }
    })
}

/// Integrates and records every `stride`-th step.
///
/// # Safety
/// Pointers must be NULL or valid.
#[no_mangle]
pub unsafe extern "C" fn swingup_evolve(
    config: *const SwingupConfig,
    stride: u32,
    out: *mut *mut SwingupTrajectory,
) -> i32 {
    guard(|| {
        let cfg = deref!(config, "config");
        if out.is_null() {
            return null("out");
        }
        match evolve(&cfg.0.with_stride(stride as usize)) {
            Ok(traj) => {
                unsafe { *out = Box::into_raw(Box::new(SwingupTrajectory(traj))) };
                SWINGUP_OK
            }
            Err(e) => fail(e),
        }
    })
}

/// Number of recorded samples, 0 for NULL.
///
/// # Safety
/// `traj` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn swingup_trajectory_len(traj: *const SwingupTrajectory) -> usize {
    unsafe { traj.as_ref() }.map_or(0, |t| t.0.len())
}

/// Copies the samples into caller buffers of `len` elements each; `len` must
/// equal `swingup_trajectory_len`. Any of the three buffers may be NULL to skip it.
///
/// # Safety
/// Non-NULL buffers must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn swingup_trajectory_copy(
    traj: *const SwingupTrajectory,
    times: *mut f64,
    population: *mut f64,
    coherence_abs: *mut f64,
    len: usize,
) -> i32 {
    guard(|| {
        let t = &deref!(traj, "traj").0;
        if len != t.len() {
            set_error(format!("buffer length {len} does not match trajectory length {}", t.len()));
            return SWINGUP_ERR_DOMAIN;
        }
        for (dst, src) in [(times, &t.times), (population, &t.excited_population), (coherence_abs, &t.coherence_magnitude)] {
            if !dst.is_null() {
                unsafe { slice::from_raw_parts_mut(dst, len) }.copy_from_slice(src);
            }
        }
        SWINGUP_OK
    })
}

/// # Safety
/// `traj` must be NULL or a handle from `swingup_evolve` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn swingup_trajectory_free(traj: *mut SwingupTrajectory) {
    if !traj.is_null() {
        drop(unsafe { Box::from_raw(traj) });
    }
}

/// Fidelity map over pulse-2 detuning (meV) and area ratio α₂/α₁, with pulse 1
/// and the fixed parts of pulse 2 taken from `base`. `out` receives
/// `n_ratio * n_detuning` values, row-major with one row per ratio.
/// `threads` = 0 uses all cores.
///
/// # Safety
/// Axis pointers must be valid for their lengths, `out` for the product.
#[no_mangle]
pub unsafe extern "C" fn swingup_sweep(
    base: *const SwingupConfig,
    detuning: *const f64,
    n_detuning: usize,
    ratio: *const f64,
    n_ratio: usize,
    threads: u32,
    out: *mut f64,
) -> i32 {
    guard(|| {
        let cfg = deref!(base, "base");
        if detuning.is_null() || ratio.is_null() || out.is_null() {
            return null("axis or output buffer");
        }
        let d = unsafe { slice::from_raw_parts(detuning, n_detuning) }.to_vec();
        let r = unsafe { slice::from_raw_parts(ratio, n_ratio) }.to_vec();
        let grid = match SweepGrid::new(d, r, cfg.0) {
            Ok(g) => g,
            Err(e) => return fail(e),
        };
        let result = if threads == 0 {
            swingup::run_sweep(&grid)
        } else {
            swingup::sweep::run_sweep_with_threads(&grid, threads as usize)
        };
        match result {
            Ok(res) => {
                let dst = unsafe { slice::from_raw_parts_mut(out, n_detuning * n_ratio) };
                for (chunk, row) in dst.chunks_mut(n_detuning).zip(&res.fidelity) {
                    chunk.copy_from_slice(row);
                }
                SWINGUP_OK
            }
            Err(e) => fail(e),
        }
    })
}

fn store_histogram(result: swingup::Result<CorrelationHistogram>, out: *mut *mut SwingupHistogram) -> i32 {
    match result {
        Ok(h) => {
            unsafe { *out = Box::into_raw(Box::new(SwingupHistogram(h))) };
            SWINGUP_OK
        }
        Err(e) => fail(e),
    }
}

/// Histogram from pre-binned counts. Bin width and offset in ps, repetition
/// period in ns.
///
/// # Safety
/// `counts` must be valid for `n` reads.
#[no_mangle]
pub unsafe extern "C" fn swingup_histogram_new(
    bin_width_ps: f64,
    counts: *const u64,
    n: usize,
    t0_offset_ps: f64,
    rep_period_ns: f64,
    out: *mut *mut SwingupHistogram,
) -> i32 {
    guard(|| {
        if counts.is_null() || out.is_null() {
            return null("counts or out");
        }
        let c = unsafe { slice::from_raw_parts(counts, n) }.to_vec();
        store_histogram(CorrelationHistogram::new(bin_width_ps, c, t0_offset_ps, rep_period_ns), out)
    })
}

/// Histogram from start-stop time differences in ps.
///
/// # Safety
/// `delays_ps` must be valid for `n` reads.
#[no_mangle]
pub unsafe extern "C" fn swingup_histogram_from_timetags(
    delays_ps: *const f64,
    n: usize,
    bin_width_ps: f64,
    rep_period_ns: f64,
    out: *mut *mut SwingupHistogram,
) -> i32 {
    guard(|| {
        if delays_ps.is_null() || out.is_null() {
            return null("delays_ps or out");
        }
        let events = unsafe { slice::from_raw_parts(delays_ps, n) };
        store_histogram(bin_timetags(events, bin_width_ps).map(|h| h.with_rep_period(rep_period_ns)), out)
    })
}

/// # Safety
/// `hist` must be NULL or a live handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn swingup_histogram_free(hist: *mut SwingupHistogram) {
    if !hist.is_null() {
        drop(unsafe { Box::from_raw(hist) });
    }
}

fn windows(win: Option<&SwingupWindows>, default: WindowSpec) -> WindowSpec {
    win.map_or(default, |w| WindowSpec {
        peak_window: w.peak_window,
        background_window: w.background_window,
        n_side_peaks: w.n_side_peaks as usize,
        location: if w.nominal != 0 { PeakLocation::Nominal } else { PeakLocation::Search },
    })
}

fn store_stat(result: swingup::Result<swingup::StatResult>, out: *mut SwingupStat) -> i32 {
    match result {
        Ok(s) => {
            let flags = s.flags.iter().fold(0, |acc, f| {
                acc | match f {
                    StatFlag::ZeroCenterCount => SWINGUP_FLAG_ZERO_CENTER_COUNT,
                    StatFlag::ClampedNegative => SWINGUP_FLAG_CLAMPED_NEGATIVE,
                    StatFlag::Degenerate => SWINGUP_FLAG_DEGENERATE,
                }
            });
            unsafe { *out = SwingupStat { value: s.value, error_low: s.error_low, error_high: s.error_high, flags } };
            SWINGUP_OK
        }
        Err(e) => fail(e),
    }
}

/// Raw g²(0). `win` may be NULL for 6 ns / 4.5 ns windows with three side
/// peaks per side.
///
/// # Safety
/// Pointers must be NULL or valid.
#[no_mangle]
pub unsafe extern "C" fn swingup_g2_raw(
    hist: *const SwingupHistogram,
    win: *const SwingupWindows,
    out: *mut SwingupStat,
) -> i32 {
    guard(|| {
        let h = deref!(hist, "hist");
        if out.is_null() {
            return null("out");
        }
        let w = windows(unsafe { win.as_ref() }, WindowSpec::g2_default());
        store_stat(g2_raw(&h.0, &w), out)
    })
}

/// Background-corrected g²(0); same windows as [`swingup_g2_raw`].
///
/// # Safety
/// Pointers must be NULL or valid.
#[no_mangle]
pub unsafe extern "C" fn swingup_g2_corrected(
    hist: *const SwingupHistogram,
    win: *const SwingupWindows,
    out: *mut SwingupStat,
) -> i32 {
    guard(|| {
        let h = deref!(hist, "hist");
        if out.is_null() {
            return null("out");
        }
        let w = windows(unsafe { win.as_ref() }, WindowSpec::g2_default());
        store_stat(g2_corrected(&h.0, &w), out)
    })
}

/// Two-photon interference visibility. `win` may be NULL for windows one
/// repetition period wide; `jitter_ps` widens the error bound.
///
/// # Safety
/// Pointers must be NULL or valid.
#[no_mangle]
pub unsafe extern "C" fn swingup_hom(
    hist: *const SwingupHistogram,
    win: *const SwingupWindows,
    jitter_ps: f64,
    out: *mut SwingupStat,
) -> i32 {
    guard(|| {
        let h = deref!(hist, "hist");
        if out.is_null() {
            return null("out");
        }
        let w = windows(unsafe { win.as_ref() }, WindowSpec::hom_default(h.0.rep_period));
        store_stat(hom_visibility(&h.0, &w, jitter_ps), out)
    })
}

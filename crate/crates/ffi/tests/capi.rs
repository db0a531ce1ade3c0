use std::ffi::CStr;
use std::ptr;

use swingup_ffi::*;

fn pulse(detuning: f64, area: f64) -> SwingupPulse {
    SwingupPulse { detuning, area, fwhm: 10.0, delay: 0.0, phase: 0.0 }
}

fn last_error() -> String {
    let p = swingup_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn config(p1: SwingupPulse, p2: Option<SwingupPulse>, step: f64) -> *mut SwingupConfig {
    let mut cfg = ptr::null_mut();
    let p2_ptr = p2.as_ref().map_or(ptr::null(), |p| p as *const _);
    assert_eq!(unsafe { swingup_config_new(&p1, p2_ptr, step, &mut cfg) }, SWINGUP_OK);
    cfg
}

#[test]
fn resonant_pi_pulse_inverts() {
    let cfg = config(pulse(0.0, 1.0), None, 0.0);
    let mut p = f64::NAN;
    assert_eq!(unsafe { swingup_final_population(cfg, &mut p) }, SWINGUP_OK);
    assert!((p - 1.0).abs() < 1e-9);
    unsafe { swingup_config_free(cfg) };
}

#[test]
fn matches_rust_api() {
    let cfg = config(pulse(-0.7, 8.0), Some(pulse(-2.05, 8.8)), 0.002);
    let mut p = f64::NAN;
    assert_eq!(unsafe { swingup_final_population(cfg, &mut p) }, SWINGUP_OK);
    let direct = swingup::final_population(&swingup::SimConfig::swing_up(-0.7, 8.0, -2.05, 1.1, 10.0).with_step(0.002)).unwrap();
    assert_eq!(p, direct);
    unsafe { swingup_config_free(cfg) };
}

#[test]
fn trajectory_round_trip() {
    let cfg = config(pulse(0.0, 1.0), None, 0.0);
    let mut traj = ptr::null_mut();
    assert_eq!(unsafe { swingup_evolve(cfg, 1000, &mut traj) }, SWINGUP_OK);
    let n = unsafe { swingup_trajectory_len(traj) };
    assert_eq!(n, 81);
    let mut t = vec![0.0; n];
    let mut pop = vec![0.0; n];
    assert_eq!(unsafe { swingup_trajectory_copy(traj, t.as_mut_ptr(), pop.as_mut_ptr(), ptr::null_mut(), n) }, SWINGUP_OK);
    assert_eq!(t[0], -40.0);
    assert!((t[n - 1] - 40.0).abs() < 1e-9);
    assert!((pop[n - 1] - 1.0).abs() < 1e-9);
    assert_eq!(unsafe { swingup_trajectory_copy(traj, t.as_mut_ptr(), ptr::null_mut(), ptr::null_mut(), n - 1) }, SWINGUP_ERR_DOMAIN);
    unsafe {
        swingup_trajectory_free(traj);
        swingup_config_free(cfg);
    }
}

#[test]
fn sweep_into_buffer() {
    let cfg = config(pulse(-0.7, 8.0), Some(pulse(-2.0, 0.0)), 0.004);
    let d = [-2.5, -2.0, -1.5];
    let r = [0.8, 1.1];
    let mut out = vec![f64::NAN; 6];
    assert_eq!(unsafe { swingup_sweep(cfg, d.as_ptr(), 3, r.as_ptr(), 2, 2, out.as_mut_ptr()) }, SWINGUP_OK);
    for (i, &ratio) in r.iter().enumerate() {
        for (j, &det) in d.iter().enumerate() {
            let cell = swingup::SimConfig::swing_up(-0.7, 8.0, det, ratio, 10.0).with_step(0.004);
            assert_eq!(out[i * 3 + j], swingup::final_population(&cell).unwrap());
        }
    }
    let bad = [0.5, -0.5];
    assert_eq!(unsafe { swingup_sweep(cfg, d.as_ptr(), 3, bad.as_ptr(), 2, 0, out.as_mut_ptr()) }, SWINGUP_ERR_DOMAIN);
    unsafe { swingup_config_free(cfg) };
}

#[test]
fn error_codes() {
    let mut cfg = ptr::null_mut();
    assert_eq!(unsafe { swingup_config_new(ptr::null(), ptr::null(), 0.0, &mut cfg) }, SWINGUP_ERR_NULL);
    assert!(last_error().contains("pulse1"));
    let bad = SwingupPulse { fwhm: -1.0, ..pulse(0.0, 1.0) };
    assert_eq!(unsafe { swingup_config_new(&bad, ptr::null(), 0.0, &mut cfg) }, SWINGUP_ERR_DOMAIN);
    assert!(cfg.is_null());

    // A 2 ps step cannot resolve an 8π pulse; the drift check trips.
    let coarse = config(pulse(-0.7, 8.0), Some(pulse(-2.05, 8.8)), 2.0);
    let mut p = 0.0;
    assert_eq!(unsafe { swingup_final_population(coarse, &mut p) }, SWINGUP_ERR_INTEGRATION);
    assert!(last_error().contains("drift"));

    assert_eq!(unsafe { swingup_config_set_window(coarse, 5.0, -5.0) }, SWINGUP_ERR_DOMAIN);
    unsafe {
        swingup_config_free(coarse);
        swingup_config_free(ptr::null_mut());
        swingup_trajectory_free(ptr::null_mut());
        swingup_histogram_free(ptr::null_mut());
    }
}

#[test]
fn hom_fixture() {
    // Centre 439 counts, neighbours 1000 and 1000 → V = 1 - 2·439/2000 = 0.561.
    let bw = 100.0;
    let n = 100;
    let mut counts = vec![0u64; n];
    let origin = -5000.0;
    for (center_ns, c) in [(-3.3f64, 1000), (0.0, 439), (3.3, 1000)] {
        let k = ((center_ns * 1000.0 - origin) / bw).floor() as usize;
        counts[k] = c;
    }
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { swingup_histogram_new(bw, counts.as_ptr(), n, origin, 3.3, &mut h) }, SWINGUP_OK);
    let mut stat = SwingupStat::default();
    assert_eq!(unsafe { swingup_hom(h, ptr::null(), 0.0, &mut stat) }, SWINGUP_OK);
    assert!((stat.value - 0.561).abs() < 1e-12, "{}", stat.value);
    assert_eq!(stat.flags, 0);
    unsafe { swingup_histogram_free(h) };
}

#[test]
fn g2_from_timetags() {
    let mut tags = Vec::new();
    for k in -4i32..=4 {
        let n = if k == 0 { 5 } else { 100 };
        tags.extend(std::iter::repeat(k as f64 * 12_500.0 + 10.0).take(n));
    }
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { swingup_histogram_from_timetags(tags.as_ptr(), tags.len(), 100.0, 12.5, &mut h) }, SWINGUP_OK);
    let mut raw = SwingupStat::default();
    let mut corr = SwingupStat::default();
    assert_eq!(unsafe { swingup_g2_raw(h, ptr::null(), &mut raw) }, SWINGUP_OK);
    assert_eq!(unsafe { swingup_g2_corrected(h, ptr::null(), &mut corr) }, SWINGUP_OK);
    assert!((raw.value - 0.05).abs() < 1e-12);
    assert!((corr.value - 0.05).abs() < 1e-12);
    let win = SwingupWindows { peak_window: 6.0, background_window: 4.5, n_side_peaks: 6, nominal: 1 };
    let mut nominal = SwingupStat::default();
    assert_eq!(unsafe { swingup_g2_raw(h, &win, &mut nominal) }, SWINGUP_OK);
    assert_eq!(nominal.value, raw.value);
    unsafe { swingup_histogram_free(h) };
}

#[test]
fn header_declares_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/swingup.h")).unwrap();
    for name in [
        "swingup_config_new",
        "swingup_final_population",
        "swingup_evolve",
        "swingup_sweep",
        "swingup_g2_corrected",
        "swingup_hom",
        "swingup_last_error",
        "typedef struct SwingupConfig SwingupConfig;",
        "#define SWINGUP_ERR_INTEGRATION -3",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}

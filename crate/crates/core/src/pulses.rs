//! Gaussian pulse envelopes and the two-colour drive in the frame of pulse 1.
//!
//! Units: time in ps, detunings in meV, Rabi amplitudes in rad/ps. Pulse
//! areas are stored in units of π.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant in meV·ps.
pub const HBAR_MEV_PS: f64 = 0.6582119569;

/// Converts an energy detuning in meV to an angular frequency in rad/ps.
#[inline]
pub fn detuning_to_angular(detuning_mev: f64) -> f64 {
    detuning_mev / HBAR_MEV_PS
}

/// One Gaussian pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    /// ħΔ in meV; red detuning is negative.
    pub detuning: f64,
    /// Pulse area in units of π.
    pub area: f64,
    /// Intensity FWHM in ps.
    pub fwhm: f64,
    /// Centre time in ps.
    #[serde(default)]
    pub delay: f64,
    /// Carrier phase in radians, relative to pulse 1.
    #[serde(default)]
    pub phase: f64,
}

impl PulseSpec {
    pub fn new(detuning: f64, area: f64, fwhm: f64) -> Self {
        Self { detuning, area, fwhm, delay: 0.0, phase: 0.0 }
    }

    /// A zero-area pulse, i.e. no second colour.
    pub fn off(fwhm: f64) -> Self {
        Self::new(0.0, 0.0, fwhm)
    }

    pub fn with_delay(mut self, delay: f64) -> Self {
        self.delay = delay;
        self
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.detuning, self.area, self.fwhm, self.delay, self.phase]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::domain(format!("pulse parameters must be finite: {self:?}")));
        }
        if self.fwhm <= 0.0 {
            return Err(Error::domain(format!("fwhm must be positive, got {}", self.fwhm)));
        }
        if self.area < 0.0 {
            return Err(Error::domain(format!("pulse area must be non-negative, got {}", self.area)));
        }
        Ok(())
    }

    /// Gaussian standard deviation of the amplitude envelope in ps.
    pub fn sigma(&self) -> f64 {
        self.fwhm / (4.0 * 2f64.ln()).sqrt()
    }

    /// Pulse area in radians.
    pub fn area_rad(&self) -> f64 {
        self.area * PI
    }

    pub(crate) fn envelope_unchecked(&self, t: f64) -> f64 {
        let sigma = self.sigma();
        let x = t - self.delay;
        self.area_rad() / (2.0 * PI * sigma * sigma).sqrt() * (-x * x / (2.0 * sigma * sigma)).exp()
    }
}

/// Sample of the complex Rabi amplitude Ω(t) in rad/ps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveSample {
    pub value: Complex64,
}

/// Converts an intensity FWHM to the amplitude σ: σ = FWHM / √(4 ln 2).
pub fn fwhm_to_sigma(fwhm: f64) -> Result<f64> {
    if !(fwhm > 0.0) || !fwhm.is_finite() {
        return Err(Error::domain(format!("fwhm must be positive and finite, got {fwhm}")));
    }
    Ok(fwhm / (4.0 * 2f64.ln()).sqrt())
}

/// Real Gaussian envelope normalised so its time integral is the pulse area in radians.
pub fn gaussian_envelope(t: f64, spec: &PulseSpec) -> Result<f64> {
    spec.validate()?;
    Ok(spec.envelope_unchecked(t))
}

/// Precomputed constants of the bichromatic drive, for the hot integration loop.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Drive {
    amp1: f64,
    inv_two_var1: f64,
    center1: f64,
    amp2: f64,
    inv_two_var2: f64,
    center2: f64,
    beat: f64,
    phase2: f64,
}

impl Drive {
    pub(crate) fn new(pulse1: &PulseSpec, pulse2: &PulseSpec) -> Self {
        let s1 = pulse1.sigma();
        let s2 = pulse2.sigma();
        Self {
            amp1: pulse1.area_rad() / (2.0 * PI * s1 * s1).sqrt(),
            inv_two_var1: 1.0 / (2.0 * s1 * s1),
            center1: pulse1.delay,
            amp2: pulse2.area_rad() / (2.0 * PI * s2 * s2).sqrt(),
            inv_two_var2: 1.0 / (2.0 * s2 * s2),
            center2: pulse2.delay,
            beat: detuning_to_angular(pulse2.detuning - pulse1.detuning),
            phase2: pulse2.phase,
        }
    }

    #[inline]
    pub(crate) fn at(&self, t: f64) -> Complex64 {
        let x1 = t - self.center1;
        let env1 = self.amp1 * (-x1 * x1 * self.inv_two_var1).exp();
        if self.amp2 == 0.0 {
            return Complex64::new(env1, 0.0);
        }
        let x2 = t - self.center2;
        let env2 = self.amp2 * (-x2 * x2 * self.inv_two_var2).exp();
        let (s, c) = (self.phase2 - self.beat * t).sin_cos();
        Complex64::new(env1 + env2 * c, env2 * s)
    }
}

/// Two-colour field Ω(t) = Ω₁(t) + Ω₂(t)·exp(−i(ω₂−ω₁)t + iφ₂) in the frame of pulse 1.
pub fn composite_field(t: f64, pulse1: &PulseSpec, pulse2: &PulseSpec) -> Result<DriveSample> {
    pulse1.validate()?;
    pulse2.validate()?;
    Ok(DriveSample { value: Drive::new(pulse1, pulse2).at(t) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Composite Simpson rule, used only as an independent quadrature oracle.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let n = if n % 2 == 1 { n + 1 } else { n };
        let h = (b - a) / n as f64;
        let mut acc = f(a) + f(b);
        for k in 1..n {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(a + k as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn sigma_unit_ratio() {
        let fwhm = (4.0 * 2f64.ln()).sqrt();
        assert_relative_eq!(fwhm_to_sigma(fwhm).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn sigma_values() {
        // 10 / sqrt(4 ln 2) and 5 / sqrt(4 ln 2), evaluated with mpmath at 30 digits.
        assert_relative_eq!(fwhm_to_sigma(10.0).unwrap(), 6.005612043932249, max_relative = 1e-14);
        assert_relative_eq!(fwhm_to_sigma(5.0).unwrap(), 3.0028060219661246, max_relative = 1e-14);
    }

    #[test]
    fn sigma_rejects_nonpositive() {
        assert!(matches!(fwhm_to_sigma(0.0), Err(Error::Domain(_))));
        assert!(matches!(fwhm_to_sigma(-1.0), Err(Error::Domain(_))));
        assert!(matches!(fwhm_to_sigma(f64::NAN), Err(Error::Domain(_))));
    }

    #[test]
    fn zero_area_envelope_vanishes() {
        let spec = PulseSpec::new(-0.7, 0.0, 10.0);
        for t in [-40.0, -3.0, 0.0, 12.5] {
            assert_eq!(gaussian_envelope(t, &spec).unwrap(), 0.0);
        }
    }

    #[test]
    fn envelope_peak() {
        let spec = PulseSpec::new(0.0, 1.0, 10.0);
        let sigma = 6.005612043932249;
        let expected = PI / (2.0 * PI * sigma * sigma).sqrt();
        assert_relative_eq!(gaussian_envelope(0.0, &spec).unwrap(), expected, max_relative = 1e-14);
    }

    #[test]
    fn envelope_integrates_to_area() {
        let spec = PulseSpec::new(-0.7, 8.0, 10.0);
        let integral = simpson(|t| spec.envelope_unchecked(t), -40.0, 40.0, 20_000);
        assert_relative_eq!(integral, 8.0 * PI, max_relative = 1e-8);
    }

    #[test]
    fn invalid_spec_rejected() {
        assert!(gaussian_envelope(0.0, &PulseSpec::new(0.0, -1.0, 10.0)).is_err());
        assert!(gaussian_envelope(0.0, &PulseSpec::new(0.0, 1.0, 0.0)).is_err());
        assert!(composite_field(0.0, &PulseSpec::new(0.0, 1.0, 10.0), &PulseSpec::new(0.0, 1.0, -2.0)).is_err());
    }

    #[test]
    fn single_pulse_field_is_real() {
        let p1 = PulseSpec::new(-0.7, 8.0, 10.0);
        let p2 = PulseSpec::new(-2.05, 0.0, 10.0).with_phase(1.0);
        for t in [-20.0, -1.3, 0.0, 7.7] {
            let s = composite_field(t, &p1, &p2).unwrap();
            assert_eq!(s.value.im, 0.0);
            assert_eq!(s.value.re, p1.envelope_unchecked(t));
        }
    }

    #[test]
    fn equal_detunings_sum_envelopes() {
        let p1 = PulseSpec::new(-1.0, 3.0, 10.0);
        let p2 = PulseSpec::new(-1.0, 2.0, 5.0);
        for t in [-10.0, 0.0, 4.0] {
            let s = composite_field(t, &p1, &p2).unwrap();
            assert!(s.value.im.abs() < 1e-15);
            assert_relative_eq!(s.value.re, p1.envelope_unchecked(t) + p2.envelope_unchecked(t), max_relative = 1e-14);
        }
    }

    #[test]
    fn optimum_field_at_origin() {
        // At t = 0 with zero delay the beat phase vanishes: |Ω| = (α₁ + α₂)/√(2πσ²).
        let p1 = PulseSpec::new(-0.7, 8.0, 10.0);
        let p2 = PulseSpec::new(-2.05, 8.8, 10.0);
        let sigma: f64 = 6.005612043932249;
        let direct = (8.0 + 8.8) * PI / (2.0 * PI * sigma * sigma).sqrt();
        let s = composite_field(0.0, &p1, &p2).unwrap();
        assert_relative_eq!(s.value.norm(), direct, max_relative = 1e-13);

        // Off the origin, compare with a direct complex evaluation.
        let t: f64 = 3.7;
        let beat = (-2.05 - -0.7) / HBAR_MEV_PS;
        let env = |area: f64| area * PI / (2.0 * PI * sigma * sigma).sqrt() * (-t * t / (2.0 * sigma * sigma)).exp();
        let direct = Complex64::new(env(8.0), 0.0) + env(8.8) * Complex64::from_polar(1.0, -beat * t);
        let s = composite_field(t, &p1, &p2).unwrap();
        assert!((s.value - direct).norm() < 1e-13);
    }

    proptest! {
        #[test]
        fn envelope_area_property(area in 0.0f64..20.0, fwhm in 1.0f64..20.0, delay in -5.0f64..5.0) {
            let spec = PulseSpec::new(-1.0, area, fwhm).with_delay(delay);
            // Integrate over ±12σ around the centre so truncation is negligible.
            let half = 12.0 * spec.sigma();
            let integral = simpson(|t| spec.envelope_unchecked(t).abs(), delay - half, delay + half, 40_000);
            let expected = area * PI;
            prop_assert!((integral - expected).abs() <= 1e-8 * expected.max(1e-300));
        }

        #[test]
        fn envelope_symmetric(area in 0.0f64..20.0, fwhm in 1.0f64..30.0, delay in -20.0f64..20.0, d in 0.0f64..50.0) {
            let spec = PulseSpec::new(0.0, area, fwhm).with_delay(delay);
            let a = spec.envelope_unchecked(delay + d);
            let b = spec.envelope_unchecked(delay - d);
            // The shifted arguments differ by at most an ulp, which the exponent amplifies.
            prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1e-300));
        }

        #[test]
        fn single_colour_always_real(t in -100.0f64..100.0, d1 in -5.0f64..0.0, d2 in -5.0f64..0.0, phase in 0.0f64..6.3) {
            let p1 = PulseSpec::new(d1, 8.0, 10.0);
            let p2 = PulseSpec::new(d2, 0.0, 10.0).with_phase(phase);
            let s = composite_field(t, &p1, &p2).unwrap();
            prop_assert_eq!(s.value.im, 0.0);
            prop_assert!(s.value.re.is_finite());
        }
    }
}

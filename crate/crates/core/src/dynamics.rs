//! Rotating-frame Hamiltonian and density-matrix propagation.
//!
//! The state is propagated as (ρ₀₀, ρ₁₁, ρ₀₁); ρ₁₀ is always the conjugate of
//! ρ₀₁, so Hermiticity holds structurally. The trace is never renormalised:
//! drift is measured and reported as an integration failure when it exceeds
//! [`TRACE_DRIFT_LIMIT`]. The (ρ₀₀, ρ₁₁) split conserves the trace up to
//! rounding even for unstable steps, so purity drift (Tr ρ² is conserved by
//! unitary dynamics) is checked against the same limit.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pulses::{detuning_to_angular, Drive, PulseSpec};

/// Largest tolerated |Tr ρ − 1| or |Tr ρ² − 1| at the end of an evolution.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-6;

/// Default fixed step: 1 fs.
pub const DEFAULT_STEP_PS: f64 = 1e-3;

/// Default integration window, centred on pulse 1 (80 ps total).
pub const DEFAULT_WINDOW_PS: (f64, f64) = (-40.0, 40.0);

/// Half-width, in units of σ, that a pulse must fit inside the window.
const SUPPORT_SIGMAS: f64 = 3.0;

const ADAPTIVE_MIN_STEP_PS: f64 = 1e-9;
const ADAPTIVE_INITIAL_STEP_PS: f64 = 1e-3;

/// 2×2 Hermitian density matrix of the two-level system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix {
    ground: f64,
    excited: f64,
    coherence: Complex64,
}

impl DensityMatrix {
    /// |0⟩⟨0|.
    pub fn ground_state() -> Self {
        Self { ground: 1.0, excited: 0.0, coherence: Complex64::new(0.0, 0.0) }
    }

    /// Builds a state from its diagonal and the upper off-diagonal entry ρ₀₁.
    pub fn from_parts(ground: f64, excited: f64, coherence: Complex64) -> Self {
        Self { ground, excited, coherence }
    }

    /// Entry ⟨i|ρ|j⟩ for i, j ∈ {0, 1}.
    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        match (i, j) {
            (0, 0) => Complex64::new(self.ground, 0.0),
            (1, 1) => Complex64::new(self.excited, 0.0),
            (0, 1) => self.coherence,
            (1, 0) => self.coherence.conj(),
            _ => panic!("two-level density matrix has no entry ({i}, {j})"),
        }
    }

    pub fn ground_population(&self) -> f64 {
        self.ground
    }

    pub fn excited_population(&self) -> f64 {
        self.excited
    }

    /// ρ₀₁.
    pub fn coherence(&self) -> Complex64 {
        self.coherence
    }

    pub fn trace(&self) -> f64 {
        self.ground + self.excited
    }

    /// Tr ρ².
    pub fn purity(&self) -> f64 {
        self.ground * self.ground + self.excited * self.excited + 2.0 * self.coherence.norm_sqr()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let half_trace = 0.5 * self.trace();
        let diff = 0.5 * (self.ground - self.excited);
        let radius = (diff * diff + self.coherence.norm_sqr()).sqrt();
        [half_trace - radius, half_trace + radius]
    }

    fn is_finite(&self) -> bool {
        self.ground.is_finite() && self.excited.is_finite() && self.coherence.re.is_finite() && self.coherence.im.is_finite()
    }
}

/// How the integrator chooses its steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stepping {
    /// Classical RK4 with a fixed step in ps. The step is shrunk slightly so
    /// that an integer number of steps spans the window exactly.
    Fixed { step: f64 },
    /// RK4 with step-doubling error control; `tolerance` bounds the local
    /// error per step.
    Adaptive { tolerance: f64 },
}

impl Default for Stepping {
    fn default() -> Self {
        Stepping::Fixed { step: DEFAULT_STEP_PS }
    }
}

/// Pulse pair plus integration controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub pulse1: PulseSpec,
    pub pulse2: PulseSpec,
    pub t_start: f64,
    pub t_end: f64,
    pub stepping: Stepping,
    /// Record every N-th step of a trajectory.
    pub record_stride: usize,
}

impl SimConfig {
    /// Default window and step for a given pulse pair.
    pub fn new(pulse1: PulseSpec, pulse2: PulseSpec) -> Self {
        Self {
            pulse1,
            pulse2,
            t_start: DEFAULT_WINDOW_PS.0,
            t_end: DEFAULT_WINDOW_PS.1,
            stepping: Stepping::default(),
            record_stride: 1,
        }
    }

    /// A single pulse; pulse 2 has zero area.
    pub fn single(pulse: PulseSpec) -> Self {
        Self::new(pulse, PulseSpec::off(pulse.fwhm))
    }

    /// Two equal-duration, zero-delay pulses with α₂ = ratio·α₁.
    pub fn swing_up(detuning1: f64, area1: f64, detuning2: f64, ratio: f64, fwhm: f64) -> Self {
        Self::new(PulseSpec::new(detuning1, area1, fwhm), PulseSpec::new(detuning2, ratio * area1, fwhm))
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.stepping = Stepping::Fixed { step };
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.record_stride = stride;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.pulse1.validate()?;
        self.pulse2.validate()?;
        if !(self.t_start.is_finite() && self.t_end.is_finite() && self.t_start < self.t_end) {
            return Err(Error::domain(format!(
                "integration window must satisfy t_start < t_end, got [{}, {}]",
                self.t_start, self.t_end
            )));
        }
        match self.stepping {
            Stepping::Fixed { step } if !(step > 0.0 && step.is_finite()) => {
                return Err(Error::domain(format!("step must be positive, got {step}")));
            }
            Stepping::Adaptive { tolerance } if !(tolerance > 0.0 && tolerance.is_finite()) => {
                return Err(Error::domain(format!("tolerance must be positive, got {tolerance}")));
            }
            _ => {}
        }
        if self.record_stride == 0 {
            return Err(Error::domain("record_stride must be at least 1"));
        }
        Ok(())
    }

    /// Integration window, widened when a pulse's ±3σ support sticks out of
    /// the configured one. Zero-area pulses do not widen the window.
    pub fn window(&self) -> (f64, f64) {
        let mut lo = self.t_start;
        let mut hi = self.t_end;
        for p in [&self.pulse1, &self.pulse2] {
            if p.area == 0.0 {
                continue;
            }
            let reach = SUPPORT_SIGMAS * p.sigma();
            lo = lo.min(p.delay - reach);
            hi = hi.max(p.delay + reach);
        }
        (lo, hi)
    }
}

/// Time-resolved record of an evolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub excited_population: Vec<f64>,
    pub ground_population: Vec<f64>,
    /// |ρ₀₁|.
    pub coherence_magnitude: Vec<f64>,
    pub final_state: DensityMatrix,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// H/ħ in rad/ps as a row-major 2×2 matrix in the basis (|0⟩, |1⟩).
pub type Hamiltonian = [[Complex64; 2]; 2];

/// H/ħ = −Δ₁σ†σ + ½(Ω*σ + Ωσ†) at time t.
pub fn hamiltonian(t: f64, config: &SimConfig) -> Result<Hamiltonian> {
    config.validate()?;
    let omega = Drive::new(&config.pulse1, &config.pulse2).at(t);
    Ok(hamiltonian_from(omega, excited_energy(config)))
}

fn hamiltonian_from(omega: Complex64, excited_energy: f64) -> Hamiltonian {
    let zero = Complex64::new(0.0, 0.0);
    [[zero, 0.5 * omega.conj()], [0.5 * omega, Complex64::new(excited_energy, 0.0)]]
}

/// Rotating-frame energy of |1⟩ in rad/ps: −Δ₁/ħ.
fn excited_energy(config: &SimConfig) -> f64 {
    -detuning_to_angular(config.pulse1.detuning)
}

/// Right-hand side of the von Neumann equation for the propagated entries.
#[inline]
fn derivative(state: &DensityMatrix, omega: Complex64, energy: f64) -> DensityMatrix {
    let z = 0.5 * omega * state.coherence;
    let flow = 2.0 * z.im;
    let inner = 0.5 * omega.conj() * (state.excited - state.ground) - energy * state.coherence;
    DensityMatrix {
        ground: -flow,
        excited: flow,
        coherence: Complex64::new(inner.im, -inner.re),
    }
}

#[inline]
fn axpy(state: &DensityMatrix, k: &DensityMatrix, h: f64) -> DensityMatrix {
    DensityMatrix {
        ground: state.ground + h * k.ground,
        excited: state.excited + h * k.excited,
        coherence: state.coherence + k.coherence * h,
    }
}

#[inline]
fn rk4_step(
    state: &DensityMatrix,
    h: f64,
    omega_start: Complex64,
    omega_mid: Complex64,
    omega_end: Complex64,
    energy: f64,
) -> DensityMatrix {
    let k1 = derivative(state, omega_start, energy);
    let k2 = derivative(&axpy(state, &k1, 0.5 * h), omega_mid, energy);
    let k3 = derivative(&axpy(state, &k2, 0.5 * h), omega_mid, energy);
    let k4 = derivative(&axpy(state, &k3, h), omega_end, energy);
    let sixth = h / 6.0;
    DensityMatrix {
        ground: state.ground + sixth * (k1.ground + 2.0 * k2.ground + 2.0 * k3.ground + k4.ground),
        excited: state.excited + sixth * (k1.excited + 2.0 * k2.excited + 2.0 * k3.excited + k4.excited),
        coherence: state.coherence
            + (k1.coherence + k2.coherence * 2.0 + k3.coherence * 2.0 + k4.coherence) * sixth,
    }
}

/// Runs the integrator from |0⟩⟨0|, calling `observe(step_index, t, ρ)` at
/// the initial point and after every accepted step.
fn integrate(config: &SimConfig, mut observe: impl FnMut(usize, f64, &DensityMatrix, bool)) -> Result<DensityMatrix> {
    config.validate()?;
    let drive = Drive::new(&config.pulse1, &config.pulse2);
    let energy = excited_energy(config);
    let (t0, t1) = config.window();
    let mut state = DensityMatrix::ground_state();
    observe(0, t0, &state, false);

    match config.stepping {
        Stepping::Fixed { step } => {
            let n = ((t1 - t0) / step).ceil().max(1.0) as usize;
            let h = (t1 - t0) / n as f64;
            let mut omega_start = drive.at(t0);
            for k in 0..n {
                let t = t0 + k as f64 * h;
                let t_next = if k + 1 == n { t1 } else { t0 + (k + 1) as f64 * h };
                let omega_mid = drive.at(t + 0.5 * h);
                let omega_end = drive.at(t_next);
                state = rk4_step(&state, h, omega_start, omega_mid, omega_end, energy);
                omega_start = omega_end;
                observe(k + 1, t_next, &state, k + 1 == n);
            }
        }
        Stepping::Adaptive { tolerance } => {
            let mut t = t0;
            let mut h = ADAPTIVE_INITIAL_STEP_PS.min(t1 - t0);
            let mut accepted = 0usize;
            while t < t1 {
                let last = t + h >= t1;
                let h_try = if last { t1 - t } else { h };
                let full = rk4_step(&state, h_try, drive.at(t), drive.at(t + 0.5 * h_try), drive.at(t + h_try), energy);
                let half = 0.5 * h_try;
                let tm = t + half;
                let mid = rk4_step(&state, half, drive.at(t), drive.at(t + 0.5 * half), drive.at(tm), energy);
                let fine = rk4_step(&mid, half, drive.at(tm), drive.at(tm + 0.5 * half), drive.at(t + h_try), energy);
                let err = (full.ground - fine.ground)
                    .abs()
                    .max((full.excited - fine.excited).abs())
                    .max((full.coherence - fine.coherence).norm());
                if err <= tolerance || h_try <= ADAPTIVE_MIN_STEP_PS {
                    if !fine.is_finite() {
                        break;
                    }
                    // Richardson extrapolation of the two RK4 estimates.
                    state = DensityMatrix {
                        ground: fine.ground + (fine.ground - full.ground) / 15.0,
                        excited: fine.excited + (fine.excited - full.excited) / 15.0,
                        coherence: fine.coherence + (fine.coherence - full.coherence) / 15.0,
                    };
                    t = if last { t1 } else { t + h_try };
                    accepted += 1;
                    observe(accepted, t, &state, last);
                }
                let factor = if err == 0.0 { 2.0 } else { (0.9 * (tolerance / err).powf(0.2)).clamp(0.2, 2.0) };
                h = (h_try * factor).max(ADAPTIVE_MIN_STEP_PS);
            }
        }
    }

    let drift = (state.trace() - 1.0).abs().max((state.purity() - 1.0).abs());
    if !state.is_finite() || drift > TRACE_DRIFT_LIMIT {
        return Err(Error::Integration { drift: if drift.is_nan() { f64::INFINITY } else { drift }, limit: TRACE_DRIFT_LIMIT });
    }
    Ok(state)
}

/// Propagates ρ from the ground state over the (possibly widened) window and
/// records every `record_stride`-th step, plus the final one.
pub fn evolve(config: &SimConfig) -> Result<Trajectory> {
    let stride = config.record_stride.max(1);
    let mut traj = Trajectory {
        times: Vec::new(),
        excited_population: Vec::new(),
        ground_population: Vec::new(),
        coherence_magnitude: Vec::new(),
        final_state: DensityMatrix::ground_state(),
    };
    let final_state = integrate(config, |k, t, rho, last| {
        if k % stride == 0 || last {
            traj.times.push(t);
            traj.excited_population.push(rho.excited);
            traj.ground_population.push(rho.ground);
            traj.coherence_magnitude.push(rho.coherence.norm());
        }
    })?;
    traj.final_state = final_state;
    Ok(traj)
}

/// ⟨1|ρ(t_f)|1⟩ without storing the trajectory.
pub fn final_population(config: &SimConfig) -> Result<f64> {
    integrate(config, |_, _, _, _| {}).map(|rho| rho.excited)
}

/// Final density matrix without storing the trajectory.
pub fn final_state(config: &SimConfig) -> Result<DensityMatrix> {
    integrate(config, |_, _, _, _| {})
}

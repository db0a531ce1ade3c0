//! Swing-up excitation of a two-level system.
//!
//! Density-matrix propagation under a bichromatic Gaussian drive, parameter
//! sweeps over the second pulse, and correlation-histogram analysis for
//! single-photon purity and two-photon interference.

pub mod cli;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod optimize;
pub mod output;
pub mod photonstats;
pub mod pulses;
pub mod sweep;

pub use dynamics::{evolve, final_population, hamiltonian, DensityMatrix, SimConfig, Stepping, Trajectory};
pub use error::{Error, Result};
pub use pulses::{composite_field, fwhm_to_sigma, gaussian_envelope, DriveSample, PulseSpec, HBAR_MEV_PS};
pub use sweep::{
    delay_series, find_maximum, linspace, normalize, rabi_curve, refine_maximum, run_sweep, Maximum, RabiCurve, Refined,
    SweepGrid, SweepResult,
};
pub use photonstats::{
    bin_timetags, g2_corrected, g2_raw, hom_visibility, CorrelationHistogram, PeakLocation, StatFlag, StatResult, WindowSpec,
};

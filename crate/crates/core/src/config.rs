//! Run configuration for the command-line front end.
//!
//! One TOML file carries every parameter block; the blocks a subcommand needs
//! are resolved and validated before any computation starts.
//!
//! ```toml
//! [pulse1]
//! detuning = -0.7   # meV
//! area = 8.0        # units of π
//! fwhm = 10.0       # ps
//!
//! [pulse2]
//! detuning = -2.05
//! area_ratio = 1.1  # or `area`
//! fwhm = 10.0
//!
//! [integration]
//! step = 0.001      # ps; or `tolerance` for adaptive stepping
//! record_stride = 10
//!
//! [sweep]
//! detuning = { start = -3.0, stop = -0.92, points = 64 }
//! ratio = { start = 0.44, stop = 1.81, points = 64 }
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::{SimConfig, Stepping, DEFAULT_STEP_PS, DEFAULT_WINDOW_PS};
use crate::error::{Error, Result};
use crate::photonstats::{PeakLocation, WindowSpec};
use crate::pulses::PulseSpec;
use crate::sweep::{linspace, SweepGrid, DEFAULT_GRID_POINTS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSection {
    pub detuning: f64,
    pub area: Option<f64>,
    /// α₂/α₁; only meaningful for pulse 2.
    pub area_ratio: Option<f64>,
    pub fwhm: f64,
    #[serde(default)]
    pub delay: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrationSection {
    pub t_start: Option<f64>,
    pub t_end: Option<f64>,
    pub step: Option<f64>,
    pub tolerance: Option<f64>,
    pub record_stride: Option<usize>,
}

/// An axis given either as explicit values or as an inclusive linear range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AxisSpec {
    Values(Vec<f64>),
    Range { start: f64, stop: f64, points: usize },
}

impl AxisSpec {
    pub fn values(&self) -> Vec<f64> {
        match self {
            AxisSpec::Values(v) => v.clone(),
            AxisSpec::Range { start, stop, points } => linspace(*start, *stop, *points),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub detuning: Option<AxisSpec>,
    pub ratio: Option<AxisSpec>,
    #[serde(default)]
    pub normalize: bool,
    #[serde(default = "default_true")]
    pub image: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RabiSection {
    pub areas: AxisSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelaySection {
    pub delays: AxisSpec,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeSection {
    /// (detuning meV, ratio); when absent the seed is the `[sweep]` grid maximum.
    pub seed: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistogramSection {
    /// CSV with `delay_ps` or `bin_start_ps,count`; relative to the config file.
    pub input: PathBuf,
    /// Bin width for time tags, in ps.
    #[serde(default = "default_bin_width")]
    pub bin_width: f64,
    /// Peak spacing in ns.
    pub rep_period: f64,
}

fn default_bin_width() -> f64 {
    100.0
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSection {
    pub peak_window: Option<f64>,
    pub background_window: Option<f64>,
    pub n_side_peaks: Option<usize>,
    pub location: Option<PeakLocation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomSection {
    /// Window change used for the jitter error bound, in ps.
    #[serde(default = "default_jitter")]
    pub jitter: f64,
}

fn default_jitter() -> f64 {
    150.0
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
}

/// Parsed configuration file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub pulse1: Option<PulseSection>,
    pub pulse2: Option<PulseSection>,
    #[serde(default)]
    pub integration: IntegrationSection,
    pub sweep: Option<SweepSection>,
    pub rabi: Option<RabiSection>,
    pub delay: Option<DelaySection>,
    pub optimize: Option<OptimizeSection>,
    pub histogram: Option<HistogramSection>,
    pub windows: Option<WindowSection>,
    pub hom: Option<HomSection>,
    #[serde(default)]
    pub output: OutputSection,
    /// Directory of the file this was loaded from; relative paths resolve against it.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn missing(section: &str) -> Error {
    Error::Config(format!("missing [{section}] section"))
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    /// SHA-256 over the canonical JSON form, independent of TOML formatting.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("run config serialises");
        let digest = Sha256::digest(&canonical);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    fn pulse1(&self) -> Result<PulseSpec> {
        let p = self.pulse1.as_ref().ok_or_else(|| missing("pulse1"))?;
        if p.area_ratio.is_some() {
            return Err(Error::Config("pulse1 takes `area`, not `area_ratio`".into()));
        }
        let area = p.area.ok_or_else(|| Error::Config("pulse1 needs `area`".into()))?;
        Ok(PulseSpec { detuning: p.detuning, area, fwhm: p.fwhm, delay: p.delay, phase: p.phase })
    }

    fn pulse2(&self, pulse1: &PulseSpec) -> Result<PulseSpec> {
        let Some(p) = self.pulse2.as_ref() else {
            return Ok(PulseSpec::off(pulse1.fwhm));
        };
        let area = match (p.area, p.area_ratio) {
            (Some(a), None) => a,
            (None, Some(r)) => r * pulse1.area,
            (None, None) => 0.0,
            (Some(_), Some(_)) => return Err(Error::Config("pulse2 takes either `area` or `area_ratio`, not both".into())),
        };
        Ok(PulseSpec { detuning: p.detuning, area, fwhm: p.fwhm, delay: p.delay, phase: p.phase })
    }

    /// The simulation described by `[pulse1]`, `[pulse2]` and `[integration]`.
    pub fn sim_config(&self) -> Result<SimConfig> {
        let pulse1 = self.pulse1()?;
        let pulse2 = self.pulse2(&pulse1)?;
        let i = &self.integration;
        let stepping = match (i.step, i.tolerance) {
            (Some(_), Some(_)) => return Err(Error::Config("integration takes either `step` or `tolerance`".into())),
            (None, Some(tolerance)) => Stepping::Adaptive { tolerance },
            (step, None) => Stepping::Fixed { step: step.unwrap_or(DEFAULT_STEP_PS) },
        };
        let cfg = SimConfig {
            pulse1,
            pulse2,
            t_start: i.t_start.unwrap_or(DEFAULT_WINDOW_PS.0),
            t_end: i.t_end.unwrap_or(DEFAULT_WINDOW_PS.1),
            stepping,
            record_stride: i.record_stride.unwrap_or(1),
        };
        cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn sweep_grid(&self) -> Result<SweepGrid> {
        let s = self.sweep.as_ref().ok_or_else(|| missing("sweep"))?;
        let detuning = s.detuning.as_ref().map(AxisSpec::values).unwrap_or_else(|| linspace(-3.0, -0.92, DEFAULT_GRID_POINTS));
        let ratio = s.ratio.as_ref().map(AxisSpec::values).unwrap_or_else(|| linspace(0.44, 1.81, DEFAULT_GRID_POINTS));
        SweepGrid::new(detuning, ratio, self.sim_config()?).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn rabi_areas(&self) -> Result<Vec<f64>> {
        Ok(self.rabi.as_ref().ok_or_else(|| missing("rabi"))?.areas.values())
    }

    pub fn delays(&self) -> Result<Vec<f64>> {
        Ok(self.delay.as_ref().ok_or_else(|| missing("delay"))?.delays.values())
    }

    pub fn histogram(&self) -> Result<&HistogramSection> {
        self.histogram.as_ref().ok_or_else(|| missing("histogram"))
    }

    pub fn histogram_path(&self) -> Result<PathBuf> {
        let h = self.histogram()?;
        Ok(if h.input.is_absolute() { h.input.clone() } else { self.base_dir.join(&h.input) })
    }

    /// g² windows: defaults overridden by `[windows]`.
    pub fn g2_windows(&self) -> WindowSpec {
        self.apply_windows(WindowSpec::g2_default())
    }

    /// HOM windows for the configured peak spacing, overridden by `[windows]`.
    pub fn hom_windows(&self) -> Result<WindowSpec> {
        Ok(self.apply_windows(WindowSpec::hom_default(self.histogram()?.rep_period)))
    }

    fn apply_windows(&self, mut win: WindowSpec) -> WindowSpec {
        if let Some(w) = &self.windows {
            win.peak_window = w.peak_window.unwrap_or(win.peak_window);
            win.background_window = w.background_window.unwrap_or(win.background_window);
            win.n_side_peaks = w.n_side_peaks.unwrap_or(win.n_side_peaks);
            win.location = w.location.unwrap_or(win.location);
        }
        win
    }

    pub fn jitter(&self) -> f64 {
        self.hom.as_ref().map_or_else(default_jitter, |h| h.jitter)
    }

    pub fn output_dir(&self) -> PathBuf {
        match &self.output.dir {
            Some(d) if d.is_absolute() => d.clone(),
            Some(d) => self.base_dir.join(d),
            None => self.base_dir.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SWING: &str = r#"
        [pulse1]
        detuning = -0.7
        area = 8.0
        fwhm = 10.0

        [pulse2]
        detuning = -2.05
        area_ratio = 1.1
        fwhm = 10.0

        [integration]
        step = 0.002
        record_stride = 5

        [sweep]
        detuning = { start = -3.0, stop = -1.0, points = 3 }
        ratio = [0.5, 1.0]
    "#;

    #[test]
    fn parses_swing_up() {
        let cfg = RunConfig::from_toml_str(SWING).unwrap();
        let sim = cfg.sim_config().unwrap();
        assert_eq!(sim.pulse2.area, 1.1 * 8.0);
        assert_eq!(sim.stepping, Stepping::Fixed { step: 0.002 });
        assert_eq!(sim.record_stride, 5);
        assert_eq!((sim.t_start, sim.t_end), (-40.0, 40.0));
        let grid = cfg.sweep_grid().unwrap();
        assert_eq!(grid.detuning_axis, vec![-3.0, -2.0, -1.0]);
        assert_eq!(grid.ratio_axis, vec![0.5, 1.0]);
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = format!("{SWING}\n[pulse3]\ndetuning = 1.0\n");
        assert!(matches!(RunConfig::from_toml_str(&text), Err(Error::Config(_))));
        let text = SWING.replace("fwhm = 10.0\n\n        [pulse2]", "fwhm = 10.0\n        width = 3\n\n        [pulse2]");
        assert!(RunConfig::from_toml_str(&text).is_err());
    }

    #[test]
    fn invalid_values_are_config_errors() {
        let cfg = RunConfig::from_toml_str(&SWING.replace("fwhm = 10.0", "fwhm = -1.0")).unwrap();
        assert!(matches!(cfg.sim_config(), Err(Error::Config(_))));
        let cfg = RunConfig::from_toml_str(&SWING.replace("ratio = [0.5, 1.0]", "ratio = [1.0, 0.5, 0.7]")).unwrap();
        assert!(matches!(cfg.sweep_grid(), Err(Error::Config(_))));
        let cfg = RunConfig::from_toml_str(&SWING.replace("area_ratio = 1.1", "area_ratio = 1.1\n        area = 3.0")).unwrap();
        assert!(cfg.sim_config().is_err());
    }

    #[test]
    fn missing_sections() {
        let cfg = RunConfig::from_toml_str("").unwrap();
        assert!(matches!(cfg.sim_config(), Err(Error::Config(_))));
        assert!(cfg.rabi_areas().is_err());
        assert!(cfg.histogram().is_err());
    }

    #[test]
    fn hash_ignores_formatting() {
        let a = RunConfig::from_toml_str(SWING).unwrap();
        let b = RunConfig::from_toml_str(&SWING.replace("    ", "").replace("-0.7", "-0.70")).unwrap();
        assert_eq!(a.hash(), b.hash());
        let c = RunConfig::from_toml_str(&SWING.replace("-0.7", "-0.8")).unwrap();
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn window_overrides() {
        let text = r#"
            [histogram]
            input = "hom.csv"
            rep_period = 3.3
            [windows]
            location = "nominal"
        "#;
        let cfg = RunConfig::from_toml_str(text).unwrap();
        let w = cfg.hom_windows().unwrap();
        assert_eq!(w.peak_window, 3.3);
        assert_eq!(w.location, PeakLocation::Nominal);
        assert_eq!(cfg.g2_windows().peak_window, 6.0);
        assert_eq!(cfg.jitter(), 150.0);
    }
}

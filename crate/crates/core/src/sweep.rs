//! Parameter sweeps over the second pulse, maximum search and Rabi calibration.
//!
//! Every grid cell is an independent fixed-step evolution, so serial and
//! parallel execution give bit-identical maps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{final_population, SimConfig};
use crate::error::{Error, Result};
use crate::optimize::{minimize, NelderMeadOptions};

/// Default resolution of a 2-D map along each axis.
pub const DEFAULT_GRID_POINTS: usize = 64;

/// Evaluation budget of [`refine_maximum`].
pub const REFINE_MAX_EVALUATIONS: usize = 500;

/// Convergence threshold of [`refine_maximum`] in scaled coordinates.
pub const REFINE_TOLERANCE: f64 = 1e-3;

/// `n` evenly spaced points from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / (n - 1) as f64;
            (0..n).map(|k| if k == n - 1 { stop } else { start + k as f64 * step }).collect()
        }
    }
}

fn strictly_monotonic(axis: &[f64]) -> bool {
    let increasing = axis.windows(2).all(|w| w[0] < w[1]);
    let decreasing = axis.windows(2).all(|w| w[0] > w[1]);
    axis.iter().all(|v| v.is_finite()) && (increasing || decreasing)
}

/// Detuning × area-ratio grid for the second pulse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    /// ħΔ₂ in meV.
    pub detuning_axis: Vec<f64>,
    /// α₂/α₁.
    pub ratio_axis: Vec<f64>,
    /// Template; pulse 2's detuning and area are overwritten per cell.
    pub base: SimConfig,
}

impl SweepGrid {
    pub fn new(detuning_axis: Vec<f64>, ratio_axis: Vec<f64>, base: SimConfig) -> Result<Self> {
        let grid = Self { detuning_axis, ratio_axis, base };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.detuning_axis.is_empty() || self.ratio_axis.is_empty() {
            return Err(Error::domain("sweep axes must be non-empty"));
        }
        if !strictly_monotonic(&self.detuning_axis) {
            return Err(Error::domain("detuning axis must be strictly monotonic"));
        }
        if !strictly_monotonic(&self.ratio_axis) {
            return Err(Error::domain("ratio axis must be strictly monotonic"));
        }
        if self.ratio_axis.iter().any(|&r| r < 0.0) {
            return Err(Error::domain("area ratios must be non-negative"));
        }
        self.base.validate()
    }

    /// Configuration of cell (row `i` along the ratio axis, column `j` along the detuning axis).
    pub fn cell_config(&self, i: usize, j: usize) -> SimConfig {
        with_second_pulse(&self.base, self.detuning_axis[j], self.ratio_axis[i])
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.ratio_axis.len(), self.detuning_axis.len())
    }
}

/// `base` with pulse 2 set to the given detuning and α₂ = ratio·α₁.
pub fn with_second_pulse(base: &SimConfig, detuning: f64, ratio: f64) -> SimConfig {
    let mut cfg = *base;
    cfg.pulse2.detuning = detuning;
    cfg.pulse2.area = ratio * base.pulse1.area;
    cfg
}

/// Fidelity map, rows along the ratio axis and columns along the detuning axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub grid: SweepGrid,
    pub fidelity: Vec<Vec<f64>>,
    pub normalized: bool,
}

impl SweepResult {
    pub fn max_value(&self) -> f64 {
        self.fidelity.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

fn evaluate_cell(grid: &SweepGrid, index: usize) -> Result<f64> {
    let cols = grid.detuning_axis.len();
    let (i, j) = (index / cols, index % cols);
    final_population(&grid.cell_config(i, j))
        .map(|p| p.clamp(0.0, 1.0))
        .map_err(|e| Error::Cell { detuning: grid.detuning_axis[j], ratio: grid.ratio_axis[i], source: Box::new(e) })
}

fn assemble(grid: &SweepGrid, cells: Vec<Result<f64>>) -> Result<SweepResult> {
    let cols = grid.detuning_axis.len();
    // First failure in row-major order, independent of scheduling.
    let values = cells.into_iter().collect::<Result<Vec<f64>>>()?;
    let fidelity = values.chunks(cols).map(<[f64]>::to_vec).collect();
    Ok(SweepResult { grid: grid.clone(), fidelity, normalized: false })
}

/// Evaluates every cell on the current rayon pool.
pub fn run_sweep(grid: &SweepGrid) -> Result<SweepResult> {
    grid.validate()?;
    let (rows, cols) = grid.shape();
    let cells: Vec<Result<f64>> = (0..rows * cols).into_par_iter().map(|k| evaluate_cell(grid, k)).collect();
    assemble(grid, cells)
}

/// Like [`run_sweep`] on a dedicated pool of at most `threads` workers.
pub fn run_sweep_with_threads(grid: &SweepGrid, threads: usize) -> Result<SweepResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
    pool.install(|| run_sweep(grid))
}

/// Single-threaded reference evaluation.
pub fn run_sweep_serial(grid: &SweepGrid) -> Result<SweepResult> {
    grid.validate()?;
    let (rows, cols) = grid.shape();
    let cells = (0..rows * cols).map(|k| evaluate_cell(grid, k)).collect();
    assemble(grid, cells)
}

/// Divides every cell by the map maximum.
pub fn normalize(result: &SweepResult) -> Result<SweepResult> {
    let max = result.max_value();
    if !(max > 0.0) {
        return Err(Error::domain("cannot normalise an all-zero map"));
    }
    let fidelity = result.fidelity.iter().map(|row| row.iter().map(|v| v / max).collect()).collect();
    Ok(SweepResult { grid: result.grid.clone(), fidelity, normalized: true })
}

/// Location and value of a map maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Maximum {
    pub detuning: f64,
    pub ratio: f64,
    pub fidelity: f64,
    pub row: usize,
    pub col: usize,
}

/// Grid argmax. Ties go to the smallest |detuning|, then the smallest ratio.
pub fn find_maximum(result: &SweepResult) -> Maximum {
    let grid = &result.grid;
    let mut best: Option<Maximum> = None;
    for (i, row) in result.fidelity.iter().enumerate() {
        for (j, &f) in row.iter().enumerate() {
            let cand = Maximum { detuning: grid.detuning_axis[j], ratio: grid.ratio_axis[i], fidelity: f, row: i, col: j };
            let better = match &best {
                None => true,
                Some(b) => {
                    f > b.fidelity
                        || (f == b.fidelity
                            && (cand.detuning.abs() < b.detuning.abs()
                                || (cand.detuning.abs() == b.detuning.abs() && cand.ratio < b.ratio)))
                }
            };
            if better {
                best = Some(cand);
            }
        }
    }
    best.expect("sweep result has at least one cell")
}

/// Coordinate scaling used by [`refine_maximum`]: the simplex lives in
/// (detuning / detuning_unit, ratio / ratio_unit).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefineScaling {
    pub detuning_unit_mev: f64,
    pub ratio_unit: f64,
    /// Initial simplex edge in scaled units.
    pub initial_step: f64,
    pub tolerance: f64,
}

impl Default for RefineScaling {
    fn default() -> Self {
        Self { detuning_unit_mev: 1.0, ratio_unit: 1.0, initial_step: 0.05, tolerance: REFINE_TOLERANCE }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Refined {
    pub detuning: f64,
    pub ratio: f64,
    pub fidelity: f64,
    pub seed_fidelity: f64,
    pub evaluations: usize,
    /// Set when the search stopped without a certified maximum: either the
    /// evaluation cap was hit or the landscape was flat everywhere it looked.
    pub truncated: bool,
    pub scaling: RefineScaling,
}

/// Nelder–Mead ascent on the final population from `seed = (detuning, ratio)`.
/// Points with detuning ≥ 0 or ratio ≤ 0 are treated as infeasible.
pub fn refine_maximum(seed: (f64, f64), base: &SimConfig) -> Result<Refined> {
    let (d0, r0) = seed;
    if !(d0 < 0.0 && r0 > 0.0) {
        return Err(Error::domain(format!("seed must have detuning < 0 and ratio > 0, got ({d0}, {r0})")));
    }
    base.validate()?;
    let scaling = RefineScaling::default();
    let mut lowest = f64::INFINITY;
    let mut highest = f64::NEG_INFINITY;
    let objective = |x: &[f64]| -> Result<f64> {
        let detuning = x[0] * scaling.detuning_unit_mev;
        let ratio = x[1] * scaling.ratio_unit;
        if !(detuning < 0.0 && ratio > 0.0) {
            return Ok(f64::INFINITY);
        }
        let p = final_population(&with_second_pulse(base, detuning, ratio))?;
        lowest = lowest.min(p);
        highest = highest.max(p);
        Ok(-p)
    };
    let start = [d0 / scaling.detuning_unit_mev, r0 / scaling.ratio_unit];
    let steps = [scaling.initial_step, scaling.initial_step];
    let opts = NelderMeadOptions { coordinate_tolerance: scaling.tolerance, max_evaluations: REFINE_MAX_EVALUATIONS };
    let seed_fidelity = final_population(&with_second_pulse(base, d0, r0))?;
    let min = minimize(objective, &start, &steps, opts)?;
    let flat = lowest == highest;
    Ok(Refined {
        detuning: min.point[0] * scaling.detuning_unit_mev,
        ratio: min.point[1] * scaling.ratio_unit,
        fidelity: -min.value,
        seed_fidelity,
        evaluations: min.evaluations,
        truncated: !min.converged || flat,
        scaling,
    })
}

/// Resonant Rabi curve: final population versus single-pulse area.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RabiCurve {
    /// Pulse areas in units of π.
    pub areas: Vec<f64>,
    pub populations: Vec<f64>,
}

impl RabiCurve {
    /// Area of the first local maximum of the curve, the π-pulse calibration point.
    pub fn pi_calibration(&self) -> Option<f64> {
        let p = &self.populations;
        (1..p.len().saturating_sub(1)).find(|&k| p[k] >= p[k - 1] && p[k] > p[k + 1]).map(|k| self.areas[k])
    }
}

/// Final population for each pulse area of a single resonant pulse.
pub fn rabi_curve(areas: &[f64], base: &SimConfig) -> Result<RabiCurve> {
    if base.pulse1.detuning != 0.0 {
        return Err(Error::domain(format!(
            "Rabi calibration needs a resonant pulse, got detuning {} meV",
            base.pulse1.detuning
        )));
    }
    if base.pulse2.area != 0.0 {
        return Err(Error::domain("Rabi calibration needs a single pulse; pulse 2 must have zero area"));
    }
    if areas.is_empty() || !areas.windows(2).all(|w| w[0] < w[1]) || areas.iter().any(|a| !(*a >= 0.0 && a.is_finite())) {
        return Err(Error::domain("areas must be non-negative, finite and strictly increasing"));
    }
    base.validate()?;
    let populations = areas
        .par_iter()
        .map(|&area| {
            let mut cfg = *base;
            cfg.pulse1.area = area;
            final_population(&cfg)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
    Ok(RabiCurve { areas: areas.to_vec(), populations })
}

/// Final population with pulse 2 centred at each delay.
pub fn delay_series(delays: &[f64], base: &SimConfig) -> Result<Vec<(f64, f64)>> {
    base.validate()?;
    if delays.iter().any(|d| !d.is_finite()) {
        return Err(Error::domain("delays must be finite"));
    }
    delays
        .par_iter()
        .map(|&delay| {
            let mut cfg = *base;
            cfg.pulse2.delay = delay;
            final_population(&cfg).map(|p| (delay, p))
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

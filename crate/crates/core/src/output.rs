//! File formats: CSV tables, JSON documents and PGM colormaps.
//!
//! Floats are written with Rust's shortest round-trip formatting, so every
//! table re-parses to the exact values that produced it.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::dynamics::{SimConfig, Stepping, Trajectory};
use crate::error::{Error, Result};
use crate::photonstats::CorrelationHistogram;
use crate::sweep::{find_maximum, Maximum, RabiCurve, RefineScaling, Refined, SweepGrid, SweepResult};

pub const TRACE_HEADER: [&str; 3] = ["t_ps", "population", "coherence_abs"];
pub const RABI_HEADER: [&str; 2] = ["area_pi", "population"];
pub const DELAY_HEADER: [&str; 2] = ["delay_ps", "fidelity"];
/// Top-left cell of the sweep CSV; the rest of row 0 is the detuning axis and
/// the rest of column 0 is the ratio axis.
pub const SWEEP_CORNER: &str = "ratio\\detuning_meV";

/// Version string recorded in output metadata.
pub const ARTIFACT_VERSION: &str = concat!("swingup ", env!("CARGO_PKG_VERSION"));

fn csv_err(what: &str, e: csv::Error) -> Error {
    Error::parse(what, e)
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

fn parse_f64(what: &str, s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|e| Error::parse(what, format!("{s:?}: {e}")))
}

fn write_table<W: Write>(out: W, header: &[&str], rows: impl Iterator<Item = Vec<f64>>, what: &str) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(out);
    w.write_record(header).map_err(|e| csv_err(what, e))?;
    for row in rows {
        w.write_record(row.into_iter().map(fmt)).map_err(|e| csv_err(what, e))?;
    }
    w.flush().map_err(|e| Error::parse(what, e))?;
    Ok(())
}

fn read_table<R: Read>(input: R, header: &[&str], what: &str) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let found: Vec<String> = r.headers().map_err(|e| csv_err(what, e))?.iter().map(|h| h.trim().to_owned()).collect();
    if found != header {
        return Err(Error::parse(what, format!("expected header {header:?}, found {found:?}")));
    }
    r.records()
        .map(|rec| {
            let rec = rec.map_err(|e| csv_err(what, e))?;
            rec.iter().map(|f| parse_f64(what, f)).collect()
        })
        .collect()
}

/// The columns of a trajectory CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceTable {
    pub t_ps: Vec<f64>,
    pub population: Vec<f64>,
    pub coherence_abs: Vec<f64>,
}

impl From<&Trajectory> for TraceTable {
    fn from(t: &Trajectory) -> Self {
        Self {
            t_ps: t.times.clone(),
            population: t.excited_population.clone(),
            coherence_abs: t.coherence_magnitude.clone(),
        }
    }
}

pub fn write_trace_csv<W: Write>(out: W, traj: &Trajectory) -> Result<()> {
    let rows = (0..traj.len()).map(|k| vec![traj.times[k], traj.excited_population[k], traj.coherence_magnitude[k]]);
    write_table(out, &TRACE_HEADER, rows, "trace csv")
}

pub fn read_trace_csv<R: Read>(input: R) -> Result<TraceTable> {
    let rows = read_table(input, &TRACE_HEADER, "trace csv")?;
    Ok(TraceTable {
        t_ps: rows.iter().map(|r| r[0]).collect(),
        population: rows.iter().map(|r| r[1]).collect(),
        coherence_abs: rows.iter().map(|r| r[2]).collect(),
    })
}

pub fn write_rabi_csv<W: Write>(out: W, curve: &RabiCurve) -> Result<()> {
    let rows = curve.areas.iter().zip(&curve.populations).map(|(&a, &p)| vec![a, p]);
    write_table(out, &RABI_HEADER, rows, "rabi csv")
}

pub fn read_rabi_csv<R: Read>(input: R) -> Result<RabiCurve> {
    let rows = read_table(input, &RABI_HEADER, "rabi csv")?;
    Ok(RabiCurve { areas: rows.iter().map(|r| r[0]).collect(), populations: rows.iter().map(|r| r[1]).collect() })
}

pub fn write_delay_csv<W: Write>(out: W, series: &[(f64, f64)]) -> Result<()> {
    write_table(out, &DELAY_HEADER, series.iter().map(|&(d, f)| vec![d, f]), "delay csv")
}

pub fn read_delay_csv<R: Read>(input: R) -> Result<Vec<(f64, f64)>> {
    Ok(read_table(input, &DELAY_HEADER, "delay csv")?.into_iter().map(|r| (r[0], r[1])).collect())
}

/// Axes and values of a fidelity map, as stored in the sweep CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct FidelityTable {
    pub detuning_axis: Vec<f64>,
    pub ratio_axis: Vec<f64>,
    pub fidelity: Vec<Vec<f64>>,
}

impl From<&SweepResult> for FidelityTable {
    fn from(r: &SweepResult) -> Self {
        Self {
            detuning_axis: r.grid.detuning_axis.clone(),
            ratio_axis: r.grid.ratio_axis.clone(),
            fidelity: r.fidelity.clone(),
        }
    }
}

pub fn write_sweep_csv<W: Write>(out: W, result: &SweepResult) -> Result<()> {
    let what = "sweep csv";
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(out);
    let mut header = vec![SWEEP_CORNER.to_owned()];
    header.extend(result.grid.detuning_axis.iter().map(|&d| fmt(d)));
    w.write_record(&header).map_err(|e| csv_err(what, e))?;
    for (ratio, row) in result.grid.ratio_axis.iter().zip(&result.fidelity) {
        let mut rec = vec![fmt(*ratio)];
        rec.extend(row.iter().map(|&f| fmt(f)));
        w.write_record(&rec).map_err(|e| csv_err(what, e))?;
    }
    w.flush().map_err(|e| Error::parse(what, e))?;
    Ok(())
}

pub fn read_sweep_csv<R: Read>(input: R) -> Result<FidelityTable> {
    let what = "sweep csv";
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(input);
    let mut records = r.records();
    let header = records.next().ok_or_else(|| Error::parse(what, "empty file"))?.map_err(|e| csv_err(what, e))?;
    if header.get(0).map(str::trim) != Some(SWEEP_CORNER) {
        return Err(Error::parse(what, format!("first cell must be {SWEEP_CORNER:?}")));
    }
    let detuning_axis = header.iter().skip(1).map(|f| parse_f64(what, f)).collect::<Result<Vec<_>>>()?;
    let mut ratio_axis = Vec::new();
    let mut fidelity = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| csv_err(what, e))?;
        let mut vals = rec.iter().map(|f| parse_f64(what, f));
        ratio_axis.push(vals.next().ok_or_else(|| Error::parse(what, "empty row"))??);
        let row = vals.collect::<Result<Vec<_>>>()?;
        if row.len() != detuning_axis.len() {
            return Err(Error::parse(what, "row length does not match the detuning axis"));
        }
        fidelity.push(row);
    }
    Ok(FidelityTable { detuning_axis, ratio_axis, fidelity })
}

/// Run provenance shared by every JSON document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub version: String,
    /// SHA-256 of the canonical run configuration.
    pub config_hash: String,
}

impl Provenance {
    pub fn new(config_hash: impl Into<String>) -> Self {
        Self { version: ARTIFACT_VERSION.to_owned(), config_hash: config_hash.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    /// Pulse 1, plus the fixed parts of pulse 2 (fwhm, delay, phase).
    pub base: SimConfig,
    /// Fixed integrator step in ps, when fixed stepping is used.
    pub integrator_step_ps: Option<f64>,
    pub normalized: bool,
    pub maximum: Maximum,
    #[serde(flatten)]
    pub provenance: Provenance,
}

/// JSON form of a [`SweepResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepDocument {
    pub detuning_axis: Vec<f64>,
    pub ratio_axis: Vec<f64>,
    pub fidelity: Vec<Vec<f64>>,
    pub metadata: SweepMetadata,
}

impl SweepDocument {
    pub fn new(result: &SweepResult, provenance: Provenance) -> Self {
        let integrator_step_ps = match result.grid.base.stepping {
            Stepping::Fixed { step } => Some(step),
            Stepping::Adaptive { .. } => None,
        };
        Self {
            detuning_axis: result.grid.detuning_axis.clone(),
            ratio_axis: result.grid.ratio_axis.clone(),
            fidelity: result.fidelity.clone(),
            metadata: SweepMetadata {
                base: result.grid.base,
                integrator_step_ps,
                normalized: result.normalized,
                maximum: find_maximum(result),
                provenance,
            },
        }
    }

    pub fn to_result(&self) -> SweepResult {
        SweepResult {
            grid: SweepGrid {
                detuning_axis: self.detuning_axis.clone(),
                ratio_axis: self.ratio_axis.clone(),
                base: self.metadata.base,
            },
            fidelity: self.fidelity.clone(),
            normalized: self.metadata.normalized,
        }
    }
}

/// JSON output of the optimiser.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeDocument {
    pub seed_detuning: f64,
    pub seed_ratio: f64,
    /// Grid maximum the seed came from, if it was taken from a sweep.
    pub grid_maximum: Option<Maximum>,
    pub detuning: f64,
    pub ratio: f64,
    pub fidelity: f64,
    pub seed_fidelity: f64,
    pub evaluations: usize,
    pub truncated: bool,
    pub scaling: RefineScaling,
    pub base: SimConfig,
    #[serde(flatten)]
    pub provenance: Provenance,
}

impl OptimizeDocument {
    pub fn new(seed: (f64, f64), grid_maximum: Option<Maximum>, refined: &Refined, base: SimConfig, provenance: Provenance) -> Self {
        Self {
            seed_detuning: seed.0,
            seed_ratio: seed.1,
            grid_maximum,
            detuning: refined.detuning,
            ratio: refined.ratio,
            fidelity: refined.fidelity,
            seed_fidelity: refined.seed_fidelity,
            evaluations: refined.evaluations,
            truncated: refined.truncated,
            scaling: refined.scaling,
            base,
            provenance,
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::parse("json", e))?;
    s.push('\n');
    Ok(s)
}

pub fn from_json<T: for<'de> Deserialize<'de>>(s: &str) -> Result<T> {
    serde_json::from_str(s).map_err(|e| Error::parse("json", e))
}

/// 8-bit binary PGM (P5). Rows run from the largest ratio at the top to the
/// smallest at the bottom; pixel = round(255·fidelity).
pub fn sweep_pgm(result: &SweepResult) -> Vec<u8> {
    let (rows, cols) = result.grid.shape();
    let mut out = format!("P5\n{cols} {rows}\n255\n").into_bytes();
    let top_is_last = result.grid.ratio_axis.first() < result.grid.ratio_axis.last();
    let order: Vec<usize> = if top_is_last { (0..rows).rev().collect() } else { (0..rows).collect() };
    for i in order {
        out.extend(result.fidelity[i].iter().map(|&f| (255.0 * f.clamp(0.0, 1.0)).round() as u8));
    }
    out
}

/// Width, height and pixels of a binary PGM written by [`sweep_pgm`].
pub fn parse_pgm(bytes: &[u8]) -> Result<(usize, usize, Vec<u8>)> {
    let what = "pgm";
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::parse(what, "truncated header"));
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|e| Error::parse(what, e))?.to_owned());
    }
    if fields[0] != "P5" || fields[3] != "255" {
        return Err(Error::parse(what, "expected an 8-bit P5 image"));
    }
    let width: usize = fields[1].parse().map_err(|e| Error::parse(what, e))?;
    let height: usize = fields[2].parse().map_err(|e| Error::parse(what, e))?;
    let pixels = bytes.get(pos + 1..).unwrap_or_default().to_vec();
    if pixels.len() != width * height {
        return Err(Error::parse(what, format!("expected {} pixels, found {}", width * height, pixels.len())));
    }
    Ok((width, height, pixels))
}

/// Reads either time tags (`delay_ps`) or pre-binned counts
/// (`bin_start_ps,count`). Time tags are binned at `bin_width` ps.
pub fn read_histogram_csv<R: Read>(input: R, bin_width: f64, rep_period_ns: f64) -> Result<CorrelationHistogram> {
    let what = "histogram csv";
    let mut r = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(input);
    let header: Vec<String> = r.headers().map_err(|e| csv_err(what, e))?.iter().map(str::to_owned).collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    match header.as_slice() {
        ["delay_ps"] => {
            let events = r
                .records()
                .map(|rec| parse_f64(what, rec.map_err(|e| csv_err(what, e))?.get(0).unwrap_or("")))
                .collect::<Result<Vec<_>>>()?;
            Ok(crate::photonstats::bin_timetags(&events, bin_width)?.with_rep_period(rep_period_ns))
        }
        ["bin_start_ps", "count"] => {
            let mut starts = Vec::new();
            let mut counts = Vec::new();
            for rec in r.records() {
                let rec = rec.map_err(|e| csv_err(what, e))?;
                starts.push(parse_f64(what, rec.get(0).unwrap_or(""))?);
                let c = rec.get(1).unwrap_or("");
                counts.push(c.parse::<u64>().map_err(|e| Error::parse(what, format!("count {c:?}: {e}")))?);
            }
            CorrelationHistogram::from_bins(&starts, counts, rep_period_ns)
        }
        other => Err(Error::parse(what, format!("unrecognised header {other:?}"))),
    }
}

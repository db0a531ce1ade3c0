//! Correlation-histogram analysis: g²(0) (raw and background-corrected) and
//! Hong–Ou–Mandel visibility.
//!
//! Histogram bins are in ps, analysis windows and peak spacings in ns. A bin
//! that straddles a window edge contributes in proportion to its overlap, so
//! results do not depend on the bin phase.
//!
//! The corrected-g² error, `A_center,raw / A_side,raw²`, is applied as
//! published. It is not a propagated uncertainty (its units are 1/counts),
//! but it is what the reference analysis reports, so it is kept unchanged.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const PS_PER_NS: f64 = 1000.0;

/// Binned coincidence counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationHistogram {
    /// Bin width in ps.
    pub bin_width: f64,
    pub counts: Vec<u64>,
    /// Start of bin 0 relative to zero delay, in ps.
    pub t0_offset: f64,
    /// Spacing between correlation peaks in ns; zero until set.
    pub rep_period: f64,
}

impl CorrelationHistogram {
    pub fn new(bin_width: f64, counts: Vec<u64>, t0_offset: f64, rep_period: f64) -> Result<Self> {
        let hist = Self { bin_width, counts, t0_offset, rep_period };
        if !(bin_width > 0.0 && bin_width.is_finite()) {
            return Err(Error::domain(format!("bin width must be positive, got {bin_width}")));
        }
        if !t0_offset.is_finite() || !(rep_period >= 0.0 && rep_period.is_finite()) {
            return Err(Error::domain("histogram offset and repetition period must be finite"));
        }
        Ok(hist)
    }

    /// Builds a histogram from uniformly spaced bin start times (ps).
    pub fn from_bins(bin_starts: &[f64], counts: Vec<u64>, rep_period: f64) -> Result<Self> {
        if bin_starts.len() != counts.len() {
            return Err(Error::domain("bin starts and counts differ in length"));
        }
        if bin_starts.len() < 2 {
            return Err(Error::domain("need at least two bins to infer the bin width"));
        }
        let width = bin_starts[1] - bin_starts[0];
        let uniform = bin_starts
            .windows(2)
            .all(|w| ((w[1] - w[0]) - width).abs() <= 1e-9 * width.abs().max(1.0));
        if !uniform {
            return Err(Error::domain("bin starts are not uniformly spaced"));
        }
        Self::new(width, counts, bin_starts[0], rep_period)
    }

    pub fn with_rep_period(mut self, rep_period_ns: f64) -> Self {
        self.rep_period = rep_period_ns;
        self
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Start of bin `k` in ps.
    pub fn bin_start(&self, k: usize) -> f64 {
        self.t0_offset + k as f64 * self.bin_width
    }

    /// Covered delay range in ps.
    pub fn span(&self) -> (f64, f64) {
        (self.t0_offset, self.bin_start(self.counts.len()))
    }

    /// Counts inside `[center − width/2, center + width/2]` (ps), with
    /// fractional weight for partially covered bins.
    pub fn window_area(&self, center: f64, width: f64) -> f64 {
        let lo = center - 0.5 * width;
        let hi = center + 0.5 * width;
        let n = self.counts.len();
        if n == 0 || hi <= lo {
            return 0.0;
        }
        let first = ((lo - self.t0_offset) / self.bin_width).floor().max(0.0) as usize;
        let last = (((hi - self.t0_offset) / self.bin_width).ceil().max(0.0) as usize).min(n);
        let mut area = 0.0;
        for k in first..last {
            let b_lo = self.bin_start(k);
            let b_hi = b_lo + self.bin_width;
            if b_lo >= lo && b_hi <= hi {
                area += self.counts[k] as f64;
                continue;
            }
            let overlap = hi.min(b_hi) - lo.max(b_lo);
            if overlap > 0.0 {
                area += self.counts[k] as f64 * (overlap / self.bin_width).min(1.0);
            }
        }
        area
    }

    fn covers(&self, center: f64, width: f64) -> bool {
        let (lo, hi) = self.span();
        let tol = 1e-9 * self.bin_width;
        center - 0.5 * width >= lo - tol && center + 0.5 * width <= hi + tol
    }

    /// Centre (ps) of the highest bin within ±rep/4 of `nominal`; ties go to
    /// the bin closest to `nominal`. Falls back to `nominal` when the search
    /// range is empty or holds no counts.
    fn locate_peak(&self, nominal: f64) -> f64 {
        let reach = 0.25 * self.rep_period * PS_PER_NS;
        let mut best: Option<(u64, f64)> = None;
        for (k, &c) in self.counts.iter().enumerate() {
            let mid = self.bin_start(k) + 0.5 * self.bin_width;
            if (mid - nominal).abs() > reach {
                continue;
            }
            let better = match best {
                None => true,
                Some((bc, bm)) => c > bc || (c == bc && (mid - nominal).abs() < (bm - nominal).abs()),
            };
            if better {
                best = Some((c, mid));
            }
        }
        match best {
            Some((c, mid)) if c > 0 => mid,
            _ => nominal,
        }
    }
}

/// Histogram of time tags (ps) with bins `[t0 + k·w, t0 + (k+1)·w)`, where
/// `t0` is the earliest tag rounded down to a multiple of the bin width.
pub fn bin_timetags(events: &[f64], bin_width: f64) -> Result<CorrelationHistogram> {
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(Error::domain(format!("bin width must be positive, got {bin_width}")));
    }
    if events.iter().any(|e| !e.is_finite()) {
        return Err(Error::domain("time tags must be finite"));
    }
    if events.is_empty() {
        return CorrelationHistogram::new(bin_width, Vec::new(), 0.0, 0.0);
    }
    let min = events.iter().copied().fold(f64::INFINITY, f64::min);
    let t0 = (min / bin_width).floor() * bin_width;
    let index = |e: f64| ((e - t0) / bin_width).floor().max(0.0) as usize;
    let n = events.iter().map(|&e| index(e)).max().unwrap_or(0) + 1;
    let mut counts = vec![0u64; n];
    for &e in events {
        counts[index(e)] += 1;
    }
    CorrelationHistogram::new(bin_width, counts, t0, 0.0)
}

/// How peak centres are placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeakLocation {
    /// Highest bin within ±rep/4 of the nominal position.
    #[default]
    Search,
    /// Exactly at multiples of the peak spacing.
    Nominal,
}

/// Integration windows, in ns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    /// Full width of each peak window.
    pub peak_window: f64,
    /// Full width of each inter-peak background region.
    pub background_window: f64,
    /// Side peaks used for g², split evenly between both sides.
    pub n_side_peaks: usize,
    #[serde(default)]
    pub location: PeakLocation,
}

impl WindowSpec {
    /// 6 ns peak windows, 4.5 ns background regions, three side peaks per side.
    pub fn g2_default() -> Self {
        Self { peak_window: 6.0, background_window: 4.5, n_side_peaks: 6, location: PeakLocation::Search }
    }

    /// HOM windows for a given peak spacing: each window spans half the
    /// distance between the two peaks neighbouring the centre, i.e. one spacing.
    pub fn hom_default(peak_spacing_ns: f64) -> Self {
        Self { peak_window: peak_spacing_ns, background_window: 0.0, n_side_peaks: 2, location: PeakLocation::Search }
    }

    pub fn with_location(mut self, location: PeakLocation) -> Self {
        self.location = location;
        self
    }

    fn validate(&self, hist: &CorrelationHistogram, needs_background: bool) -> Result<()> {
        if !(hist.rep_period > 0.0) {
            return Err(Error::domain("histogram repetition period is not set"));
        }
        if !(self.peak_window > 0.0 && self.peak_window.is_finite()) {
            return Err(Error::domain("peak window must be positive"));
        }
        if self.peak_window > hist.rep_period {
            return Err(Error::domain(format!(
                "peak window {} ns exceeds the peak spacing {} ns",
                self.peak_window, hist.rep_period
            )));
        }
        if needs_background {
            if !(self.background_window > 0.0 && self.background_window.is_finite()) {
                return Err(Error::domain("background window must be positive"));
            }
            if self.peak_window + self.background_window > hist.rep_period {
                return Err(Error::domain("background regions overlap the peak windows"));
            }
        }
        Ok(())
    }

    fn side_peaks_per_side(&self) -> Result<i64> {
        if self.n_side_peaks == 0 || self.n_side_peaks % 2 != 0 {
            return Err(Error::domain(format!(
                "n_side_peaks must be a positive even number, got {}",
                self.n_side_peaks
            )));
        }
        Ok((self.n_side_peaks / 2) as i64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatFlag {
    /// The centre peak holds no counts.
    ZeroCenterCount,
    /// Background subtraction drove an area negative; it was clamped to zero.
    ClampedNegative,
    /// The background-corrected reference area vanished; the ratio is 0/0.
    Degenerate,
}

/// Windows actually used, for the output record.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct WindowsUsed {
    pub peak_window_ns: f64,
    pub background_window_ns: Option<f64>,
    pub peak_centers_ns: Vec<f64>,
    pub background_centers_ns: Vec<f64>,
    pub jitter_ps: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatResult {
    pub value: f64,
    pub error_low: f64,
    pub error_high: f64,
    pub windows_used: WindowsUsed,
    pub flags: Vec<StatFlag>,
}

struct PeakAreas {
    centers: Vec<f64>,
    center: f64,
    sides: Vec<f64>,
}

fn peak_centers(hist: &CorrelationHistogram, win: &WindowSpec, per_side: i64) -> Vec<f64> {
    let spacing = hist.rep_period * PS_PER_NS;
    (-per_side..=per_side)
        .map(|n| {
            let nominal = n as f64 * spacing;
            match win.location {
                PeakLocation::Nominal => nominal,
                PeakLocation::Search => hist.locate_peak(nominal),
            }
        })
        .collect()
}

fn g2_areas(hist: &CorrelationHistogram, win: &WindowSpec) -> Result<PeakAreas> {
    let per_side = win.side_peaks_per_side()?;
    let width = win.peak_window * PS_PER_NS;
    let centers = peak_centers(hist, win, per_side);
    if let Some(c) = centers.iter().find(|&&c| !hist.covers(c, width)) {
        return Err(Error::domain(format!("histogram does not cover the peak window at {:.1} ps", c)));
    }
    let mid = per_side as usize;
    let center = hist.window_area(centers[mid], width);
    let sides = centers
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != mid)
        .map(|(_, &c)| hist.window_area(c, width))
        .collect();
    Ok(PeakAreas { centers, center, sides })
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn to_ns(ps: &[f64]) -> Vec<f64> {
    ps.iter().map(|v| v / PS_PER_NS).collect()
}

/// Raw g²(0): centre-peak area over the mean side-peak area, with the
/// Poissonian standard error `value / √A_center`.
pub fn g2_raw(hist: &CorrelationHistogram, win: &WindowSpec) -> Result<StatResult> {
    win.validate(hist, false)?;
    let areas = g2_areas(hist, win)?;
    let side = mean(&areas.sides);
    if !(side > 0.0) {
        return Err(Error::domain("side peaks hold no counts"));
    }
    let windows_used = WindowsUsed {
        peak_window_ns: win.peak_window,
        peak_centers_ns: to_ns(&areas.centers),
        ..Default::default()
    };
    if areas.center == 0.0 {
        return Ok(StatResult {
            value: 0.0,
            error_low: 0.0,
            error_high: 0.0,
            windows_used,
            flags: vec![StatFlag::ZeroCenterCount],
        });
    }
    let value = areas.center / side;
    let error = value / areas.center.sqrt();
    Ok(StatResult { value, error_low: error, error_high: error, windows_used, flags: Vec::new() })
}

/// Background-corrected g²(0). The mean count density of the inter-peak
/// regions, scaled to the peak window, is subtracted from every peak area.
pub fn g2_corrected(hist: &CorrelationHistogram, win: &WindowSpec) -> Result<StatResult> {
    win.validate(hist, true)?;
    let areas = g2_areas(hist, win)?;
    let peak_width = win.peak_window * PS_PER_NS;
    let bg_width = win.background_window * PS_PER_NS;
    let bg_centers: Vec<f64> = areas.centers.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    if let Some(c) = bg_centers.iter().find(|&&c| !hist.covers(c, bg_width)) {
        return Err(Error::domain(format!("histogram does not cover the background region at {:.1} ps", c)));
    }
    let bg_areas: Vec<f64> = bg_centers.iter().map(|&c| hist.window_area(c, bg_width)).collect();
    let background = mean(&bg_areas) / bg_width * peak_width;

    let raw_side = mean(&areas.sides);
    if !(raw_side > 0.0) {
        return Err(Error::domain("side peaks hold no counts"));
    }
    let mut flags = Vec::new();
    let mut subtract = |a: f64| {
        let v = a - background;
        if v < 0.0 {
            if !flags.contains(&StatFlag::ClampedNegative) {
                flags.push(StatFlag::ClampedNegative);
            }
            0.0
        } else {
            v
        }
    };
    let center = subtract(areas.center);
    let sides: Vec<f64> = areas.sides.iter().map(|&a| subtract(a)).collect();
    let side = mean(&sides);
    let error = areas.center / (raw_side * raw_side);
    if areas.center == 0.0 {
        flags.push(StatFlag::ZeroCenterCount);
    }
    // Rounding in the window integrals leaves a few ulps behind on a pure
    // background; treat that as zero.
    let value = if side <= 1e-12 * raw_side {
        flags.push(StatFlag::Degenerate);
        0.0
    } else {
        center / side
    };
    Ok(StatResult {
        value,
        error_low: error,
        error_high: error,
        windows_used: WindowsUsed {
            peak_window_ns: win.peak_window,
            background_window_ns: Some(win.background_window),
            peak_centers_ns: to_ns(&areas.centers),
            background_centers_ns: to_ns(&bg_centers),
            jitter_ps: None,
        },
        flags,
    })
}

fn visibility(center: f64, left: f64, right: f64) -> Result<f64> {
    let sum = left + right;
    if !(sum > 0.0) {
        return Err(Error::domain("HOM side peaks hold no counts"));
    }
    Ok(1.0 - 2.0 * center / sum)
}

/// HOM visibility `1 − 2A_center/(A_left + A_right)` from the centre peak
/// and its two neighbours, spaced by the histogram's peak spacing.
///
/// The error bounds are the envelope of the Poissonian standard error and
/// the shifts obtained by widening and narrowing every window by `jitter` ps.
pub fn hom_visibility(hist: &CorrelationHistogram, win: &WindowSpec, jitter: f64) -> Result<StatResult> {
    win.validate(hist, false)?;
    if !(jitter >= 0.0 && jitter.is_finite()) {
        return Err(Error::domain("jitter must be non-negative"));
    }
    let width = win.peak_window * PS_PER_NS;
    if jitter >= width {
        return Err(Error::domain("jitter must be smaller than the peak window"));
    }
    let centers = peak_centers(hist, win, 1);
    if let Some(c) = centers.iter().find(|&&c| !hist.covers(c, width + jitter)) {
        return Err(Error::domain(format!("histogram does not cover the HOM window at {:.1} ps", c)));
    }
    let areas = |w: f64| -> (f64, f64, f64) {
        (hist.window_area(centers[1], w), hist.window_area(centers[0], w), hist.window_area(centers[2], w))
    };
    let (center, left, right) = areas(width);
    let value = visibility(center, left, right)?;

    let sum = left + right;
    let poisson = (4.0 * center / (sum * sum) + 4.0 * center * center / (sum * sum * sum)).sqrt();
    let mut up: f64 = 0.0;
    let mut down: f64 = 0.0;
    for w in [width + jitter, width - jitter] {
        let (c, l, r) = areas(w);
        let shifted = visibility(c, l, r)?;
        up = up.max(shifted - value);
        down = down.max(value - shifted);
    }
    let mut flags = Vec::new();
    if center == 0.0 {
        flags.push(StatFlag::ZeroCenterCount);
    }
    Ok(StatResult {
        value,
        error_low: poisson.max(down),
        error_high: poisson.max(up),
        windows_used: WindowsUsed {
            peak_window_ns: win.peak_window,
            background_window_ns: None,
            peak_centers_ns: to_ns(&centers),
            background_centers_ns: Vec::new(),
            jitter_ps: Some(jitter),
        },
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Histogram with 100 ps bins spanning ±`half_span_ns`, all zero.
    fn blank(half_span_ns: f64, rep_ns: f64) -> CorrelationHistogram {
        let n = (2.0 * half_span_ns * 10.0).round() as usize;
        CorrelationHistogram::new(100.0, vec![0; n], -half_span_ns * PS_PER_NS, rep_ns).unwrap()
    }

    /// Puts `count` into the bin whose centre sits at `t_ps` ± 50 ps.
    fn put(h: &mut CorrelationHistogram, t_ps: f64, count: u64) {
        let k = ((t_ps - h.t0_offset) / h.bin_width).floor() as usize;
        h.counts[k] += count;
    }

    /// g² fixture: peaks every 12.5 ns, all counts of a peak in the bin
    /// starting at its nominal position.
    fn g2_fixture(center: u64, side: u64) -> CorrelationHistogram {
        let mut h = blank(45.0, 12.5);
        put(&mut h, 0.0, center);
        for n in [-3.0, -2.0, -1.0, 1.0, 2.0, 3.0] {
            put(&mut h, n * 12_500.0, side);
        }
        h
    }

    fn nominal_g2() -> WindowSpec {
        WindowSpec::g2_default().with_location(PeakLocation::Nominal)
    }

    #[test]
    fn bin_small_example() {
        let h = bin_timetags(&[50.0, 150.0, 151.0], 100.0).unwrap();
        assert_eq!(h.counts, vec![1, 2]);
        assert_eq!(h.t0_offset, 0.0);
    }

    #[test]
    fn bin_single_bin_and_empty() {
        let h = bin_timetags(&[1210.0, 1250.5, 1299.9], 100.0).unwrap();
        assert_eq!(h.counts, vec![3]);
        assert_eq!(h.t0_offset, 1200.0);
        let h = bin_timetags(&[], 100.0).unwrap();
        assert!(h.counts.is_empty());
        assert!(bin_timetags(&[1.0], 0.0).is_err());
    }

    #[test]
    fn bin_matches_brute_force_recount() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let events: Vec<f64> = (0..10_000).map(|_| rng.gen_range(-20_000.0..20_000.0)).collect();
        let h = bin_timetags(&events, 100.0).unwrap();
        for (k, &c) in h.counts.iter().enumerate() {
            let lo = h.bin_start(k);
            let hi = lo + 100.0;
            let direct = events.iter().filter(|&&e| e >= lo && e < hi).count() as u64;
            assert_eq!(c, direct, "bin {k}");
        }
        assert_eq!(h.total(), 10_000);
    }

    #[test]
    fn window_area_fractional() {
        let h = CorrelationHistogram::new(100.0, vec![10, 10, 10], 0.0, 1.0).unwrap();
        assert_eq!(h.window_area(150.0, 100.0), 10.0);
        assert!((h.window_area(100.0, 100.0) - 10.0).abs() < 1e-12);
        assert!((h.window_area(25.0, 50.0) - 5.0).abs() < 1e-12);
        assert_eq!(h.window_area(150.0, 1000.0), 30.0);
    }

    #[test]
    fn from_bins_checks_spacing() {
        let h = CorrelationHistogram::from_bins(&[-100.0, 0.0, 100.0], vec![1, 2, 3], 12.5).unwrap();
        assert_eq!(h.bin_width, 100.0);
        assert_eq!(h.t0_offset, -100.0);
        assert!(CorrelationHistogram::from_bins(&[0.0, 100.0, 250.0], vec![1, 2, 3], 12.5).is_err());
    }

    #[test]
    fn g2_poissonian_reference() {
        let r = g2_raw(&g2_fixture(1000, 1000), &nominal_g2()).unwrap();
        assert_eq!(r.value, 1.0);
    }

    #[test]
    fn g2_zero_center() {
        let r = g2_raw(&g2_fixture(0, 1000), &nominal_g2()).unwrap();
        assert_eq!((r.value, r.error_low, r.error_high), (0.0, 0.0, 0.0));
        assert_eq!(r.flags, vec![StatFlag::ZeroCenterCount]);
    }

    #[test]
    fn g2_raw_fixture() {
        let r = g2_raw(&g2_fixture(33, 1000), &nominal_g2()).unwrap();
        assert!((r.value - 0.033).abs() < 1e-15);
        assert!((r.error_high - 0.033 / 33f64.sqrt()).abs() < 1e-15);
        assert_eq!(r.error_low, r.error_high);
    }

    #[test]
    fn g2_raw_search_mode_finds_offset_peaks() {
        let mut h = blank(45.0, 12.5);
        for n in -3..=3 {
            put(&mut h, n as f64 * 12_500.0 + 800.0, if n == 0 { 33 } else { 1000 });
        }
        let r = g2_raw(&h, &WindowSpec::g2_default()).unwrap();
        assert!((r.value - 0.033).abs() < 1e-15);
        assert!((r.windows_used.peak_centers_ns[3] - 0.85).abs() < 1e-12);
    }

    #[test]
    fn g2_raw_needs_side_counts() {
        assert!(matches!(g2_raw(&g2_fixture(5, 0), &nominal_g2()), Err(Error::Domain(_))));
    }

    #[test]
    fn g2_requires_rep_period_and_coverage() {
        let h = g2_fixture(33, 1000).with_rep_period(0.0);
        assert!(g2_raw(&h, &nominal_g2()).is_err());
        let short = CorrelationHistogram::new(100.0, vec![1; 100], -5000.0, 12.5).unwrap();
        assert!(g2_raw(&short, &nominal_g2()).is_err());
    }

    #[test]
    fn corrected_without_background_equals_raw() {
        let h = g2_fixture(33, 1000);
        let raw = g2_raw(&h, &nominal_g2()).unwrap();
        let corr = g2_corrected(&h, &nominal_g2()).unwrap();
        assert_eq!(raw.value, corr.value);
        assert!((corr.error_high - 33.0 / 1e6).abs() < 1e-18);
        assert!(corr.flags.is_empty());
    }

    #[test]
    fn corrected_removes_flat_pedestal() {
        let mut h = g2_fixture(33, 1000);
        for c in h.counts.iter_mut() {
            *c += 4;
        }
        // Each 6 ns window gathers 60 bins × 4 = 240 pedestal counts.
        let raw = g2_raw(&h, &nominal_g2()).unwrap();
        assert!((raw.value - 273.0 / 1240.0).abs() < 1e-15);
        let corr = g2_corrected(&h, &nominal_g2()).unwrap();
        assert!((corr.value - 0.033).abs() < 1e-14, "{}", corr.value);
        assert!((corr.error_high - 273.0 / (1240.0 * 1240.0)).abs() < 1e-15);
    }

    #[test]
    fn corrected_uniform_histogram_is_degenerate() {
        let mut h = blank(45.0, 12.5);
        for c in h.counts.iter_mut() {
            *c = 7;
        }
        let corr = g2_corrected(&h, &nominal_g2()).unwrap();
        assert!(corr.flags.contains(&StatFlag::Degenerate));
        assert_eq!(corr.value, 0.0);
    }

    #[test]
    fn corrected_clamps_negative_areas() {
        let mut h = g2_fixture(0, 1000);
        // Background only between peaks, so the empty centre goes negative.
        for n in [-2.5, -1.5, -0.5, 0.5, 1.5, 2.5] {
            put(&mut h, n * 12_500.0, 450);
        }
        let corr = g2_corrected(&h, &nominal_g2()).unwrap();
        assert!(corr.flags.contains(&StatFlag::ClampedNegative));
        assert_eq!(corr.value, 0.0);
    }

    #[test]
    fn corrected_rejects_overlapping_windows() {
        let win = WindowSpec { peak_window: 9.0, ..nominal_g2() };
        assert!(g2_corrected(&g2_fixture(1, 1), &win).is_err());
    }

    fn hom_fixture(center: u64, left: u64, right: u64) -> CorrelationHistogram {
        let mut h = blank(10.0, 3.3);
        put(&mut h, -3300.0, left);
        put(&mut h, 0.0, center);
        put(&mut h, 3300.0, right);
        h
    }

    fn hom_win() -> WindowSpec {
        WindowSpec::hom_default(3.3).with_location(PeakLocation::Nominal)
    }

    #[test]
    fn hom_perfect_and_distinguishable() {
        let r = hom_visibility(&hom_fixture(0, 500, 700), &hom_win(), 150.0).unwrap();
        assert_eq!(r.value, 1.0);
        let r = hom_visibility(&hom_fixture(600, 500, 700), &hom_win(), 150.0).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn hom_fixture_value() {
        let r = hom_visibility(&hom_fixture(561, 1000, 1000), &hom_win(), 150.0).unwrap();
        assert!((r.value - 0.439).abs() < 1e-15);
        let sum: f64 = 2000.0;
        let poisson = (4.0 * 561.0 / (sum * sum) + 4.0 * 561.0f64.powi(2) / sum.powi(3)).sqrt();
        // Point-like peaks: the jitter-shifted windows see the same areas.
        assert!((r.error_low - poisson).abs() < 1e-15);
        assert!((r.error_high - poisson).abs() < 1e-15);
    }

    #[test]
    fn hom_jitter_widens_errors() {
        let mut h = hom_fixture(300, 1000, 1000);
        // Counts in the bin [1500, 1600) ps: fully inside the nominal and the
        // widened centre window, 75 % inside the narrowed one.
        put(&mut h, 1500.0, 400);
        let r = hom_visibility(&h, &hom_win(), 150.0).unwrap();
        assert!(r.error_high > r.error_low);
    }

    #[test]
    fn hom_zero_sides_is_domain_error() {
        assert!(matches!(hom_visibility(&hom_fixture(5, 0, 0), &hom_win(), 150.0), Err(Error::Domain(_))));
    }

    #[test]
    fn g2_poisson_process_tends_to_one() {
        use rand_distr::{Distribution, Poisson};
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let rate = Poisson::new(2000.0).unwrap();
        let mut h = blank(45.0, 12.5);
        for n in -3..=3 {
            put(&mut h, n as f64 * 12_500.0, rate.sample(&mut rng) as u64);
        }
        let r = g2_raw(&h, &nominal_g2()).unwrap();
        // 3σ band from the standard error.
        assert!((r.value - 1.0).abs() < 3.0 * r.error_high * (1.0 + 1.0 / 6f64.sqrt()), "{r:?}");
    }

    proptest! {
        #[test]
        fn binning_conserves_events(events in proptest::collection::vec(-1e6f64..1e6, 0..500), width in 1.0f64..500.0) {
            let h = bin_timetags(&events, width).unwrap();
            prop_assert_eq!(h.total() as usize, events.len());
        }

        #[test]
        fn g2_scale_invariance(center in 1u64..500, side in 1u64..2000, s in 1u64..20) {
            let base = g2_raw(&g2_fixture(center, side), &nominal_g2()).unwrap();
            let scaled = g2_raw(&g2_fixture(center * s, side * s), &nominal_g2()).unwrap();
            prop_assert!((base.value - scaled.value).abs() <= 1e-14 * base.value);
            let expected = base.error_high / (s as f64).sqrt();
            prop_assert!((scaled.error_high - expected).abs() <= 1e-12 * expected);
        }

        #[test]
        fn hom_left_right_exchange(c in 0u64..2000, l in 0u64..2000, r in 1u64..2000) {
            let a = hom_visibility(&hom_fixture(c, l, r), &hom_win(), 150.0).unwrap();
            let b = hom_visibility(&hom_fixture(c, r, l), &hom_win(), 150.0).unwrap();
            prop_assert_eq!(a.value, b.value);
            prop_assert_eq!(a.error_low, b.error_low);
            prop_assert_eq!(a.error_high, b.error_high);
        }
    }
}

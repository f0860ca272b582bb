//! Quantitative signatures of computed spectra: fringe peaks, angular harmonics
//! on rings, vortex chirality, rotation between spectra, and the comparison of
//! axis fringes against the Ramsey prediction.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dhw::SolverSettings;
use crate::field::FieldConfig;
use crate::semiclassical::ramsey_peak;
use crate::sweep::{self, Axis, SliceSpec, SpectrumGrid, SweepError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("slice is empty")]
    EmptySlice,
    #[error("slice needs at least 5 samples, got {0}")]
    SliceTooShort(usize),
    #[error("slice is not sorted by momentum")]
    UnsortedSlice,
    #[error("ring of radius {0} leaves the grid")]
    RadiusOutsideGrid(f64),
    #[error("need at least {needed} radii, got {got}")]
    TooFewRadii { needed: usize, got: usize },
    #[error("angular profile is flat; rotation undefined")]
    FlatProfile,
    #[error("spectra are on different grids")]
    GridMismatch,
    #[error("spectrum has no positive values")]
    EmptySpectrum,
    #[error("expected {expected} fringe peaks, found {} at {found:?}", found.len())]
    PeakCountMismatch { expected: usize, found: Vec<f64> },
    #[error("Ramsey comparison needs co-rotating pulses with T > 0")]
    NotRamseyConfig,
    #[error(transparent)]
    Sweep(#[from] SweepError),
}

/// Default prominence threshold as a fraction of the slice maximum.
pub const DEFAULT_MIN_PROMINENCE: f64 = 1e-3;

/// Default number of samples on a ring.
pub const DEFAULT_RING_SAMPLES: usize = 256;

/// Harmonics weaker than this fraction of the DC term count as "no pattern".
pub const DOMINANCE_FLOOR: f64 = 0.05;

/// Least phase advance (radians) of the dominant harmonic across the analysed
/// radii for the pattern to count as a spiral rather than rings or lobes.
pub const MIN_WINDING: f64 = PI / 2.0;

/// Sign of `d arg(c_k) / dq` for a counterclockwise vortex.
///
/// Calibrated on synthetic envelopes `1 + cos(theta0(q) - 2 ell phi)` (the LRCP
/// shape, whose fringes wind counterclockwise outwards): there `arg c_k = -theta0(q)`
/// decreases with q. Simulated spectra never recalibrate this.
pub const CCW_PHASE_SLOPE_SIGN: f64 = -1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub q: f64,
    pub f: f64,
    pub prominence: f64,
}

/// Interior local maxima with prominence at least `min_prominence_frac * max(f)`,
/// refined by a three-point parabola. Sorted ascending in `q`.
pub fn find_peaks(slice: &[(f64, f64)], min_prominence_frac: f64) -> Result<Vec<Peak>, AnalysisError> {
    if slice.is_empty() {
        return Err(AnalysisError::EmptySlice);
    }
    if slice.len() < 5 {
        return Err(AnalysisError::SliceTooShort(slice.len()));
    }
    if slice.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(AnalysisError::UnsortedSlice);
    }
    let f: Vec<f64> = slice.iter().map(|p| p.1).collect();
    let fmax = f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let threshold = min_prominence_frac * fmax;
    let n = f.len();
    let mut peaks = Vec::new();
    for i in 1..n - 1 {
        if !(f[i] > f[i - 1] && f[i] >= f[i + 1]) {
            continue;
        }
        let prominence = prominence_at(&f, i);
        if prominence < threshold {
            continue;
        }
        let (q, fv) = parabola_vertex(slice[i - 1], slice[i], slice[i + 1]).unwrap_or(slice[i]);
        peaks.push(Peak { q, f: fv, prominence });
    }
    Ok(peaks)
}

fn prominence_at(f: &[f64], i: usize) -> f64 {
    let peak = f[i];
    let mut left_min = peak;
    for j in (0..i).rev() {
        if f[j] > peak {
            break;
        }
        left_min = left_min.min(f[j]);
    }
    let mut right_min = peak;
    for &v in &f[i + 1..] {
        if v > peak {
            break;
        }
        right_min = right_min.min(v);
    }
    peak - left_min.max(right_min)
}

/// Vertex of the parabola through three points, if concave.
fn parabola_vertex(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> Option<(f64, f64)> {
    let (x0, y0) = a;
    let (x1, y1) = b;
    let (x2, y2) = c;
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let curv = (d12 - d01) / (x2 - x0);
    if !(curv < 0.0) {
        return None;
    }
    // y = y1 + d01 (x - x1) + curv (x - x1)(x - x0)
    let xv = 0.5 * (x0 + x1) - d01 / (2.0 * curv);
    if !(x0..=x2).contains(&xv) {
        return None;
    }
    let yv = y1 + d01 * (xv - x1) + curv * (xv - x1) * (xv - x0);
    Some((xv, yv))
}

/// `f` sampled on the circle `|q| = radius` at `n_samples` uniform azimuths in `[0, 2 pi)`.
pub fn angular_profile(spec: &SpectrumGrid, radius: f64, n_samples: usize) -> Result<Vec<f64>, AnalysisError> {
    (0..n_samples)
        .map(|i| {
            let phi = 2.0 * PI * i as f64 / n_samples as f64;
            spec.interpolate(radius * phi.cos(), radius * phi.sin())
                .ok_or(AnalysisError::RadiusOutsideGrid(radius))
        })
        .collect()
}

/// Normalized DFT `c_k = (1/n) sum_j f_j exp(-i k phi_j)` for `k = 0..=n/2`.
pub fn angular_harmonics(profile: &[f64]) -> Vec<Complex64> {
    let n = profile.len();
    let mut buf: Vec<Complex64> = profile.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf.truncate(n / 2 + 1);
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|c| *c *= scale);
    buf
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Chirality {
    Counterclockwise,
    Clockwise,
    None,
}

impl fmt::Display for Chirality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Chirality::Counterclockwise => "counterclockwise",
            Chirality::Clockwise => "clockwise",
            Chirality::None => "none",
        })
    }
}

/// Harmonic content of one ring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RingHarmonics {
    pub radius: f64,
    pub amplitudes: Vec<f64>,
    pub dominant: usize,
    /// `d arg(c_k) / dq` of the overall dominant harmonic at this radius.
    pub phase_slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VortexSignature {
    /// Index of the strongest non-DC harmonic averaged over radii; 0 if none stands out.
    pub dominant_harmonic: usize,
    /// Mean |c_k| over radii, `k = 0..=n/2`.
    pub mean_amplitudes: Vec<f64>,
    /// Dominant amplitude over the next strongest non-DC amplitude.
    pub dominance: f64,
    /// Whether every ring individually has the same dominant harmonic.
    pub consistent: bool,
    pub chirality: Chirality,
    /// Amplitude-weighted mean of `d arg(c_k) / dq`.
    pub phase_slope: f64,
    pub rings: Vec<RingHarmonics>,
}

impl VortexSignature {
    pub fn amplitude(&self, k: usize) -> f64 {
        self.mean_amplitudes.get(k).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicOptions {
    pub n_samples: usize,
    /// Radial half-step for the phase derivative; `None` picks half a grid cell.
    pub phase_step: Option<f64>,
}

impl Default for HarmonicOptions {
    fn default() -> Self {
        Self {
            n_samples: DEFAULT_RING_SAMPLES,
            phase_step: None,
        }
    }
}

fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w == -PI {
        PI
    } else {
        w
    }
}

fn default_phase_step(spec: &SpectrumGrid) -> f64 {
    0.5 * spec.grid.dqx().min(spec.grid.dqy())
}

fn harmonic_at(spec: &SpectrumGrid, radius: f64, k: usize, n_samples: usize) -> Result<Complex64, AnalysisError> {
    let profile = angular_profile(spec, radius, n_samples)?;
    Ok(angular_harmonics(&profile)[k])
}

/// Dominant angular harmonic on several rings and the winding sense of its phase.
pub fn arm_count_and_chirality(
    spec: &SpectrumGrid,
    radii: &[f64],
    opts: &HarmonicOptions,
) -> Result<VortexSignature, AnalysisError> {
    if radii.len() < 3 {
        return Err(AnalysisError::TooFewRadii {
            needed: 3,
            got: radii.len(),
        });
    }
    let n_k = opts.n_samples / 2 + 1;
    let mut per_ring: Vec<Vec<Complex64>> = Vec::with_capacity(radii.len());
    for &r in radii {
        per_ring.push(angular_harmonics(&angular_profile(spec, r, opts.n_samples)?));
    }
    let mut mean_amplitudes = vec![0.0; n_k];
    for h in &per_ring {
        for (k, c) in h.iter().enumerate() {
            mean_amplitudes[k] += c.norm() / radii.len() as f64;
        }
    }
    let strongest = |amps: &[f64]| {
        (1..amps.len())
            .max_by(|&a, &b| amps[a].total_cmp(&amps[b]))
            .unwrap_or(0)
    };
    let candidate = strongest(&mean_amplitudes);
    let next = (1..n_k)
        .filter(|&k| k != candidate)
        .map(|k| mean_amplitudes[k])
        .fold(0.0, f64::max);
    let dominance = if next > 0.0 {
        mean_amplitudes[candidate] / next
    } else {
        f64::INFINITY
    };
    let has_pattern = candidate > 0 && mean_amplitudes[candidate] >= DOMINANCE_FLOOR * mean_amplitudes[0];

    let step = opts.phase_step.unwrap_or_else(|| default_phase_step(spec));
    let mut rings = Vec::with_capacity(radii.len());
    let mut slope_acc = 0.0;
    let mut weight_acc = 0.0;
    for (&r, h) in radii.iter().zip(&per_ring) {
        let amps: Vec<f64> = h.iter().map(|c| c.norm()).collect();
        let inner = harmonic_at(spec, r - step, candidate, opts.n_samples)?;
        let outer = harmonic_at(spec, r + step, candidate, opts.n_samples)?;
        let slope = wrap_angle(outer.arg() - inner.arg()) / (2.0 * step);
        let w = h[candidate].norm();
        slope_acc += w * slope;
        weight_acc += w;
        rings.push(RingHarmonics {
            radius: r,
            dominant: strongest(&amps),
            amplitudes: amps,
            phase_slope: slope,
        });
    }
    let consistent = rings.iter().all(|r| r.dominant == candidate);
    let phase_slope = if weight_acc > 0.0 { slope_acc / weight_acc } else { 0.0 };

    let span = radii.iter().copied().fold(f64::NEG_INFINITY, f64::max) - radii.iter().copied().fold(f64::INFINITY, f64::min);
    let chirality = if !has_pattern || phase_slope.abs() * span < MIN_WINDING {
        Chirality::None
    } else if phase_slope * CCW_PHASE_SLOPE_SIGN > 0.0 {
        Chirality::Counterclockwise
    } else {
        Chirality::Clockwise
    };
    Ok(VortexSignature {
        dominant_harmonic: if has_pattern { candidate } else { 0 },
        mean_amplitudes,
        dominance,
        consistent,
        chirality,
        phase_slope,
        rings,
    })
}

/// Local fringe pitch `|d phi / d q|` of harmonic `k` around radius `q`.
///
/// The phase of `c_k` is sampled on `2 * half_steps + 1` radii spaced by half a
/// grid cell, unwrapped, and fitted by least squares; the pitch is the slope
/// divided by `k`.
pub fn measure_pitch(spec: &SpectrumGrid, q: f64, k: usize, half_steps: usize) -> Result<f64, AnalysisError> {
    if k == 0 {
        return Err(AnalysisError::FlatProfile);
    }
    let step = default_phase_step(spec);
    let n = 2 * half_steps + 1;
    let mut xs = Vec::with_capacity(n);
    let mut phases: Vec<f64> = Vec::with_capacity(n);
    for i in 0..n {
        let r = q + (i as f64 - half_steps as f64) * step;
        let arg = harmonic_at(spec, r, k, DEFAULT_RING_SAMPLES)?.arg();
        let unwrapped = match phases.last() {
            Some(&prev) => prev + wrap_angle(arg - prev),
            None => arg,
        };
        xs.push(r);
        phases.push(unwrapped);
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = phases.iter().sum::<f64>() / n as f64;
    let sxy: f64 = xs.iter().zip(&phases).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok((sxy / sxx).abs() / k as f64)
}

/// Angle-resolved radial profile: `(r, mean_phi f, max_phi f)` on `n_r` radii in `[0, r_max]`.
pub fn radial_profile(spec: &SpectrumGrid, r_max: f64, n_r: usize, n_phi: usize) -> Result<Vec<(f64, f64, f64)>, AnalysisError> {
    (0..n_r)
        .map(|i| {
            let r = r_max * i as f64 / (n_r - 1) as f64;
            let p = angular_profile(spec, r, n_phi)?;
            let mean = p.iter().sum::<f64>() / n_phi as f64;
            let max = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            Ok((r, mean, max))
        })
        .collect()
}

/// Radial extent of the ring pattern.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingSupport {
    pub q_in: f64,
    pub q_out: f64,
    /// Radius of the largest angle-averaged value.
    pub q_peak: f64,
}

impl RingSupport {
    /// `n` radii evenly spaced strictly inside `(q_in, q_out)`.
    pub fn radii(&self, n: usize) -> Vec<f64> {
        (1..=n)
            .map(|j| self.q_in + (self.q_out - self.q_in) * j as f64 / (n + 1) as f64)
            .collect()
    }
}

/// Fraction of the maximum that delimits the ring support.
pub const SUPPORT_FRACTION: f64 = 1e-2;

/// Fraction of the peak angle-averaged value that delimits the ring core.
pub const CORE_FRACTION: f64 = 0.5;

fn radial_scan(spec: &SpectrumGrid) -> Result<Vec<(f64, f64, f64)>, AnalysisError> {
    let g = &spec.grid;
    let r_max = [g.qx_min.abs(), g.qx_max.abs(), g.qy_min.abs(), g.qy_max.abs()]
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let n_r = ((r_max / (0.5 * g.dqx().min(g.dqy()))).ceil() as usize).max(8);
    radial_profile(spec, r_max, n_r, DEFAULT_RING_SAMPLES)
}

fn bracket(prof: &[(f64, f64, f64)], value: impl Fn(&(f64, f64, f64)) -> f64, frac: f64) -> Result<RingSupport, AnalysisError> {
    let global = prof.iter().map(&value).fold(f64::NEG_INFINITY, f64::max);
    if !(global > 0.0) {
        return Err(AnalysisError::EmptySpectrum);
    }
    let inside: Vec<f64> = prof.iter().filter(|p| value(p) > frac * global).map(|p| p.0).collect();
    let q_peak = prof
        .iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|p| p.0)
        .unwrap_or(0.0);
    Ok(RingSupport {
        q_in: inside.first().copied().unwrap_or(0.0),
        q_out: inside.last().copied().unwrap_or(0.0),
        q_peak,
    })
}

/// Radii bracketing where the angular maximum exceeds `frac` times the global maximum.
pub fn ring_support(spec: &SpectrumGrid, frac: f64) -> Result<RingSupport, AnalysisError> {
    bracket(&radial_scan(spec)?, |p| p.2, frac)
}

/// Radii bracketing where the angle-averaged value exceeds `frac` times its peak.
pub fn ring_core(spec: &SpectrumGrid, frac: f64) -> Result<RingSupport, AnalysisError> {
    bracket(&radial_scan(spec)?, |p| p.1, frac)
}

/// Default harmonic-analysis radii: 5 radii inside the half-maximum core of the ring.
pub fn default_radii(spec: &SpectrumGrid) -> Result<Vec<f64>, AnalysisError> {
    Ok(ring_core(spec, CORE_FRACTION)?.radii(5))
}

/// Default rotation radii: 5 radii inside the ring support.
pub fn support_radii(spec: &SpectrumGrid) -> Result<Vec<f64>, AnalysisError> {
    Ok(ring_support(spec, SUPPORT_FRACTION)?.radii(5))
}

fn circular_xcorr_peak(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    (0..n)
        .map(|s| (0..n).map(|i| a[i] * b[(i + s) % n]).sum())
        .collect()
}

fn centred(p: &[f64]) -> Result<Vec<f64>, AnalysisError> {
    let mean = p.iter().sum::<f64>() / p.len() as f64;
    let c: Vec<f64> = p.iter().map(|v| v - mean).collect();
    let var = c.iter().map(|v| v * v).sum::<f64>();
    let scale = p.iter().map(|v| v * v).sum::<f64>();
    if var == 0.0 || var <= 1e-24 * scale {
        return Err(AnalysisError::FlatProfile);
    }
    Ok(c)
}

/// Rotation of `b` relative to `a` (positive = counterclockwise), summed over
/// several rings and reported modulo `2 pi / fold` in `(-pi/fold, pi/fold]`.
/// Rings where either profile is flat are skipped.
pub fn estimate_rotation_over(
    a: &SpectrumGrid,
    b: &SpectrumGrid,
    radii: &[f64],
    fold: usize,
) -> Result<f64, AnalysisError> {
    if a.grid != b.grid {
        return Err(AnalysisError::GridMismatch);
    }
    let n = DEFAULT_RING_SAMPLES;
    let mut corr = vec![0.0; n];
    let mut used = 0;
    for &r in radii {
        let (Ok(pa), Ok(pb)) = (centred(&angular_profile(a, r, n)?), centred(&angular_profile(b, r, n)?)) else {
            continue;
        };
        used += 1;
        for (acc, c) in corr.iter_mut().zip(circular_xcorr_peak(&pa, &pb)) {
            *acc += c;
        }
    }
    if used == 0 {
        return Err(AnalysisError::FlatProfile);
    }
    let fold = fold.max(1);
    // A fold-symmetric pattern correlates equally at shifts differing by n/fold.
    let period = n / fold;
    let folded: Vec<f64> = (0..period)
        .map(|s| (0..fold).map(|m| corr[s + m * period]).sum())
        .collect();
    let (s_best, _) = folded
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(y.1))
        .expect("non-empty");
    let at = |s: isize| folded[s.rem_euclid(period as isize) as usize];
    let s = s_best as isize;
    let (ym, y0, yp) = (at(s - 1), at(s), at(s + 1));
    let denom = ym - 2.0 * y0 + yp;
    let offset = if denom < 0.0 { 0.5 * (ym - yp) / denom } else { 0.0 };
    let angle = (s_best as f64 + offset) * 2.0 * PI / n as f64;
    let period_angle = 2.0 * PI / fold as f64;
    let mut wrapped = angle.rem_euclid(period_angle);
    if wrapped > 0.5 * period_angle {
        wrapped -= period_angle;
    }
    Ok(wrapped)
}

/// Rotation of `b` relative to `a` on one ring, in `(-pi, pi]`.
pub fn estimate_rotation(a: &SpectrumGrid, b: &SpectrumGrid, radius: f64) -> Result<f64, AnalysisError> {
    estimate_rotation_over(a, b, &[radius], 1)
}

/// One row of the Ramsey fringe comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub index: usize,
    pub k: i64,
    pub q_num: f64,
    pub q_eva: f64,
    pub diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Report {
    pub t_delay: f64,
    pub rows: Vec<Table1Row>,
}

impl Table1Report {
    /// True when every predicted position lies above the numerical one.
    pub fn systematic_offset_holds(&self) -> bool {
        self.rows.iter().all(|r| r.diff > 0.0)
    }

    /// Transposed table in the published layout, rounded to 5 decimals.
    pub fn to_table(&self) -> String {
        let mut lines = [
            String::from("i            "),
            String::from("q_x          "),
            String::from("q_x^eva      "),
            String::from("q_x^eva - q_x"),
        ];
        for r in &self.rows {
            lines[0].push_str(&format!(" | {:>7}", r.index));
            lines[1].push_str(&format!(" | {:.5}", r.q_num));
            lines[2].push_str(&format!(" | {:.5}", r.q_eva));
            lines[3].push_str(&format!(" | {:.5}", r.diff));
        }
        lines.join("\n")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Table1Options {
    pub slice: SliceSpec,
    pub k_min: i64,
    pub k_max: i64,
    pub min_prominence: f64,
}

impl Default for Table1Options {
    fn default() -> Self {
        Self {
            slice: SliceSpec {
                axis: Axis::X,
                min: 0.2,
                max: 0.95,
                n: 2000,
            },
            k_min: 33,
            k_max: 43,
            min_prominence: DEFAULT_MIN_PROMINENCE,
        }
    }
}

/// Pairs the peaks of a precomputed `+q_x` slice with the Ramsey fringes `k_min..=k_max`.
pub fn table1_from_slice(slice: &[(f64, f64)], t_delay: f64, opts: &Table1Options) -> Result<Table1Report, AnalysisError> {
    let peaks = find_peaks(slice, opts.min_prominence)?;
    let predicted: Vec<(i64, f64)> = (opts.k_min..=opts.k_max)
        .filter_map(|k| ramsey_peak(t_delay, k).map(|q| (k, q)))
        .collect();
    if peaks.len() != predicted.len() {
        return Err(AnalysisError::PeakCountMismatch {
            expected: predicted.len(),
            found: peaks.iter().map(|p| p.q).collect(),
        });
    }
    let rows = peaks
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let &(k, q_eva) = predicted
                .iter()
                .min_by(|a, b| (a.1 - p.q).abs().total_cmp(&(b.1 - p.q).abs()))
                .expect("non-empty");
            Table1Row {
                index: i + 1,
                k,
                q_num: p.q,
                q_eva,
                diff: q_eva - p.q,
            }
        })
        .collect();
    Ok(Table1Report { t_delay, rows })
}

/// Runs the axis slice for a co-rotating two-pulse field and compares fringes.
pub fn table1_report(cfg: &FieldConfig, set: &SolverSettings, opts: &Table1Options) -> Result<Table1Report, AnalysisError> {
    if cfg.delta1 != cfg.delta2 || cfg.t_delay <= 0.0 || !cfg.has_second_pulse() {
        return Err(AnalysisError::NotRamseyConfig);
    }
    let slice = sweep::compute_slice_1d(cfg, &opts.slice, set)?;
    table1_from_slice(&slice, cfg.t_delay, opts)
}

/// One column of the published fringe table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PublishedRow {
    pub index: usize,
    pub k: i64,
    pub q_x: f64,
    pub q_eva: f64,
    pub diff: f64,
}

const PUBLISHED_TABLE1: &str = include_str!("../data/table1.csv");

/// Published fringe positions for LLCP pulses at `T = 100/m`.
pub fn published_table1() -> Vec<PublishedRow> {
    PUBLISHED_TABLE1
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let c: Vec<&str> = l.split(',').collect();
            let num = |i: usize| c[i].trim().parse::<f64>().expect("bundled table is well formed");
            PublishedRow {
                index: num(0) as usize,
                k: num(1) as i64,
                q_x: num(2),
                q_eva: num(3),
                diff: num(4),
            }
        })
        .collect()
}

/// Largest `|q_num - q_x|` against the published positions, matched by `k`.
/// `None` if some published fringe has no computed counterpart.
pub fn max_deviation_from_published(report: &Table1Report) -> Option<f64> {
    published_table1()
        .iter()
        .map(|p| {
            report
                .rows
                .iter()
                .find(|r| r.k == p.k)
                .map(|r| (r.q_num - p.q_x).abs())
        })
        .try_fold(0.0f64, |acc, d| d.map(|d| acc.max(d)))
}

/// Everything the `analyze` command reports about one spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub peaks: Vec<Peak>,
    /// `(k, Re c_k, Im c_k)` on the middle analysis ring.
    pub harmonics: Vec<(usize, f64, f64)>,
    pub dominant_harmonic: usize,
    pub chirality: Chirality,
    pub rotation_estimate: Option<f64>,
    pub table1_rows: Vec<Table1Row>,
    pub support: Option<RingSupport>,
    pub density_2d: Option<f64>,
}

impl AnalysisReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(d) = self.density_2d {
            out.push_str(&format!("density_2d        {d:.6e}\n"));
        }
        if let Some(s) = self.support {
            out.push_str(&format!(
                "ring support      q_in = {:.5}, q_out = {:.5}, q_peak = {:.5}\n",
                s.q_in, s.q_out, s.q_peak
            ));
        }
        out.push_str(&format!("dominant harmonic {}\n", self.dominant_harmonic));
        out.push_str(&format!("chirality         {}\n", self.chirality));
        if let Some(r) = self.rotation_estimate {
            out.push_str(&format!("rotation          {r:.5} rad\n"));
        }
        if !self.peaks.is_empty() {
            out.push_str("peaks (q, f, prominence)\n");
            for p in &self.peaks {
                out.push_str(&format!("  {:.5}  {:.6e}  {:.6e}\n", p.q, p.f, p.prominence));
            }
        }
        if !self.table1_rows.is_empty() {
            let t = Table1Report {
                t_delay: 0.0,
                rows: self.table1_rows.clone(),
            };
            out.push_str(&t.to_table());
            out.push('\n');
        }
        out
    }
}

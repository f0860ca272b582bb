//! Momentum-grid sweeps, 1D slices and number densities.

use std::f64::consts::PI;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dhw::{self, Momentum, SolveError, SolverSettings};
use crate::field::{FieldConfig, FieldError, PulseField};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SweepError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("solver failed at q = ({}, {}, {}): {source}", .q.qx, .q.qy, .q.qz)]
    Node { q: Momentum, source: SolveError },
    #[error(transparent)]
    Settings(SolveError),
}

/// Uniform polarization-plane grid at fixed `qz`. Endpoints are nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub qx_min: f64,
    pub qx_max: f64,
    pub nx: usize,
    pub qy_min: f64,
    pub qy_max: f64,
    pub ny: usize,
    pub qz: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self::square(1.2, 256)
    }
}

impl GridSpec {
    /// `[-half_width, half_width]^2` with `n x n` nodes at `qz = 0`.
    pub fn square(half_width: f64, n: usize) -> Self {
        Self {
            qx_min: -half_width,
            qx_max: half_width,
            nx: n,
            qy_min: -half_width,
            qy_max: half_width,
            ny: n,
            qz: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        if self.nx < 2 || self.ny < 2 {
            return Err(SweepError::InvalidGrid(format!("need at least 2x2 nodes, got {}x{}", self.nx, self.ny)));
        }
        let finite = [self.qx_min, self.qx_max, self.qy_min, self.qy_max, self.qz]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.qx_max <= self.qx_min || self.qy_max <= self.qy_min {
            return Err(SweepError::InvalidGrid("bounds must be finite with max > min".into()));
        }
        Ok(())
    }

    pub fn dqx(&self) -> f64 {
        (self.qx_max - self.qx_min) / (self.nx - 1) as f64
    }

    pub fn dqy(&self) -> f64 {
        (self.qy_max - self.qy_min) / (self.ny - 1) as f64
    }

    pub fn qx(&self, i: usize) -> f64 {
        self.qx_min + i as f64 * self.dqx()
    }

    pub fn qy(&self, j: usize) -> f64 {
        self.qy_min + j as f64 * self.dqy()
    }

    pub fn node(&self, i: usize, j: usize) -> Momentum {
        Momentum::new(self.qx(i), self.qy(j), self.qz)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Same window with `nx`, `ny` replaced.
    pub fn with_resolution(&self, nx: usize, ny: usize) -> Self {
        Self { nx, ny, ..*self }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub created: String,
    pub code_version: String,
}

impl Provenance {
    pub fn now() -> Self {
        Self {
            created: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            code_version: crate::CODE_VERSION.to_string(),
        }
    }
}

/// Final distribution values on a [`GridSpec`], indexed `[i_qx, j_qy]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumGrid {
    pub values: Array2<f64>,
    pub grid: GridSpec,
    pub field: FieldConfig,
    pub solver: SolverSettings,
    pub provenance: Provenance,
}

impl SpectrumGrid {
    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest |f| on the outer boundary divided by the global maximum.
    pub fn boundary_ratio(&self) -> f64 {
        let (nx, ny) = self.values.dim();
        let mut edge: f64 = 0.0;
        for i in 0..nx {
            edge = edge.max(self.values[[i, 0]].abs()).max(self.values[[i, ny - 1]].abs());
        }
        for j in 0..ny {
            edge = edge.max(self.values[[0, j]].abs()).max(self.values[[nx - 1, j]].abs());
        }
        let max = self.max_value();
        if max > 0.0 {
            edge / max
        } else {
            0.0
        }
    }

    /// Bilinear interpolation; `None` outside the grid.
    pub fn interpolate(&self, qx: f64, qy: f64) -> Option<f64> {
        let g = &self.grid;
        let x = (qx - g.qx_min) / g.dqx();
        let y = (qy - g.qy_min) / g.dqy();
        let (xmax, ymax) = ((g.nx - 1) as f64, (g.ny - 1) as f64);
        if !(0.0..=xmax).contains(&x) || !(0.0..=ymax).contains(&y) {
            return None;
        }
        let i = (x.floor() as usize).min(g.nx - 2);
        let j = (y.floor() as usize).min(g.ny - 2);
        let (tx, ty) = (x - i as f64, y - j as f64);
        let v = &self.values;
        Some(
            (1.0 - tx) * (1.0 - ty) * v[[i, j]]
                + tx * (1.0 - ty) * v[[i + 1, j]]
                + (1.0 - tx) * ty * v[[i, j + 1]]
                + tx * ty * v[[i + 1, j + 1]],
        )
    }
}

fn map_nodes<G>(nodes: &[Momentum], solve: G) -> Result<Vec<f64>, SweepError>
where
    G: Fn(&Momentum) -> Result<f64, SolveError> + Sync,
{
    // Index-ordered collection keeps the output independent of the schedule.
    let results: Vec<Result<f64, SolveError>> = nodes.par_iter().map(&solve).collect();
    results
        .into_iter()
        .zip(nodes)
        .map(|(r, q)| r.map_err(|source| SweepError::Node { q: *q, source }))
        .collect()
}

/// Solves every node of `grid` for an arbitrary field.
pub fn compute_values<F: PulseField + ?Sized>(
    field: &F,
    grid: &GridSpec,
    set: &SolverSettings,
) -> Result<Array2<f64>, SweepError> {
    grid.validate()?;
    set.validate().map_err(SweepError::Settings)?;
    let nodes: Vec<Momentum> = (0..grid.nx)
        .flat_map(|i| (0..grid.ny).map(move |j| grid.node(i, j)))
        .collect();
    let values = map_nodes(&nodes, |q| dhw::solve_single(field, q, set))?;
    Ok(Array2::from_shape_vec((grid.nx, grid.ny), values).expect("grid shape"))
}

/// Momentum spectrum of the two-pulse field on `grid`.
pub fn compute_spectrum(cfg: &FieldConfig, grid: &GridSpec, set: &SolverSettings) -> Result<SpectrumGrid, SweepError> {
    cfg.validate()?;
    let values = compute_values(cfg, grid, set)?;
    Ok(SpectrumGrid {
        values,
        grid: *grid,
        field: *cfg,
        solver: *set,
        provenance: Provenance::now(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// A 1D scan along a coordinate axis, other components zero. Endpoints inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceSpec {
    pub axis: Axis,
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl SliceSpec {
    pub fn coordinate(&self, i: usize) -> f64 {
        self.min + (self.max - self.min) * i as f64 / (self.n - 1) as f64
    }

    pub fn momentum(&self, i: usize) -> Momentum {
        let c = self.coordinate(i);
        match self.axis {
            Axis::X => Momentum::new(c, 0.0, 0.0),
            Axis::Y => Momentum::new(0.0, c, 0.0),
            Axis::Z => Momentum::new(0.0, 0.0, c),
        }
    }
}

pub fn compute_slice_1d<F: PulseField + ?Sized>(
    field: &F,
    slice: &SliceSpec,
    set: &SolverSettings,
) -> Result<Vec<(f64, f64)>, SweepError> {
    if slice.n < 2 || !(slice.max > slice.min) {
        return Err(SweepError::InvalidGrid(format!("bad slice {slice:?}")));
    }
    set.validate().map_err(SweepError::Settings)?;
    let nodes: Vec<Momentum> = (0..slice.n).map(|i| slice.momentum(i)).collect();
    let values = map_nodes(&nodes, |q| dhw::solve_single(field, q, set))?;
    Ok((0..slice.n).map(|i| slice.coordinate(i)).zip(values).collect())
}

/// Boundary-to-peak ratio above which the grid is considered to truncate the support.
pub const SUPPORT_THRESHOLD: f64 = 1e-3;

fn trapezoid_weight(i: usize, n: usize) -> f64 {
    if i == 0 || i + 1 == n {
        0.5
    } else {
        1.0
    }
}

/// In-plane density `int dqx dqy f / (2 pi)^2` by the trapezoidal rule, with
/// negative values clamped to zero.
pub fn density_2d(spec: &SpectrumGrid) -> f64 {
    let ratio = spec.boundary_ratio();
    if ratio >= SUPPORT_THRESHOLD {
        log::warn!(
            "spectrum support may be truncated: boundary/max = {ratio:.3e} (threshold {SUPPORT_THRESHOLD:e})"
        );
    }
    let (nx, ny) = spec.values.dim();
    let mut sum = 0.0;
    for ((i, j), v) in spec.values.indexed_iter() {
        sum += trapezoid_weight(i, nx) * trapezoid_weight(j, ny) * v.max(0.0);
    }
    sum * spec.grid.dqx() * spec.grid.dqy() / (2.0 * PI).powi(2)
}

/// Uniform cube `[min, max]^3` with `n` nodes per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid3Spec {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl Default for Grid3Spec {
    fn default() -> Self {
        Self {
            min: -1.2,
            max: 1.2,
            n: 64,
        }
    }
}

impl Grid3Spec {
    fn step(&self) -> f64 {
        (self.max - self.min) / (self.n - 1) as f64
    }

    fn coordinate(&self, i: usize) -> f64 {
        self.min + i as f64 * self.step()
    }
}

/// `int d^3q / (2 pi)^3 f(q)` for an arbitrary distribution, by the trapezoidal rule.
pub fn density_3d_from<D>(grid: &Grid3Spec, dist: D) -> Result<f64, SweepError>
where
    D: Fn(&Momentum) -> Result<f64, SolveError> + Sync,
{
    if grid.n < 2 || !(grid.max > grid.min) {
        return Err(SweepError::InvalidGrid(format!("bad 3D grid {grid:?}")));
    }
    let n = grid.n;
    let nodes: Vec<Momentum> = (0..n * n * n)
        .map(|idx| {
            let (i, j, k) = (idx / (n * n), (idx / n) % n, idx % n);
            Momentum::new(grid.coordinate(i), grid.coordinate(j), grid.coordinate(k))
        })
        .collect();
    let values = map_nodes(&nodes, dist)?;
    let mut sum = 0.0;
    let mut edge: f64 = 0.0;
    let mut max: f64 = 0.0;
    for (idx, v) in values.iter().enumerate() {
        let (i, j, k) = (idx / (n * n), (idx / n) % n, idx % n);
        let w = trapezoid_weight(i, n) * trapezoid_weight(j, n) * trapezoid_weight(k, n);
        sum += w * v.max(0.0);
        max = max.max(*v);
        if [i, j, k].iter().any(|&c| c == 0 || c + 1 == n) {
            edge = edge.max(v.abs());
        }
    }
    if max > 0.0 && edge / max >= SUPPORT_THRESHOLD {
        log::warn!("3D support may be truncated: boundary/max = {:.3e}", edge / max);
    }
    Ok(sum * grid.step().powi(3) / (2.0 * PI).powi(3))
}

/// Full-momentum density from DHW solves on a coarse cube.
pub fn density_3d<F: PulseField + ?Sized>(field: &F, grid: &Grid3Spec, set: &SolverSettings) -> Result<f64, SweepError> {
    set.validate().map_err(SweepError::Settings)?;
    density_3d_from(grid, |q| dhw::solve_single(field, q, set))
}

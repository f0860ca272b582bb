//! Dirac-Heisenberg-Wigner equations of motion for a homogeneous electric field.
//!
//! For every canonical momentum `q` the phase-space Wigner components reduce to a
//! closed system of ten real ODEs: the one-particle distribution `f`, the
//! auxiliary vector `v`, and the Wigner vectors `a` and `t`. The vector potential
//! is carried along as three extra components (`A' = -E`), so the kinetic
//! momentum `p = q - A(t)` is always consistent with the step control.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::PulseField;
use crate::ode::{self, AdaptiveOptions, OdeError, OdeSystem, StepStats};

pub const STATE_DIM: usize = 13;

/// Canonical momentum in units of `m`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Momentum {
    pub qx: f64,
    pub qy: f64,
    pub qz: f64,
}

impl Momentum {
    pub fn new(qx: f64, qy: f64, qz: f64) -> Self {
        Self { qx, qy, qz }
    }

    /// In-plane momentum at radius `q` and azimuth `phi`.
    pub fn polar(q: f64, phi: f64) -> Self {
        let (s, c) = phi.sin_cos();
        Self::new(q * c, q * s, 0.0)
    }

    pub fn vector(&self) -> Vector3<f64> {
        Vector3::new(self.qx, self.qy, self.qz)
    }

    pub fn rotated(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c * self.qx - s * self.qy, s * self.qx + c * self.qy, self.qz)
    }
}

/// Dynamical variables for one momentum mode, plus the augmented vector potential.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WignerState {
    pub f: f64,
    pub v: Vector3<f64>,
    pub a_vec: Vector3<f64>,
    pub t_vec: Vector3<f64>,
    pub potential: Vector3<f64>,
}

impl WignerState {
    /// Vacuum: every component zero.
    pub fn vacuum() -> Self {
        Self::default()
    }

    pub fn to_array(&self) -> [f64; STATE_DIM] {
        let mut y = [0.0; STATE_DIM];
        y[0] = self.f;
        y[1..4].copy_from_slice(self.v.as_slice());
        y[4..7].copy_from_slice(self.a_vec.as_slice());
        y[7..10].copy_from_slice(self.t_vec.as_slice());
        y[10..13].copy_from_slice(self.potential.as_slice());
        y
    }

    pub fn from_array(y: &[f64; STATE_DIM]) -> Self {
        Self {
            f: y[0],
            v: Vector3::new(y[1], y[2], y[3]),
            a_vec: Vector3::new(y[4], y[5], y[6]),
            t_vec: Vector3::new(y[7], y[8], y[9]),
            potential: Vector3::new(y[10], y[11], y[12]),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|x| x.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Integration window padding beyond the outermost pulse centres, in units of tau.
    pub pad: f64,
    pub max_steps: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            pad: 8.0,
            max_steps: 500_000,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<(), SolveError> {
        let ok = self.rel_tol > 0.0
            && self.abs_tol > 0.0
            && self.rel_tol.is_finite()
            && self.abs_tol.is_finite()
            && self.pad >= 5.0
            && self.pad.is_finite()
            && self.max_steps > 0;
        if ok {
            Ok(())
        } else {
            Err(SolveError::InvalidSettings(*self))
        }
    }

    /// Tolerances scaled by `factor` (e.g. 0.5 for a convergence check).
    pub fn scaled_tolerances(&self, factor: f64) -> Self {
        Self {
            rel_tol: self.rel_tol * factor,
            abs_tol: self.abs_tol * factor,
            ..*self
        }
    }

    fn ode_options(&self) -> AdaptiveOptions {
        AdaptiveOptions {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_steps: self.max_steps,
            max_step: f64::INFINITY,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("invalid solver settings {0:?}")]
    InvalidSettings(SolverSettings),
    #[error("step budget of {max_steps} exhausted at t = {t}")]
    StepBudget { max_steps: usize, t: f64 },
    #[error("integration blew up at t = {t}")]
    Blowup { t: f64 },
}

impl From<OdeError> for SolveError {
    fn from(e: OdeError) -> Self {
        match e {
            OdeError::StepBudget { max_steps, t } => SolveError::StepBudget { max_steps, t },
            OdeError::StepUnderflow { t, .. } | OdeError::NonFinite { t } => SolveError::Blowup { t },
        }
    }
}

/// Right-hand side of the equations of motion at time `t`.
///
/// The kinetic momentum is taken from the state's own vector potential.
pub fn rhs<F: PulseField + ?Sized>(field: &F, q: &Momentum, t: f64, s: &WignerState) -> WignerState {
    rhs_with_field(&field.electric_field(t), &q.vector(), s)
}

fn rhs_with_field(e: &Vector3<f64>, q: &Vector3<f64>, s: &WignerState) -> WignerState {
    let p = q - s.potential;
    let omega2 = 1.0 + p.norm_squared();
    let omega = omega2.sqrt();
    let e_dot_v = e.dot(&s.v);
    let e_dot_p = e.dot(&p);

    let f_dot = e_dot_v / (2.0 * omega);
    let source = (p * e_dot_p - e * omega2) * (2.0 / (omega2 * omega) * (s.f - 1.0));
    let v_dot = source - p * (e_dot_v / omega2) - p.cross(&s.a_vec) * 2.0 - s.t_vec * 2.0;
    let a_dot = -p.cross(&s.v) * 2.0;
    let t_dot = (s.v + p * p.dot(&s.v)) * 2.0;
    WignerState {
        f: f_dot,
        v: v_dot,
        a_vec: a_dot,
        t_vec: t_dot,
        potential: -e,
    }
}

struct DhwSystem<'a, F: ?Sized> {
    field: &'a F,
    q: Vector3<f64>,
}

impl<F: PulseField + ?Sized> OdeSystem<STATE_DIM> for DhwSystem<'_, F> {
    fn rhs(&self, t: f64, y: &[f64; STATE_DIM], dy: &mut [f64; STATE_DIM]) {
        let s = WignerState::from_array(y);
        let e = self.field.electric_field(t);
        *dy = rhs_with_field(&e, &self.q, &s).to_array();
    }
}

/// Integration window `[t_i, t_f]`: `pad * tau` beyond the outermost pulse centres.
pub fn time_window<F: PulseField + ?Sized>(field: &F, pad: f64) -> (f64, f64) {
    let span = field.span();
    (
        span.first_center - pad * span.tau,
        span.last_center + pad * span.tau,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Solution {
    pub state: WignerState,
    pub t_final: f64,
    pub stats: StepStats,
}

/// Integrates from vacuum over the full window and returns the final state.
pub fn solve<F: PulseField + ?Sized>(field: &F, q: &Momentum, set: &SolverSettings) -> Result<Solution, SolveError> {
    solve_observed(field, q, set, |_, _| {})
}

/// As [`solve`], calling `observer` on every accepted step.
pub fn solve_observed<F, O>(field: &F, q: &Momentum, set: &SolverSettings, mut observer: O) -> Result<Solution, SolveError>
where
    F: PulseField + ?Sized,
    O: FnMut(f64, &WignerState),
{
    set.validate()?;
    let (t_i, t_f) = time_window(field, set.pad);
    let sys = DhwSystem { field, q: q.vector() };
    let (y, stats) = ode::dop853_observed(
        &sys,
        t_i,
        t_f,
        WignerState::vacuum().to_array(),
        &set.ode_options(),
        |t, y| observer(t, &WignerState::from_array(y)),
    )?;
    let state = WignerState::from_array(&y);
    if state.f > 1.0 {
        log::warn!("f = {} exceeds 1 at q = {:?}", state.f, q);
    }
    Ok(Solution {
        state,
        t_final: t_f,
        stats,
    })
}

/// Asymptotic one-particle distribution `f(q, t_f)`.
pub fn solve_single<F: PulseField + ?Sized>(field: &F, q: &Momentum, set: &SolverSettings) -> Result<f64, SolveError> {
    solve(field, q, set).map(|s| s.state.f)
}

/// Every accepted step of the adaptive integration.
pub fn solve_trajectory<F: PulseField + ?Sized>(
    field: &F,
    q: &Momentum,
    set: &SolverSettings,
) -> Result<Vec<(f64, WignerState)>, SolveError> {
    let mut out = Vec::new();
    solve_observed(field, q, set, |t, s| out.push((t, *s)))?;
    Ok(out)
}

/// Fixed-step RK4 over the same window; an independent cross-check of [`solve`].
pub fn solve_rk4<F: PulseField + ?Sized>(field: &F, q: &Momentum, pad: f64, n_steps: usize) -> WignerState {
    let (t_i, t_f) = time_window(field, pad);
    let sys = DhwSystem { field, q: q.vector() };
    WignerState::from_array(&ode::rk4(&sys, t_i, t_f, WignerState::vacuum().to_array(), n_steps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldConfig;

    struct Constant(Vector3<f64>);

    impl PulseField for Constant {
        fn electric_field(&self, _t: f64) -> Vector3<f64> {
            self.0
        }
        fn span(&self) -> crate::field::PulseSpan {
            crate::field::PulseSpan {
                first_center: 0.0,
                last_center: 0.0,
                tau: 1.0,
            }
        }
    }

    #[test]
    fn vacuum_source_at_rest() {
        let e = 0.3;
        let d = rhs(&Constant(Vector3::new(e, 0.0, 0.0)), &Momentum::default(), 0.0, &WignerState::vacuum());
        assert_eq!(d.f, 0.0);
        assert!((d.v - Vector3::new(2.0 * e, 0.0, 0.0)).norm() < 1e-15);
        assert_eq!(d.a_vec, Vector3::zeros());
        assert_eq!(d.t_vec, Vector3::zeros());
        assert_eq!(d.potential, Vector3::new(-e, 0.0, 0.0));
    }

    #[test]
    fn vacuum_source_moving() {
        let e = 0.3;
        let d = rhs(&Constant(Vector3::new(e, 0.0, 0.0)), &Momentum::new(0.5, 0.0, 0.0), 0.0, &WignerState::vacuum());
        // v_x' = 2E / Omega^3 with Omega^2 = 1.25
        assert_eq!(d.f, 0.0);
        assert!((d.v.x / e - 1.431_083_5).abs() < 1e-6, "{}", d.v.x / e);
        assert_eq!(d.v.y, 0.0);
    }

    #[test]
    fn frozen_without_field() {
        let s = WignerState {
            f: 0.3,
            ..WignerState::vacuum()
        };
        let d = rhs(&Constant(Vector3::zeros()), &Momentum::new(0.2, -0.4, 0.1), 1.0, &s);
        assert_eq!(d.to_array(), [0.0; STATE_DIM]);
    }

    #[test]
    fn rhs_matches_finite_difference_of_free_precession() {
        // With E = 0 the v, a, t block is linear; check a_dot and t_dot by hand.
        let s = WignerState {
            f: 0.0,
            v: Vector3::new(0.1, -0.2, 0.05),
            a_vec: Vector3::new(0.0, 0.3, -0.1),
            t_vec: Vector3::new(0.2, 0.0, 0.1),
            potential: Vector3::new(0.05, 0.0, 0.0),
        };
        let q = Momentum::new(0.4, 0.3, 0.0);
        let p = q.vector() - s.potential;
        let d = rhs(&Constant(Vector3::zeros()), &q, 0.0, &s);
        assert!((d.a_vec + 2.0 * p.cross(&s.v)).norm() < 1e-15);
        assert!((d.t_vec - 2.0 * (s.v + p * p.dot(&s.v))).norm() < 1e-15);
        assert!((d.v + 2.0 * p.cross(&s.a_vec) + 2.0 * s.t_vec).norm() < 1e-15);
    }

    #[test]
    fn zero_field_is_exactly_zero() {
        let cfg = FieldConfig {
            e0: 0.0,
            ..Default::default()
        };
        let f = solve_single(&cfg, &Momentum::new(0.3, -0.2, 0.1), &SolverSettings::default()).unwrap();
        assert_eq!(f, 0.0);
    }

    #[test]
    fn window_follows_pulses() {
        let cfg = FieldConfig::two_pulse(1, -1, 100.0, 0.0);
        assert_eq!(time_window(&cfg, 8.0), (-80.0, 180.0));
        let single = FieldConfig {
            t_delay: 100.0,
            ..Default::default()
        };
        assert_eq!(time_window(&single, 8.0), (-80.0, 80.0));
        let neg = FieldConfig::two_pulse(1, 1, -30.0, 0.0);
        assert_eq!(time_window(&neg, 5.0), (-80.0, 50.0));
    }

    #[test]
    fn invalid_settings_rejected() {
        let set = SolverSettings {
            pad: 3.0,
            ..Default::default()
        };
        assert!(matches!(
            solve_single(&FieldConfig::default(), &Momentum::default(), &set),
            Err(SolveError::InvalidSettings(_))
        ));
    }

    #[test]
    fn step_budget_error_carries_time() {
        let set = SolverSettings {
            max_steps: 20,
            ..Default::default()
        };
        match solve_single(&FieldConfig::default(), &Momentum::new(0.0, -0.64, 0.0), &set) {
            Err(SolveError::StepBudget { max_steps: 20, t }) => assert!(t > -80.0 && t < 80.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn adaptive_agrees_with_rk4() {
        let cfg = FieldConfig::default();
        let q = Momentum::new(0.0, -0.64, 0.0);
        let f = solve_single(&cfg, &q, &SolverSettings::default()).unwrap();
        let oracle = solve_rk4(&cfg, &q, 8.0, 64_000).f;
        assert!(f > 0.0);
        assert!(((f - oracle) / oracle).abs() < 1e-6, "{f} vs {oracle}");
    }

    #[test]
    fn trajectory_ends_at_solution() {
        let cfg = FieldConfig::default();
        let q = Momentum::new(0.3, 0.2, 0.0);
        let set = SolverSettings::default();
        let traj = solve_trajectory(&cfg, &q, &set).unwrap();
        let (t_last, s_last) = traj.last().unwrap();
        assert_eq!(*t_last, 80.0);
        assert_eq!(s_last.f, solve_single(&cfg, &q, &set).unwrap());
        assert_eq!(traj[0].1, WignerState::vacuum());
    }
}

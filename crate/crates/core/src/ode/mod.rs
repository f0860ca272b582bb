//! Explicit Runge-Kutta integrators for small fixed-size systems.
//!
//! [`dop853`] is the production path: the Dormand-Prince 8(5,3) embedded pair
//! with a PI step-size controller. [`rk4`] is a plain fixed-step classical
//! Runge-Kutta scheme kept as an independent cross-check.

mod dop853_tableau;

use thiserror::Error;

use self::dop853_tableau::{A, B, C, E3, E5, STAGES};

/// A first-order system `y' = F(t, y)` with `N` components.
pub trait OdeSystem<const N: usize> {
    fn rhs(&self, t: f64, y: &[f64; N], dy: &mut [f64; N]);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum number of attempted steps (accepted + rejected).
    pub max_steps: usize,
    /// Upper bound on |h|; `f64::INFINITY` disables it.
    pub max_step: f64,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            max_steps: 1_000_000,
            max_step: f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("step budget of {max_steps} exhausted at t = {t}")]
    StepBudget { max_steps: usize, t: f64 },
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
}

// PI controller constants (Hairer's DOP853 with a non-zero beta).
const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const EXPO1: f64 = 1.0 / 8.0 - BETA * 0.2;
const FAC_MIN: f64 = 0.333;
const FAC_MAX: f64 = 6.0;

fn error_scale(atol: f64, rtol: f64, a: f64, b: f64) -> f64 {
    atol + rtol * a.abs().max(b.abs())
}

fn rms_scaled<const N: usize>(x: &[f64; N], y: &[f64; N], atol: f64, rtol: f64) -> f64 {
    let sum: f64 = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| {
            let s = error_scale(atol, rtol, *yi, *yi);
            (xi / s).powi(2)
        })
        .sum();
    (sum / N as f64).sqrt()
}

/// Starting step heuristic from Hairer, Norsett & Wanner (II.4).
fn initial_step<S: OdeSystem<N>, const N: usize>(
    sys: &S,
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    dir: f64,
    opts: &AdaptiveOptions,
) -> f64 {
    let d0 = rms_scaled(y0, y0, opts.abs_tol, opts.rel_tol);
    let d1 = rms_scaled(f0, y0, opts.abs_tol, opts.rel_tol);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let h0 = h0.min(opts.max_step);
    let mut y1 = [0.0; N];
    for i in 0..N {
        y1[i] = y0[i] + dir * h0 * f0[i];
    }
    let mut f1 = [0.0; N];
    sys.rhs(t0 + dir * h0, &y1, &mut f1);
    let mut diff = [0.0; N];
    for i in 0..N {
        diff[i] = f1[i] - f0[i];
    }
    let d2 = rms_scaled(&diff, y0, opts.abs_tol, opts.rel_tol) / h0;
    let h1 = if d1 <= 1e-15 && d2 <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / 8.0)
    };
    (100.0 * h0).min(h1).min(opts.max_step)
}

/// Integrates `sys` from `t0` to `t1` with the Dormand-Prince 8(5,3) pair.
///
/// `observer` is called with every accepted step (including the initial point).
pub fn dop853_observed<S, const N: usize, O>(
    sys: &S,
    t0: f64,
    t1: f64,
    y0: [f64; N],
    opts: &AdaptiveOptions,
    mut observer: O,
) -> Result<([f64; N], StepStats), OdeError>
where
    S: OdeSystem<N>,
    O: FnMut(f64, &[f64; N]),
{
    let mut stats = StepStats::default();
    let mut t = t0;
    let mut y = y0;
    observer(t, &y);
    if t1 == t0 {
        return Ok((y, stats));
    }
    let dir = (t1 - t0).signum();

    let mut k = [[0.0; N]; STAGES + 1];
    sys.rhs(t, &y, &mut k[0]);
    stats.evaluations += 1;

    let mut h = initial_step(sys, t, &y, &k[0], dir, opts);
    stats.evaluations += 1;
    let mut facold: f64 = 1e-4;
    let mut last_rejected = false;

    let mut y_stage = [0.0; N];
    let mut y_new = [0.0; N];

    loop {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(OdeError::StepBudget {
                max_steps: opts.max_steps,
                t,
            });
        }
        let remaining = (t1 - t).abs();
        let mut last = false;
        if h >= remaining {
            h = remaining;
            last = true;
        }
        if h <= 10.0 * f64::EPSILON * t.abs().max(1.0) {
            return Err(OdeError::StepUnderflow { t, h });
        }
        let hs = dir * h;

        for s in 1..STAGES {
            for i in 0..N {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += A[s][j] * kj[i];
                }
                y_stage[i] = y[i] + hs * acc;
            }
            sys.rhs(t + C[s] * hs, &y_stage, &mut k[s]);
        }
        for i in 0..N {
            let mut acc = 0.0;
            for (s, ks) in k.iter().enumerate().take(STAGES) {
                acc += B[s] * ks[i];
            }
            y_new[i] = y[i] + hs * acc;
        }
        sys.rhs(t + hs, &y_new, &mut k[STAGES]);
        stats.evaluations += STAGES;

        if y_new.iter().any(|v| !v.is_finite()) {
            return Err(OdeError::NonFinite { t: t + hs });
        }

        let mut err5 = 0.0;
        let mut err3 = 0.0;
        for i in 0..N {
            let scale = error_scale(opts.abs_tol, opts.rel_tol, y[i], y_new[i]);
            let mut e5 = 0.0;
            let mut e3 = 0.0;
            for s in 0..=STAGES {
                e5 += E5[s] * k[s][i];
                e3 += E3[s] * k[s][i];
            }
            err5 += (e5 / scale).powi(2);
            err3 += (e3 / scale).powi(2);
        }
        let err = if err5 == 0.0 && err3 == 0.0 {
            0.0
        } else {
            h * err5 / (N as f64 * (err5 + 0.01 * err3)).sqrt()
        };

        let fac11 = err.powf(EXPO1);
        if err <= 1.0 {
            let fac = fac11 / facold.powf(BETA);
            let fac = (fac / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            let mut h_new = (h / fac).min(opts.max_step);
            if last_rejected {
                h_new = h_new.min(h);
            }
            facold = err.max(1e-4);
            stats.accepted += 1;
            last_rejected = false;

            t = if last { t1 } else { t + hs };
            y = y_new;
            k[0] = k[STAGES];
            observer(t, &y);
            if last {
                return Ok((y, stats));
            }
            h = h_new;
        } else {
            stats.rejected += 1;
            last_rejected = true;
            h /= (fac11 / SAFETY).min(1.0 / FAC_MIN);
        }
    }
}

/// [`dop853_observed`] without an observer.
pub fn dop853<S, const N: usize>(
    sys: &S,
    t0: f64,
    t1: f64,
    y0: [f64; N],
    opts: &AdaptiveOptions,
) -> Result<([f64; N], StepStats), OdeError>
where
    S: OdeSystem<N>,
{
    dop853_observed(sys, t0, t1, y0, opts, |_, _| {})
}

/// Classical fourth-order Runge-Kutta with `n_steps` equal steps.
pub fn rk4<S, const N: usize>(sys: &S, t0: f64, t1: f64, y0: [f64; N], n_steps: usize) -> [f64; N]
where
    S: OdeSystem<N>,
{
    let h = (t1 - t0) / n_steps as f64;
    let mut y = y0;
    let (mut k1, mut k2, mut k3, mut k4) = ([0.0; N], [0.0; N], [0.0; N], [0.0; N]);
    let mut tmp = [0.0; N];
    for n in 0..n_steps {
        let t = t0 + n as f64 * h;
        sys.rhs(t, &y, &mut k1);
        for i in 0..N {
            tmp[i] = y[i] + 0.5 * h * k1[i];
        }
        sys.rhs(t + 0.5 * h, &tmp, &mut k2);
        for i in 0..N {
            tmp[i] = y[i] + 0.5 * h * k2[i];
        }
        sys.rhs(t + 0.5 * h, &tmp, &mut k3);
        for i in 0..N {
            tmp[i] = y[i] + h * k3[i];
        }
        sys.rhs(t + h, &tmp, &mut k4);
        for i in 0..N {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    y
}

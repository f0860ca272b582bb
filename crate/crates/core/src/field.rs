//! Two-pulse circularly polarized electric field.
//!
//! Natural units throughout: `m = e = 1`, so the critical field is 1, times are
//! in `1/m`, and momenta and frequencies are in `m`.

use std::f64::consts::SQRT_2;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("omega must be positive (got {0})")]
    NonPositiveOmega(f64),
    #[error("tau must be positive (got {0})")]
    NonPositiveTau(f64),
    #[error("E0 must be non-negative (got {0})")]
    NegativeAmplitude(f64),
    #[error("handedness must be -1, 0 or +1 (got {0})")]
    BadHandedness(i8),
    #[error("non-finite field parameter `{0}`")]
    NonFinite(&'static str),
    #[error("Keldysh parameter undefined for E0 = 0")]
    UndefinedKeldysh,
}

/// Parameters of the two-pulse field.
///
/// Pulse 1 is centred at `t = 0`, pulse 2 at `t = t_delay`. Both share the
/// Gaussian width `tau` and the carrier `omega`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldConfig {
    /// Field-strength scale in units of the critical field.
    pub e0: f64,
    /// Handedness of pulse 1: +1 left, -1 right, 0 linear along x.
    pub delta1: i8,
    /// Handedness of pulse 2.
    pub delta2: i8,
    pub omega: f64,
    pub tau: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub t_delay: f64,
    /// Multiplier on the pulse-2 amplitude; 0 gives a single pulse.
    pub amp2_scale: f64,
}

impl Default for FieldConfig {
    /// Single left-handed pulse with `E1 = 0.1`, `omega = 0.6`, `tau = 10`.
    fn default() -> Self {
        Self {
            e0: 0.1 * SQRT_2,
            delta1: 1,
            delta2: 1,
            omega: 0.6,
            tau: 10.0,
            phi1: 0.0,
            phi2: 0.0,
            t_delay: 0.0,
            amp2_scale: 0.0,
        }
    }
}

impl FieldConfig {
    /// Two pulses of equal strength with the given handedness, delay and CEP of pulse 2.
    pub fn two_pulse(delta1: i8, delta2: i8, t_delay: f64, phi2: f64) -> Self {
        Self {
            delta1,
            delta2,
            t_delay,
            phi2,
            amp2_scale: 1.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), FieldError> {
        for (name, v) in [
            ("e0", self.e0),
            ("omega", self.omega),
            ("tau", self.tau),
            ("phi1", self.phi1),
            ("phi2", self.phi2),
            ("t_delay", self.t_delay),
            ("amp2_scale", self.amp2_scale),
        ] {
            if !v.is_finite() {
                return Err(FieldError::NonFinite(name));
            }
        }
        if self.omega <= 0.0 {
            return Err(FieldError::NonPositiveOmega(self.omega));
        }
        if self.tau <= 0.0 {
            return Err(FieldError::NonPositiveTau(self.tau));
        }
        if self.e0 < 0.0 {
            return Err(FieldError::NegativeAmplitude(self.e0));
        }
        for d in [self.delta1, self.delta2] {
            if !(-1..=1).contains(&d) {
                return Err(FieldError::BadHandedness(d));
            }
        }
        Ok(())
    }

    /// Amplitude of pulse 1, `E0 / sqrt(1 + delta1^2)`.
    pub fn amplitude1(&self) -> f64 {
        let d = f64::from(self.delta1);
        self.e0 / (1.0 + d * d).sqrt()
    }

    /// Amplitude of pulse 2, including `amp2_scale`.
    pub fn amplitude2(&self) -> f64 {
        let d = f64::from(self.delta2);
        self.amp2_scale * self.e0 / (1.0 + d * d).sqrt()
    }

    pub fn has_second_pulse(&self) -> bool {
        self.amp2_scale != 0.0
    }

    /// Sets `e0` so that pulse 1 has amplitude `e1`.
    pub fn set_amplitude1(&mut self, e1: f64) {
        let d = f64::from(self.delta1);
        self.e0 = e1 * (1.0 + d * d).sqrt();
    }

    /// Keldysh parameter `gamma = m omega / (e E0)`.
    pub fn keldysh_gamma(&self) -> Result<f64, FieldError> {
        if self.e0 == 0.0 {
            return Err(FieldError::UndefinedKeldysh);
        }
        Ok(self.omega / self.e0)
    }

    pub fn electric_field(&self, t: f64) -> Vector3<f64> {
        let two_tau2 = 2.0 * self.tau * self.tau;
        let mut e = Vector3::zeros();
        let e1 = self.amplitude1();
        if e1 != 0.0 {
            let env = e1 * (-t * t / two_tau2).exp();
            let (s, c) = (self.omega * t + self.phi1).sin_cos();
            e.x += env * c;
            e.y += env * f64::from(self.delta1) * s;
        }
        let e2 = self.amplitude2();
        if e2 != 0.0 {
            let dt = t - self.t_delay;
            let env = e2 * (-dt * dt / two_tau2).exp();
            let (s, c) = (self.omega * dt + self.phi2).sin_cos();
            e.x += env * c;
            e.y += env * f64::from(self.delta2) * s;
        }
        e
    }

    /// Negative running integral of the field from `min(0, T) - 10 tau`.
    ///
    /// Evaluated by adaptive Gauss-Kronrod quadrature; used to cross-check the
    /// vector potential carried along by the DHW solver.
    pub fn vector_potential_reference(&self, t: f64) -> Vector3<f64> {
        let t_lo = self.t_delay.min(0.0) - 10.0 * self.tau;
        vector_potential_from(self, t_lo, t)
    }
}

/// Earliest and latest pulse centre plus the common Gaussian width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSpan {
    pub first_center: f64,
    pub last_center: f64,
    pub tau: f64,
}

/// Any homogeneous, time-dependent electric field the DHW solver can drive.
pub trait PulseField: Sync {
    fn electric_field(&self, t: f64) -> Vector3<f64>;
    fn span(&self) -> PulseSpan;
}

impl PulseField for FieldConfig {
    fn electric_field(&self, t: f64) -> Vector3<f64> {
        FieldConfig::electric_field(self, t)
    }

    fn span(&self) -> PulseSpan {
        let t2 = if self.has_second_pulse() {
            self.t_delay
        } else {
            0.0
        };
        PulseSpan {
            first_center: t2.min(0.0),
            last_center: t2.max(0.0),
            tau: self.tau,
        }
    }
}

/// A field rotated about the z axis by `angle` (counterclockwise).
#[derive(Debug, Clone, Copy)]
pub struct Rotated<F> {
    pub inner: F,
    pub angle: f64,
}

impl<F: PulseField> PulseField for Rotated<F> {
    fn electric_field(&self, t: f64) -> Vector3<f64> {
        let e = self.inner.electric_field(t);
        let (s, c) = self.angle.sin_cos();
        Vector3::new(c * e.x - s * e.y, s * e.x + c * e.y, e.z)
    }

    fn span(&self) -> PulseSpan {
        self.inner.span()
    }
}

/// A field delayed by `shift`: `E'(t) = E(t - shift)`.
#[derive(Debug, Clone, Copy)]
pub struct Shifted<F> {
    pub inner: F,
    pub shift: f64,
}

impl<F: PulseField> PulseField for Shifted<F> {
    fn electric_field(&self, t: f64) -> Vector3<f64> {
        self.inner.electric_field(t - self.shift)
    }

    fn span(&self) -> PulseSpan {
        let s = self.inner.span();
        PulseSpan {
            first_center: s.first_center + self.shift,
            last_center: s.last_center + self.shift,
            tau: s.tau,
        }
    }
}

/// Linearly polarized Gaussian pulse `E(t) = E g(t) cos(omega t + phi) n`,
/// with `n` a unit vector in the polarization plane at angle `axis_angle` from x.
#[derive(Debug, Clone, Copy)]
pub struct LinearPulse {
    pub amplitude: f64,
    pub omega: f64,
    pub tau: f64,
    pub phi: f64,
    pub axis_angle: f64,
}

impl PulseField for LinearPulse {
    fn electric_field(&self, t: f64) -> Vector3<f64> {
        let g = self.amplitude * (-t * t / (2.0 * self.tau * self.tau)).exp() * (self.omega * t + self.phi).cos();
        let (s, c) = self.axis_angle.sin_cos();
        Vector3::new(g * c, g * s, 0.0)
    }

    fn span(&self) -> PulseSpan {
        PulseSpan {
            first_center: 0.0,
            last_center: 0.0,
            tau: self.tau,
        }
    }
}

/// `-int_{t_lo}^{t} E(t') dt'` for any field, by adaptive Gauss-Kronrod (7, 15).
pub fn vector_potential_from<F: PulseField + ?Sized>(field: &F, t_lo: f64, t: f64) -> Vector3<f64> {
    if t == t_lo {
        return Vector3::zeros();
    }
    // Panels no longer than a quarter carrier period keep the recursion shallow.
    let panel = 1.0;
    let n = ((t - t_lo).abs() / panel).ceil().max(1.0) as usize;
    let h = (t - t_lo) / n as f64;
    let tol = 1e-13 / n as f64;
    let mut acc = Vector3::zeros();
    for i in 0..n {
        let a = t_lo + i as f64 * h;
        let b = if i + 1 == n { t } else { a + h };
        acc += gk15_adaptive(&|s| field.electric_field(s), a, b, tol, 30);
    }
    -acc
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS_K: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GK_WEIGHTS_G: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &dyn Fn(f64) -> Vector3<f64>, a: f64, b: f64) -> (Vector3<f64>, f64) {
    let c = 0.5 * (a + b);
    let hw = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * GK_WEIGHTS_K[7];
    let mut g = fc * GK_WEIGHTS_G[3];
    for i in 0..7 {
        let dx = hw * GK_NODES[i];
        let s = f(c - dx) + f(c + dx);
        k += s * GK_WEIGHTS_K[i];
        if i % 2 == 1 {
            g += s * GK_WEIGHTS_G[i / 2];
        }
    }
    let k = k * hw;
    let g = g * hw;
    (k, (k - g).norm())
}

fn gk15_adaptive(f: &dyn Fn(f64) -> Vector3<f64>, a: f64, b: f64, tol: f64, depth: u32) -> Vector3<f64> {
    let (k, err) = gk15(f, a, b);
    if err <= tol || depth == 0 {
        return k;
    }
    let m = 0.5 * (a + b);
    gk15_adaptive(f, a, m, 0.5 * tol, depth - 1) + gk15_adaptive(f, m, b, 0.5 * tol, depth - 1)
}

//! Closed-form WKB-like predictions for the two-pulse spectra.
//!
//! The relative phase between the amplitudes of the two pulses is approximated
//! by the free accumulated phase `theta0(q) = 2 sqrt(q^2 + 1) T`. Co-rotating
//! pulses then give concentric Ramsey fringes; counter-rotating pulses add the
//! angular term `(delta2 - delta1) * ell * phi` and turn the fringes into
//! `2 ell`-start Archimedean spirals. The amplitude envelope `|A0|^2` is not
//! modelled, so everything here is about positions, counts and pitch.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PredictionError {
    #[error("photon number must be at least 1")]
    ZeroPhotons,
    #[error("spiral predictions need circular pulses (|delta| = 1), got ({0}, {1})")]
    NotCircular(i8, i8),
    #[error("equal handedness: spirals degenerate to rings and have no pitch")]
    Degenerate,
    #[error("time delay must be positive (got {0})")]
    NonPositiveDelay(f64),
}

/// Accumulated phase between the pulses, `2 sqrt(q^2 + 1) T`.
pub fn theta0(q: f64, t_delay: f64) -> f64 {
    2.0 * (q * q + 1.0).sqrt() * t_delay
}

/// Position `sqrt((k pi / T)^2 - 1)` of the `k`-th Ramsey fringe on the q_x axis,
/// or `None` below threshold (`k pi / T < 1`).
pub fn ramsey_peak(t_delay: f64, k: i64) -> Option<f64> {
    if t_delay <= 0.0 {
        return None;
    }
    let x = k as f64 * PI / t_delay;
    (x >= 1.0).then(|| (x * x - 1.0).sqrt())
}

/// All `(k, q)` Ramsey fringes with `q` in `[q_min, q_max]`.
pub fn ramsey_peaks_in(t_delay: f64, q_min: f64, q_max: f64) -> Vec<(i64, f64)> {
    if t_delay <= 0.0 {
        return Vec::new();
    }
    // q = sqrt(x^2 - 1) is monotone in k, so bracket k directly.
    let k_of = |q: f64| (q.max(0.0).powi(2) + 1.0).sqrt() * t_delay / PI;
    let k_lo = k_of(q_min).floor() as i64;
    let k_hi = k_of(q_max).ceil() as i64;
    (k_lo..=k_hi)
        .filter_map(|k| ramsey_peak(t_delay, k).map(|q| (k, q)))
        .filter(|(_, q)| *q >= q_min && *q <= q_max)
        .collect()
}

/// Fringe shape `1 + cos(theta0(q) + order * phi)` with `order = (delta2 - delta1) ell`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferenceEnvelope {
    pub t_delay: f64,
    pub angular_order: i32,
}

impl InterferenceEnvelope {
    pub fn value(&self, q: f64, phi: f64) -> f64 {
        1.0 + (theta0(q, self.t_delay) + f64::from(self.angular_order) * phi).cos()
    }
}

/// Parameters of the semiclassical fringe/spiral model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpiralPrediction {
    pub t_delay: f64,
    /// Number of photons absorbed.
    pub ell: u32,
    pub delta1: i8,
    pub delta2: i8,
}

impl SpiralPrediction {
    pub fn new(t_delay: f64, ell: u32, delta1: i8, delta2: i8) -> Result<Self, PredictionError> {
        let p = Self {
            t_delay,
            ell,
            delta1,
            delta2,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), PredictionError> {
        if self.ell == 0 {
            return Err(PredictionError::ZeroPhotons);
        }
        if self.delta1.abs() != 1 || self.delta2.abs() != 1 {
            return Err(PredictionError::NotCircular(self.delta1, self.delta2));
        }
        if self.t_delay <= 0.0 {
            return Err(PredictionError::NonPositiveDelay(self.t_delay));
        }
        Ok(())
    }

    /// `(delta2 - delta1) * ell`; zero for co-rotating pulses.
    pub fn angular_order(&self) -> i32 {
        (i32::from(self.delta2) - i32::from(self.delta1)) * self.ell as i32
    }

    /// Number of spiral arms, `|delta2 - delta1| ell` (0 means rings).
    pub fn arm_count(&self) -> u32 {
        self.angular_order().unsigned_abs()
    }

    pub fn envelope(&self) -> InterferenceEnvelope {
        InterferenceEnvelope {
            t_delay: self.t_delay,
            angular_order: self.angular_order(),
        }
    }

    /// Radius of the `kprime`-th fringe maximum at azimuth `phi`.
    ///
    /// Only the branch with a positive bracket `2 k' pi - order * phi >= 2T`
    /// is accepted; for co-rotating pulses this reduces to [`ramsey_peak`].
    pub fn spiral_radius(&self, phi: f64, kprime: i64) -> Option<f64> {
        let bracket = 2.0 * PI * kprime as f64 - f64::from(self.angular_order()) * phi;
        let x = bracket / (2.0 * self.t_delay);
        (x >= 1.0).then(|| (x * x - 1.0).sqrt())
    }

    /// Spiral pitch `|d phi / d q| = |2T / order| * q / sqrt(q^2 + 1)`.
    pub fn spiral_pitch(&self, q: f64) -> Result<f64, PredictionError> {
        let order = self.angular_order();
        if order == 0 {
            return Err(PredictionError::Degenerate);
        }
        Ok((2.0 * self.t_delay / f64::from(order)).abs() * q / (q * q + 1.0).sqrt())
    }

    /// Fringe indices whose spiral has a point with radius in `[q_min, q_max]`
    /// for some azimuth in `[0, 2 pi)`.
    pub fn kprime_range(&self, q_min: f64, q_max: f64) -> Vec<i64> {
        let order = f64::from(self.angular_order());
        // bracket = 2T sqrt(q^2+1) = 2 pi k' - order phi
        let b = |q: f64| 2.0 * self.t_delay * (q.max(0.0).powi(2) + 1.0).sqrt();
        let (b_lo, b_hi) = (b(q_min), b(q_max));
        let sweep = order * 2.0 * PI;
        let lo = ((b_lo + sweep.min(0.0)) / (2.0 * PI)).floor() as i64;
        let hi = ((b_hi + sweep.max(0.0)) / (2.0 * PI)).ceil() as i64;
        (lo..=hi)
            .filter(|&k| {
                (0..720).any(|i| {
                    let phi = 2.0 * PI * i as f64 / 720.0;
                    self.spiral_radius(phi, k)
                        .is_some_and(|q| q >= q_min && q <= q_max)
                })
            })
            .collect()
    }

    /// Sampled spiral `(phi, q)` for one index, keeping only real radii.
    pub fn spiral_curve(&self, kprime: i64, n_phi: usize) -> Vec<(f64, f64)> {
        (0..n_phi)
            .filter_map(|i| {
                let phi = 2.0 * PI * i as f64 / n_phi as f64;
                self.spiral_radius(phi, kprime).map(|q| (phi, q))
            })
            .collect()
    }
}

/// Rotation of the spectrum caused by a relative CEP `dphi`: `delta2 * dphi / 2`.
/// Negative means clockwise.
pub fn rotation_angle(dphi: f64, delta2: i8) -> f64 {
    f64::from(delta2) * dphi / 2.0
}

/// Field-dressed mass `sqrt(1 + E^2 / omega^2)` for a circular pulse of amplitude `e1`.
pub fn effective_mass(e1: f64, omega: f64) -> f64 {
    (1.0 + e1 * e1 / (omega * omega)).sqrt()
}

/// Smallest `ell` with `ell * omega >= 2 m_star`.
pub fn photon_number(omega: f64, m_star: f64) -> u32 {
    let ratio = 2.0 * m_star / omega;
    // Guard against 2/omega landing a hair above an integer.
    let r = ratio.round();
    if (ratio - r).abs() < 1e-12 {
        r.max(1.0) as u32
    } else {
        ratio.ceil().max(1.0) as u32
    }
}

/// Ring radius from `2 sqrt(q^2 + m_star^2) = ell omega`, if above threshold.
pub fn multiphoton_ring_radius(ell: u32, omega: f64, m_star: f64) -> Option<f64> {
    let e = 0.5 * ell as f64 * omega;
    let r2 = e * e - m_star * m_star;
    (r2 >= 0.0).then(|| r2.sqrt())
}

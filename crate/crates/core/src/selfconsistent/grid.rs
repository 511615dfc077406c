//! Shared frequency/time grid in FFT order and the free mode propagator.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::{Error, Result, C64};

/// Periodic grid ω_j = j·δω, t_m = m·dt with dt·δω = 2π/M, both in FFT order
/// (non-negative indices first, then the negative half).
#[derive(Clone)]
pub struct FreqGrid {
    points: usize,
    d_omega: f64,
    dt: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FreqGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FreqGrid").field("points", &self.points).field("d_omega", &self.d_omega).finish()
    }
}

impl FreqGrid {
    /// `omega_max` is the Nyquist frequency, so δω = 2Ω_max/M.
    pub fn new(omega_max: f64, points: usize) -> Result<Self> {
        if !points.is_power_of_two() || points < 16 {
            return Err(Error::param("points", "must be a power of two >= 16"));
        }
        if !(omega_max > 0.0) || !omega_max.is_finite() {
            return Err(Error::param("omega_max", "must be finite and > 0"));
        }
        let d_omega = 2.0 * omega_max / points as f64;
        let mut planner = FftPlanner::new();
        Ok(Self {
            points,
            d_omega,
            dt: 2.0 * PI / (points as f64 * d_omega),
            forward: planner.plan_fft_forward(points),
            inverse: planner.plan_fft_inverse(points),
        })
    }

    pub fn len(&self) -> usize {
        self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points == 0
    }

    pub fn d_omega(&self) -> f64 {
        self.d_omega
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn omega_max(&self) -> f64 {
        0.5 * self.points as f64 * self.d_omega
    }

    /// Period of the time grid, 2π/δω.
    pub fn period(&self) -> f64 {
        self.points as f64 * self.dt
    }

    fn signed(&self, j: usize) -> f64 {
        if j < self.points / 2 {
            j as f64
        } else {
            j as f64 - self.points as f64
        }
    }

    pub fn omega(&self, j: usize) -> f64 {
        self.signed(j) * self.d_omega
    }

    pub fn time(&self, m: usize) -> f64 {
        self.signed(m) * self.dt
    }

    /// Grid index nearest to ω.
    pub fn index_of(&self, w: f64) -> usize {
        let j = (w / self.d_omega).round() as i64;
        j.rem_euclid(self.points as i64) as usize
    }

    /// Index of −ω_j.
    pub fn mirror(&self, j: usize) -> usize {
        (self.points - j) % self.points
    }

    /// X(ω_j) = Σ_m x(t_m) e^{iω_j t_m} dt, in place.
    pub fn to_freq(&self, buf: &mut [C64]) {
        self.inverse.process(buf);
        let dt = self.dt;
        buf.iter_mut().for_each(|v| *v *= dt);
    }

    /// x(t_m) = Σ_j X(ω_j) e^{−iω_j t_m} δω/2π, in place.
    pub fn to_time(&self, buf: &mut [C64]) {
        self.forward.process(buf);
        let s = self.d_omega / (2.0 * PI);
        buf.iter_mut().for_each(|v| *v *= s);
    }
}

/// W = ω_k − iΓᵇ/2.
pub fn pole(omega_k: f64, gamma_b: f64) -> C64 {
    C64::new(omega_k, -0.5 * gamma_b)
}

/// iG̃⁰_k(t) = (ω_k/W) e^{−iW|t|} on the time grid.
pub fn free_propagator_time(omega_k: f64, gamma_b: f64, grid: &FreqGrid) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); grid.len()];
    add_free_propagator(&mut out, 1.0, omega_k, gamma_b, grid);
    out
}

/// out += weight · iG̃⁰_k(t), by phase recurrence over the non-negative half
/// and mirroring (the function is even in t).
pub(crate) fn add_free_propagator(out: &mut [C64], weight: f64, omega_k: f64, gamma_b: f64, grid: &FreqGrid) {
    let w = pole(omega_k, gamma_b);
    let amp = weight * omega_k / w;
    let half = grid.len() / 2;
    let step = (-C64::i() * w * grid.dt()).exp();
    let mut phase = amp;
    // restart the recurrence periodically to bound round-off drift
    for m in 0..=half {
        if m % 4096 == 0 {
            phase = amp * (-C64::i() * w * (m as f64 * grid.dt())).exp();
        }
        out[m] += phase;
        if m > 0 && m < half {
            out[grid.len() - m] += phase;
        }
        phase *= step;
    }
}

/// G̃⁰_k(ω) = 2ω_k/(ω² − W²) at grid frequency ω.
pub fn free_propagator_freq(omega_k: f64, gamma_b: f64, w: f64) -> C64 {
    let p = pole(omega_k, gamma_b);
    2.0 * omega_k / (w * w - p * p)
}

use super::grid::{pole, FreqGrid};
use super::solver::ModeSolution;
use super::RunConfig;
use crate::chain::{CouplingProfile, ModeSet};
use crate::fit::{fit_line, upper_envelope, RateFit};
use crate::{Error, Result, C64};

/// Late-time window of G_k(t) used for the log-linear fit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateFitPolicy {
    /// The window ends at most at this fraction of the grid period.
    pub span_fraction: f64,
    /// Fraction of the usable span, counted from its end, that is fitted.
    pub window_fraction: f64,
    /// |G|/max|G| below which samples are noise.
    pub floor: f64,
    /// Residual rms of the ln|G|² envelope above which the rate is
    /// quality-flagged.
    pub fit_tol: f64,
    pub min_points: usize,
    /// Approximate number of samples kept in the window.
    pub samples: usize,
}

impl Default for RateFitPolicy {
    fn default() -> Self {
        Self { span_fraction: 0.35, window_fraction: 0.4, floor: 1e-10, fit_tol: 0.05, min_points: 32, samples: 4096 }
    }
}

impl RateFitPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.span_fraction > 0.0 && self.span_fraction < 0.5) {
            return Err(Error::param("fit.span_fraction", "must lie in (0, 0.5)"));
        }
        if !(self.window_fraction > 0.0 && self.window_fraction <= 1.0) {
            return Err(Error::param("fit.window_fraction", "must lie in (0, 1]"));
        }
        if !(self.floor > 0.0 && self.floor < 1.0) {
            return Err(Error::param("fit.floor", "must lie in (0, 1)"));
        }
        if !(self.fit_tol > 0.0) {
            return Err(Error::param("fit.fit_tol", "must be > 0"));
        }
        if self.min_points < 2 || self.samples < self.min_points {
            return Err(Error::param("fit.min_points", "need 2 <= min_points <= samples"));
        }
        Ok(())
    }
}

/// 4zΔ(1 − (ω_k/ω_p)²).
fn numerator(modes: &ModeSet, k: usize) -> f64 {
    let z = modes.profile.luttinger();
    let x = match modes.profile {
        CouplingProfile::Lattice { plasma, .. } => modes.omega[k] / plasma,
        CouplingProfile::ExponentialCutoff { .. } => 0.0,
    };
    4.0 * z * modes.spacing * (1.0 - x * x)
}

/// G_k(ω_j) = 4zΔ(1−(ω_k/ω_p)²)/(ω² − [ω_k − (Σ_k(ω) − Re Σ_k(0)) − iΓᵇ/2]²).
pub fn full_propagator(
    k: usize,
    modes: &ModeSet,
    sigma: &[C64],
    re_sigma0: f64,
    gamma_b: f64,
    grid: &FreqGrid,
) -> Vec<C64> {
    let num = numerator(modes, k);
    let w0 = pole(modes.omega[k], gamma_b);
    sigma
        .iter()
        .enumerate()
        .map(|(j, &s)| {
            let w = grid.omega(j);
            let p = w0 - (s - re_sigma0);
            num / (w * w - p * p)
        })
        .collect()
}

/// G(t) for G(ω) = num/(ω² − [ω_k − (Σ(ω) − re0) − iΓᵇ/2]²) with Σ the sum of
/// `sigmas`: analytic free pair plus the FFT of the remainder.
pub fn propagator_time(
    num: f64,
    omega_k: f64,
    sigmas: &[&[C64]],
    re_sigma0: f64,
    gamma_b: f64,
    grid: &FreqGrid,
) -> Vec<C64> {
    let w0 = pole(omega_k, gamma_b);
    let mut buf: Vec<C64> = (0..grid.len())
        .map(|j| {
            let w = grid.omega(j);
            let s: C64 = sigmas.iter().map(|s| s[j]).sum();
            let p = w0 - (s - re_sigma0);
            num / (w * w - p * p) - num / (w * w - w0 * w0)
        })
        .collect();
    grid.to_time(&mut buf);
    // FT⁻¹ of num/(ω² − W²) is num/(2iW)·e^{−iW|t|}; the remainder's FFT is
    // periodic, so the free pair is added with all its images
    // Σ_p e^{−iW|t+pT|} = e^{−iW|t|} + 2q cos(Wt)/(1 − q), q = e^{−iWT}
    let amp = num / (2.0 * C64::i() * w0);
    let q = (-C64::i() * w0 * grid.period()).exp();
    let images = 2.0 * q / (1.0 - q);
    for (m, v) in buf.iter_mut().enumerate() {
        let t = grid.time(m);
        *v += amp * ((-C64::i() * w0 * t.abs()).exp() + images * (w0 * t).cos());
    }
    buf
}

/// Γ from the upper envelope of ln|G(t)|² over the late-time window of the
/// non-negative times.
pub fn extract_rate(g: &[C64], grid: &FreqGrid, policy: &RateFitPolicy) -> Result<RateFit> {
    let half = grid.len() / 2;
    let amp: Vec<f64> = g[..=half].iter().map(|v| v.norm()).collect();
    let peak = amp.iter().cloned().fold(0.0, f64::max);
    let span = ((policy.span_fraction * grid.period() / grid.dt()) as usize).min(half);
    let cut = policy.floor * peak;
    let end = (0..=span).rev().find(|&m| amp[m] >= cut).unwrap_or(0);
    let start = ((1.0 - policy.window_fraction) * end as f64).floor() as usize;
    let stride = ((end - start) / policy.samples).max(1);
    let mut x = Vec::new();
    let mut y = Vec::new();
    for m in (start..=end).step_by(stride) {
        if amp[m] >= cut && amp[m] > 0.0 {
            x.push(grid.time(m));
            y.push(2.0 * amp[m].ln());
        }
    }
    if x.len() < policy.min_points {
        return Err(Error::WindowUnderrun { points: x.len(), needed: policy.min_points });
    }
    let f = fit_line(&x, &upper_envelope(&x, &y));
    Ok(RateFit { rate: -f.slope, residual: f.rms, points: f.points })
}

/// Fitted rate of one mode, either for a single bath or for all of them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeRate {
    /// 2n+1, or None for the total.
    pub bath: Option<usize>,
    pub fit: RateFit,
    /// Fitted rate minus Γᵇ, clamped at zero.
    pub gamma_in: f64,
    /// Residual within the policy tolerance.
    pub quality: bool,
}

/// Total rate and, if `cfg.per_bath`, one rate per bath with only that
/// bath's Σ inserted.
pub fn mode_rates(sol: &ModeSolution<'_>, modes: &ModeSet, cfg: &RunConfig, grid: &FreqGrid) -> Result<Vec<ModeRate>> {
    let num = numerator(modes, sol.k);
    let gb = cfg.gamma_b;
    let rate = |sigmas: &[&[C64]], re0: f64, bath: Option<usize>| -> Result<ModeRate> {
        let g = propagator_time(num, sol.omega, sigmas, re0, gb, grid);
        let fit = extract_rate(&g, grid, &cfg.fit)?;
        Ok(ModeRate { bath, fit, gamma_in: (fit.rate - gb).max(0.0), quality: fit.residual <= cfg.fit.fit_tol })
    };
    let all: Vec<&[C64]> = sol.sigma.iter().map(|s| s.as_slice()).collect();
    let mut out = vec![rate(&all, sol.re_sigma0.iter().sum(), None)?];
    if cfg.per_bath {
        for ((s, &re0), &b) in sol.sigma.iter().zip(sol.re_sigma0).zip(sol.baths) {
            out.push(rate(&[s.as_slice()], re0, Some(b))?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_decay_rate() {
        let g = FreqGrid::new(30.0, 1 << 16).unwrap();
        let gb = 0.02;
        let zero = vec![C64::new(0.0, 0.0); g.len()];
        let t = propagator_time(1.0, 4.0, &[&zero], 0.0, gb, &g);
        let fit = extract_rate(&t, &g, &RateFitPolicy::default()).unwrap();
        assert!((fit.rate / gb - 1.0).abs() < 1e-6, "{}", fit.rate);
    }

    #[test]
    fn constant_self_energy_shifts_rate() {
        // Σ = iγ/2 everywhere: pole moves to ω_k − iγ/2 − iΓᵇ/2
        let g = FreqGrid::new(30.0, 1 << 16).unwrap();
        let (gb, extra) = (0.02, 0.05);
        let s = vec![C64::new(0.3, 0.5 * extra); g.len()];
        let t = propagator_time(1.0, 4.0, &[&s], 0.3, gb, &g);
        let fit = extract_rate(&t, &g, &RateFitPolicy::default()).unwrap();
        assert!((fit.rate / (gb + extra) - 1.0).abs() < 1e-3, "{}", fit.rate);
    }
}

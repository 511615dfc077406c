//! Golden-rule decay rates of a photon into 2n+1-photon baths in the
//! thermodynamic limit, the leading-log closed form and the total-rate power
//! law.
//!
//! The numeric route evaluates
//! Γ_{k;2n+1} = 2E_J² f_k² e^{−∫f²/Δ} e^{−c}/(2n+1)! ∫dt e^{iω_k t} [I(t) + c]^{2n+1}
//! with I(t) = ∫_{Δ/2} dω (f²/Δ)(ω) e^{−iωt} and c = 2zγ_{1/2}.
//!
//! Grid: f²/Δ is sampled on a uniform comb ω_j = j·h (h = Δ/200 by default)
//! starting at Δ/2 with a half trapezoid weight, and truncated a little above
//! the largest requested frequency (a 2n+1-photon state at ω_k contains no
//! photon above ω_k). One FFT gives I(t) on the periodic time grid, the power
//! is damped by e^{−ε|t|}, and an inverse FFT gives the transform at every
//! comb frequency at once. The comb acts as a discrete bath of spacing h; with
//! ε ≫ h it is indistinguishable from the continuum (error ~ e^{−2πε/h}).
//! Results for ε = Δ/20 and Δ/40 are Richardson-extrapolated to ε → 0.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::chain::{CouplingProfile, ModeSet};
use crate::special::{gamma, gamma_half_exact, GammaDerivatives, EULER_GAMMA};
use crate::{Error, Result, C64};

/// Parameters of the thermodynamic-limit golden-rule calculation.
#[derive(Clone, Debug, PartialEq)]
pub struct FgrSpec {
    pub ej: f64,
    /// Δ.
    pub spacing: f64,
    pub profile: CouplingProfile,
    pub n_max: usize,
    pub gamma_half: f64,
    /// Comb step h in units of Δ.
    pub comb_step: f64,
    /// Abel regularization factors (ε₁ > ε₂) in units of Δ.
    pub epsilons: (f64, f64),
    /// Largest accepted |J(ε₂) − J(ε₁)|/|J(0)|.
    pub extrapolation_tol: f64,
}

impl FgrSpec {
    pub fn new(ej: f64, spacing: f64, profile: CouplingProfile) -> Self {
        Self {
            ej,
            spacing,
            profile,
            n_max: 4,
            gamma_half: gamma_half_exact(),
            comb_step: 1.0 / 200.0,
            epsilons: (1.0 / 20.0, 1.0 / 40.0),
            extrapolation_tol: 0.25,
        }
    }

    pub fn luttinger(&self) -> f64 {
        self.profile.luttinger()
    }

    /// ω_c = min(ω_p, Γ_0), or the exponential cutoff.
    pub fn cutoff(&self) -> f64 {
        match self.profile {
            CouplingProfile::Lattice { plasma, gamma0, .. } => plasma.min(gamma0),
            CouplingProfile::ExponentialCutoff { cutoff, .. } => cutoff,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_max < 1 {
            return Err(Error::param("n_max", "must be >= 1"));
        }
        if !(self.spacing > 0.0) {
            return Err(Error::param("spacing", "must be > 0"));
        }
        if !(self.spacing < self.cutoff()) {
            return Err(Error::param("spacing", "need Δ < ω_c"));
        }
        let (e1, e2) = self.epsilons;
        if !(self.comb_step > 0.0 && e2 > 0.0 && e1 > e2) {
            return Err(Error::param("epsilons", "need comb_step > 0 and ε₁ > ε₂ > 0"));
        }
        if e2 < 4.0 * self.comb_step {
            return Err(Error::param("epsilons", "ε must exceed the comb step several times"));
        }
        Ok(())
    }

    /// e^{−∫f²/Δ} e^{−2zγ_{1/2}}.
    fn debye_waller(&self) -> f64 {
        let c = 2.0 * self.luttinger() * self.gamma_half;
        (-self.profile.integral(0.5 * self.spacing) - c).exp()
    }

    fn bath_prefactor(&self, n: usize, w: f64, debye_waller: f64) -> f64 {
        let fact: f64 = (1..=2 * n + 1).map(|i| i as f64).product();
        2.0 * self.ej * self.ej * self.profile.coupling(w, self.spacing) * debye_waller / fact
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Numeric,
    ClosedForm,
    Discrete,
}

impl Method {
    pub fn label(&self) -> &'static str {
        match self {
            Method::Numeric => "numeric",
            Method::ClosedForm => "closed_form",
            Method::Discrete => "discrete",
        }
    }
}

/// Rates of one bath on a frequency list (both in units of Δ).
#[derive(Clone, Debug, PartialEq)]
pub struct BathRateCurve {
    /// 2n+1.
    pub bath: usize,
    pub omega_over_delta: Vec<f64>,
    pub rate_over_delta: Vec<f64>,
    pub method: Method,
}

/// Reusable FFT state for [`bath_rate_numeric`] over many frequencies.
pub struct FgrEngine {
    spec: FgrSpec,
    h: f64,
    len: usize,
    dt: f64,
    /// I(t_m) on the periodic grid.
    i_t: Vec<C64>,
    fft: Arc<dyn Fft<f64>>,
    /// Comb indices 0..keep of the transform are retained.
    keep: usize,
    /// Transforms at (ε₁, ε₂) per n, indexed by comb index.
    cache: Vec<Option<[Vec<f64>; 2]>>,
    /// Largest |J|·f² per n over the retained comb.
    peak: Vec<f64>,
    debye_waller: f64,
}

impl FgrEngine {
    /// Grid good for every bath up to `spec.n_max` and ω ≤ `omega_max`.
    pub fn new(spec: FgrSpec, omega_max: f64) -> Result<Self> {
        spec.validate()?;
        let d = spec.spacing;
        let h = spec.comb_step * d;
        let top = spec.profile.upper_limit().min(omega_max + 20.0 * d);
        let span = (2 * spec.n_max + 1) as f64 * top + omega_max + 50.0 * d;
        let len = ((span / h).ceil() as usize).next_power_of_two();
        let dt = 2.0 * PI / (len as f64 * h);

        // index j0 = Δ/(2h) carries half weight
        let j0 = (0.5 * d / h).round() as usize;
        let j_top = ((top / h).floor() as usize).min(len - 1);
        let mut buf = vec![C64::new(0.0, 0.0); len];
        for (j, b) in buf.iter_mut().enumerate().take(j_top + 1).skip(j0) {
            let weight = if j == j0 { 0.5 } else { 1.0 };
            *b = C64::new(weight * h * spec.profile.density(j as f64 * h), 0.0);
        }
        let mut planner = FftPlanner::<f64>::new();
        planner.plan_fft_forward(len).process(&mut buf);
        let fft = planner.plan_fft_inverse(len);
        let keep = ((omega_max / h).ceil() as usize + 4).min(len / 2);
        let n_max = spec.n_max;
        let debye_waller = spec.debye_waller();
        Ok(Self {
            spec,
            h,
            len,
            dt,
            i_t: buf,
            fft,
            keep,
            cache: vec![None; n_max + 1],
            peak: vec![0.0; n_max + 1],
            debye_waller,
        })
    }

    pub fn spec(&self) -> &FgrSpec {
        &self.spec
    }

    /// Number of points of the periodic grid.
    pub fn grid_len(&self) -> usize {
        self.len
    }

    fn transforms(&mut self, n: usize) -> &[Vec<f64>; 2] {
        if self.cache[n].is_none() {
            let c = 2.0 * self.spec.luttinger() * self.spec.gamma_half;
            let p = (2 * n + 1) as i32;
            let base: Vec<C64> = self.i_t.iter().map(|&v| (v + c).powi(p)).collect();
            let d = self.spec.spacing;
            let eps = [self.spec.epsilons.0 * d, self.spec.epsilons.1 * d];
            let mut out = [Vec::new(), Vec::new()];
            for (slot, e) in out.iter_mut().zip(eps) {
                let mut work: Vec<C64> = base
                    .iter()
                    .enumerate()
                    .map(|(m, &v)| v * (-e * m.min(self.len - m) as f64 * self.dt).exp())
                    .collect();
                self.fft.process(&mut work);
                *slot = work[..self.keep].iter().map(|w| w.re * self.dt).collect();
            }
            let start = ((2 * n + 1) as f64 * 0.5 * d / self.h).ceil() as usize;
            self.peak[n] = (start.max(1)..self.keep)
                .map(|i| out[1][i].abs() * self.spec.profile.coupling(i as f64 * self.h, d))
                .fold(0.0, f64::max);
            self.cache[n] = Some(out);
        }
        self.cache[n].as_ref().unwrap()
    }

    /// Γ_{k;2n+1} at frequency `w` (absolute units).
    pub fn rate(&mut self, n: usize, w: f64) -> Result<f64> {
        if n < 1 || n > self.spec.n_max {
            return Err(Error::param("n", "bath index outside 1..=n_max"));
        }
        if w < (2 * n + 1) as f64 * 0.5 * self.spec.spacing {
            return Ok(0.0);
        }
        let x = w / self.h;
        if x + 2.0 >= self.keep as f64 {
            return Err(Error::param("omega", "frequency beyond the engine grid"));
        }
        let [a, b] = self.transforms(n);
        let (j1, j2) = (interp(a, x), interp(b, x));
        let j0 = 2.0 * j2 - j1;
        let change = (j2 - j1).abs() / j0.abs().max(1e-300);
        let pref = self.spec.bath_prefactor(n, w, self.debye_waller);
        // steep high-order baths leak Lorentzian tails onto their far-below-peak
        // values; only rates within 1% of the peak are checked
        let weight = j0.abs() * self.spec.profile.coupling(w, self.spec.spacing);
        if change > self.spec.extrapolation_tol && weight > 1e-2 * self.peak[n] {
            return Err(Error::Extrapolation(change));
        }
        // J ≥ 0 exactly; small negative values are extrapolation noise
        Ok(pref * j0.max(0.0))
    }

    pub fn curve(&mut self, n: usize, omegas: &[f64]) -> Result<BathRateCurve> {
        let d = self.spec.spacing;
        let rates = omegas.iter().map(|&w| self.rate(n, w).map(|r| r / d)).collect::<Result<_>>()?;
        Ok(BathRateCurve {
            bath: 2 * n + 1,
            omega_over_delta: omegas.iter().map(|w| w / d).collect(),
            rate_over_delta: rates,
            method: Method::Numeric,
        })
    }
}

/// Cubic Lagrange interpolation of samples at integer abscissae.
fn interp(y: &[f64], x: f64) -> f64 {
    let i = (x.floor() as usize).max(1);
    let t = x - i as f64;
    let (p0, p1, p2, p3) = (y[i - 1], y[i], y[i + 1], y[i + 2]);
    -t * (t - 1.0) * (t - 2.0) / 6.0 * p0 + (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0 * p1
        - (t + 1.0) * t * (t - 2.0) / 2.0 * p2
        + (t + 1.0) * t * (t - 1.0) / 6.0 * p3
}

/// Single-point golden-rule rate of bath 2n+1 at ω (absolute units).
pub fn bath_rate_numeric(n: usize, w: f64, spec: &FgrSpec) -> Result<f64> {
    if w < (2 * n + 1) as f64 * 0.5 * spec.spacing {
        return Ok(0.0);
    }
    let mut s = spec.clone();
    s.n_max = s.n_max.max(n);
    FgrEngine::new(s, w)?.rate(n, w)
}

/// Leading-log closed form of Γ_{k;2n+1} for the exponential-cutoff
/// profile, valid for Δ ≪ ω ≪ ω_c.
///
/// The overall factor is 4(2z)^{2n+2}: the series derived from the same
/// time integral as [`bath_rate_numeric`] with the 2E_J² prefactor.
pub fn bath_rate_closed_form(n: usize, w: f64, spec: &FgrSpec, table: &GammaDerivatives) -> Result<f64> {
    let d = spec.spacing;
    if w < (2 * n + 1) as f64 * 0.5 * d {
        return Ok(0.0);
    }
    if 2 * n > table.max_order() {
        return Err(Error::DerivativeTable { order: 2 * n, max: table.max_order() });
    }
    let z = spec.luttinger();
    let wc = spec.cutoff();
    let g = EULER_GAMMA;
    let gh = spec.gamma_half;
    let big = 2 * n + 1;
    let log_w = (w / (0.5 * d)).ln();
    let mut sum = 0.0;
    for m in 1..=big {
        for l in 0..=(m - 1) / 2 {
            let q = m - 2 * l - 1;
            for r in 0..=q {
                for p in 0..=r {
                    let sign = if (m + l + p - 1) % 2 == 0 { 1.0 } else { -1.0 };
                    let coeff = binom(big, m) * binom(m, 2 * l + 1) * binom(q, r) * binom(r, p);
                    sum += sign
                        * coeff
                        * gh.powi((big - m) as i32)
                        * g.powi((q - r) as i32)
                        * PI.powi((2 * l + 1) as i32)
                        * table.get(r - p)?
                        * log_w.powi(p as i32);
                }
            }
        }
    }
    let fact: f64 = (1..=big).map(|i| i as f64).product();
    let pref = 4.0 * (2.0 * z).powi((2 * n + 2) as i32) * spec.ej * spec.ej * (-2.0 * w / wc).exp() / (w * w)
        * (0.5 * d / wc).powf(2.0 * z)
        * (2.0 * z * (g - gh)).exp();
    Ok(d * pref * sum / fact)
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Total thermodynamic-limit rate, Γ/Δ = (2πz/Γ(2z)) E_J² ω^{2z−2} ω_c^{−2z} e^{−2ω/ω_c}.
pub fn total_rate_luttinger(w: f64, spec: &FgrSpec) -> f64 {
    let z = spec.luttinger();
    let wc = spec.cutoff();
    spec.spacing * 2.0 * PI * z / gamma(2.0 * z) * spec.ej * spec.ej * w.powf(2.0 * z - 2.0) / wc.powf(2.0 * z)
        * (-2.0 * w / wc).exp()
}

/// Controls for the brute-force tuple sum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscreteSum {
    pub ej: f64,
    /// FWHM of the Lorentzian replacing the energy delta.
    pub width: f64,
    /// Largest admissible number of ordered tuples.
    pub budget: u128,
}

/// Γ_{k;2n+1} of a finite mode list as an explicit sum over ordered
/// (2n+1)-tuples, 2πδ replaced by a normalized Lorentzian:
/// 2E_J² f_k² e^{−Σf²}/(2n+1)! Σ_{k₁..k_{2n+1}} Π f² · 2π L(ω_k − Σω).
pub fn bath_rate_discrete(n: usize, k: usize, modes: &ModeSet, ctl: &DiscreteSum) -> Result<f64> {
    if k >= modes.len() {
        return Err(Error::param("k", format!("mode {k} outside a set of {}", modes.len())));
    }
    bath_rate_discrete_at(n, modes.omega[k], modes.f2[k], modes, ctl)
}

/// The same tuple sum at an arbitrary frequency `w` for a mode of weight `f2`.
pub fn bath_rate_discrete_at(n: usize, w: f64, f2: f64, modes: &ModeSet, ctl: &DiscreteSum) -> Result<f64> {
    let idx: Vec<usize> = (0..modes.len()).filter(|&j| modes.is_bath_mode(j)).collect();
    let order = 2 * n + 1;
    let count = (idx.len() as u128).checked_pow(order as u32).unwrap_or(u128::MAX);
    if count > ctl.budget {
        return Err(Error::TupleBudget { count, budget: ctl.budget });
    }
    let half = 0.5 * ctl.width;
    let mut total = 0.0;
    fn walk(depth: usize, w: f64, wt: f64, idx: &[usize], modes: &ModeSet, f: &mut dyn FnMut(f64, f64)) {
        if depth == 0 {
            f(w, wt);
            return;
        }
        for &j in idx {
            walk(depth - 1, w + modes.omega[j], wt * modes.f2[j], idx, modes, f);
        }
    }
    walk(order, 0.0, 1.0, &idx, modes, &mut |e, wt| {
        let x = w - e;
        total += wt * 2.0 * half / (x * x + half * half);
    });
    let fact: f64 = (1..=order).map(|i| i as f64).product();
    let pref = 2.0 * ctl.ej * ctl.ej * f2 * (-modes.sum_f2()).exp() / fact;
    Ok(pref * total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> FgrSpec {
        FgrSpec::new(1.0, 1.0, CouplingProfile::ExponentialCutoff { z: 0.5, cutoff: 1e3 })
    }

    #[test]
    fn threshold() {
        let s = spec();
        assert_eq!(bath_rate_numeric(1, 1.4, &s).unwrap(), 0.0);
        let t = GammaDerivatives::new(9);
        assert_eq!(bath_rate_closed_form(2, 2.4, &s, &t).unwrap(), 0.0);
    }

    #[test]
    fn luttinger_half() {
        let s = FgrSpec::new(3.0, 1.0, CouplingProfile::ExponentialCutoff { z: 0.5, cutoff: 50.0 });
        let w: f64 = 7.0;
        let want = PI * 9.0 * (-2.0 * w / 50.0).exp() / (w * 50.0);
        assert!((total_rate_luttinger(w, &s) - want).abs() < 1e-14 * want);
        let zero = FgrSpec::new(0.0, 1.0, s.profile);
        assert_eq!(total_rate_luttinger(w, &zero), 0.0);
    }

    #[test]
    fn table_guard() {
        let s = spec();
        let t = GammaDerivatives::new(3);
        assert!(matches!(bath_rate_closed_form(2, 100.0, &s, &t), Err(Error::DerivativeTable { .. })));
    }

    #[test]
    fn interpolation_exact_for_cubics() {
        let y: Vec<f64> = (0..10).map(|i| (i as f64).powi(3) - 2.0 * i as f64).collect();
        let x: f64 = 4.3;
        assert!((interp(&y, x) - (x.powi(3) - 2.0 * x)).abs() < 1e-12);
    }

    #[test]
    fn tuple_budget() {
        let p = CouplingProfile::ExponentialCutoff { z: 0.5, cutoff: 100.0 };
        let m = ModeSet::synthetic(vec![0.5, 1.5, 2.5], vec![0.1; 3], 1.0, p);
        let ctl = DiscreteSum { ej: 1.0, width: 0.1, budget: 10 };
        assert!(bath_rate_discrete(1, 2, &m, &ctl).is_err());
    }
}

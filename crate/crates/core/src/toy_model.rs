//! Resonant level coupled to a discrete, broadened bath.
//!
//! Energies are in arbitrary units; the bath spacing Δ sets the natural scale
//! and all tolerances below are relative to it. The propagator convention is
//! G(t) = ⟨d| e^{−iHt} |d⟩ for t ≥ 0, so decaying poles sit at Im z < 0.

use std::f64::consts::PI;

use crate::fit::fit_line;
pub use crate::fit::RateFit;
use crate::{Error, Result, C64};

/// One bath level of the general (non-equidistant) variant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BathMode {
    pub energy: f64,
    pub coupling: f64,
    pub broadening: f64,
}

/// Resonant level plus bath.
///
/// With `modes == None` the bath is equidistant: levels at
/// ε_d + δ_min + nΔ, all with coupling g and broadening η, and the closed cot
/// form is used for the self-energy. `truncation` only matters when the
/// equidistant bath is materialized with [`ToyBathSpec::truncated_modes`].
#[derive(Clone, Debug, PartialEq)]
pub struct ToyBathSpec {
    pub epsilon_d: f64,
    pub delta_min: f64,
    pub spacing: f64,
    pub coupling: f64,
    pub broadening: f64,
    pub truncation: usize,
    pub modes: Option<Vec<BathMode>>,
}

impl ToyBathSpec {
    /// Equidistant bath with ε_d = δ_min = 0 parameterized by its golden-rule rate.
    pub fn equidistant(spacing: f64, gamma_fgr: f64, broadening: f64) -> Self {
        Self {
            epsilon_d: 0.0,
            delta_min: 0.0,
            spacing,
            coupling: (gamma_fgr * spacing / (2.0 * PI)).sqrt(),
            broadening,
            truncation: 1000,
            modes: None,
        }
    }

    /// Arbitrary finite bath. `spacing` is only used as the tolerance scale.
    pub fn general(epsilon_d: f64, spacing: f64, modes: Vec<BathMode>) -> Self {
        Self {
            epsilon_d,
            delta_min: 0.0,
            spacing,
            coupling: 0.0,
            broadening: 0.0,
            truncation: modes.len(),
            modes: Some(modes),
        }
    }

    /// 2π|g|²/Δ.
    pub fn gamma_fgr(&self) -> f64 {
        2.0 * PI * self.coupling * self.coupling / self.spacing
    }

    pub fn max_broadening(&self) -> f64 {
        match &self.modes {
            None => self.broadening,
            Some(m) => m.iter().map(|b| b.broadening).fold(0.0, f64::max),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.spacing > 0.0) {
            return Err(Error::param("spacing", "must be > 0"));
        }
        if !(self.broadening >= 0.0) {
            return Err(Error::param("broadening", "must be >= 0"));
        }
        if self.truncation < 1 {
            return Err(Error::param("truncation", "must be >= 1"));
        }
        if self.delta_min.abs() > 0.5 * self.spacing {
            return Err(Error::param("delta_min", "must lie in [-Δ/2, Δ/2]"));
        }
        if let Some(modes) = &self.modes {
            if modes.iter().any(|m| !(m.broadening >= 0.0) || !m.energy.is_finite()) {
                return Err(Error::param("modes", "energies finite, broadenings >= 0"));
            }
        }
        Ok(())
    }

    /// Equidistant bath cut to 2·truncation + 1 levels around ε_d + δ_min.
    pub fn truncated_modes(&self) -> Vec<BathMode> {
        if let Some(m) = &self.modes {
            return m.clone();
        }
        let n = self.truncation as i64;
        (-n..=n)
            .map(|j| BathMode {
                energy: self.epsilon_d + self.delta_min + j as f64 * self.spacing,
                coupling: self.coupling,
                broadening: self.broadening,
            })
            .collect()
    }

    fn pole_tol(&self) -> f64 {
        1e-10 * self.spacing
    }
}

/// Self-energy of a flat continuum of half-width D and density ν.
///
/// Σ(z) = ν|g|² log w with w = −(D² − ω² − χ² + 2iχD)/((ω − D)² + χ²),
/// on the branch arg w ∈ (−2π, 0] so that Im Σ → −πν|g|² just below the
/// real axis inside the band.
pub fn sigma_continuum(z: C64, density: f64, coupling: f64, half_bandwidth: f64) -> Result<C64> {
    if !(density > 0.0) || !(half_bandwidth > 0.0) {
        return Err(Error::param("continuum", "density and bandwidth must be > 0"));
    }
    let d = half_bandwidth;
    if (z - d).norm() == 0.0 || (z + d).norm() == 0.0 {
        return Err(Error::Singular(format!("z = {z} is a band edge")));
    }
    let (w, chi) = (z.re, z.im);
    let num = C64::new(d * d - w * w - chi * chi, 2.0 * chi * d);
    let den = (w - d).powi(2) + chi * chi;
    let arg = -num / den;
    let mut phase = arg.arg();
    if phase > 0.0 {
        phase -= 2.0 * PI;
    }
    let scale = density * coupling * coupling;
    Ok(scale * C64::new(arg.norm().ln(), phase))
}

/// cot w without overflow for large |Im w|.
fn cot(w: C64) -> Option<C64> {
    let i = C64::i();
    let (num, den) = if w.im < 0.0 {
        let e = (-2.0 * i * w).exp();
        (i * (1.0 + e), 1.0 - e)
    } else {
        let e = (2.0 * i * w).exp();
        (i * (e + 1.0), e - 1.0)
    };
    if den.norm() < 1e-300 {
        None
    } else {
        Some(num / den)
    }
}

/// Value and z-derivative of the discrete-bath self-energy.
fn sigma_and_derivative(z: C64, spec: &ToyBathSpec) -> Result<(C64, C64)> {
    let tol = spec.pole_tol();
    match &spec.modes {
        None => {
            let a = PI / spec.spacing;
            let shifted = z - spec.epsilon_d - spec.delta_min + C64::i() * (0.5 * spec.broadening);
            // distance to the nearest bath pole
            let n = (shifted.re / spec.spacing).round();
            let dist = (shifted - n * spec.spacing).norm();
            if dist < tol {
                return Err(Error::Singular(format!("z = {z} within pole_tol of a bath level")));
            }
            let c = cot(a * shifted).ok_or_else(|| Error::Singular(format!("z = {z}")))?;
            let half = 0.5 * spec.gamma_fgr();
            Ok((half * c, -half * a * (1.0 + c * c)))
        }
        Some(modes) => {
            let mut s = C64::new(0.0, 0.0);
            let mut ds = C64::new(0.0, 0.0);
            for m in modes {
                let den = z - m.energy + C64::i() * (0.5 * m.broadening);
                if den.norm() < tol {
                    return Err(Error::Singular(format!("z = {z} within pole_tol of a bath level")));
                }
                let g2 = m.coupling * m.coupling;
                s += g2 / den;
                ds -= g2 / (den * den);
            }
            Ok((s, ds))
        }
    }
}

/// Σ_d(z) of the discrete bath: closed cot form for the equidistant bath,
/// direct sum Σ g_n²/(z − ε_n + iη_n/2) otherwise.
pub fn sigma_discrete(z: C64, spec: &ToyBathSpec) -> Result<C64> {
    sigma_and_derivative(z, spec).map(|(s, _)| s)
}

/// Rectangle of initial guesses for the pole search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchRect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub pitch: f64,
}

impl SearchRect {
    /// Re z ∈ ε_d ± 5Δ (widened to cover general bath levels),
    /// Im z ∈ [−2·max(η, Γ_FGR), −10⁻⁶Δ], pitch Δ/4.
    pub fn default_for(spec: &ToyBathSpec) -> Self {
        let d = spec.spacing;
        let (mut lo, mut hi) = (spec.epsilon_d, spec.epsilon_d);
        let mut width = spec.broadening.max(spec.gamma_fgr());
        if let Some(modes) = &spec.modes {
            for m in modes {
                lo = lo.min(m.energy);
                hi = hi.max(m.energy);
                width = width.max(m.broadening);
            }
        }
        Self {
            re_min: lo - 5.0 * d,
            re_max: hi + 5.0 * d,
            im_min: -2.0 * width.max(1e-6 * d),
            im_max: -1e-6 * d,
            pitch: 0.25 * d,
        }
    }

    fn contains(&self, z: C64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im < 0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pole {
    pub z: C64,
    pub residue: C64,
}

/// Poles of G_d(z) = 1/(z − ε_d − Σ_d(z)) inside a search rectangle.
#[derive(Clone, Debug, PartialEq)]
pub struct PoleSet {
    pub poles: Vec<Pole>,
    /// −2·min |Im z_p|.
    pub dominant_rate: f64,
    /// Seeds whose iteration did not converge to a root inside the rectangle.
    pub failed_seeds: usize,
}

impl PoleSet {
    /// Σ_p r_p e^{−i z_p t}: the pole expansion of G_d(t) restricted to the
    /// poles that were found.
    pub fn propagator(&self, t: f64) -> C64 {
        self.poles.iter().map(|p| p.residue * (-C64::i() * p.z * t).exp()).sum()
    }
}

fn newton(spec: &ToyBathSpec, mut z: C64, max_step: f64) -> Option<C64> {
    let tol = spec.pole_tol();
    for _ in 0..200 {
        let (s, ds) = sigma_and_derivative(z, spec).ok()?;
        let f = z - spec.epsilon_d - s;
        if f.norm() < tol {
            return Some(z);
        }
        let mut step = f / (1.0 - ds);
        if !step.re.is_finite() || !step.im.is_finite() {
            return None;
        }
        let len = step.norm();
        if len > max_step {
            step *= max_step / len;
        }
        z -= step;
    }
    None
}

/// First-order pole estimate next to each bath level, plus a ring of radius
/// g_n around the level.
fn level_seeds(spec: &ToyBathSpec, modes: &[BathMode]) -> Vec<C64> {
    let mut out = Vec::new();
    for (n, m) in modes.iter().enumerate() {
        let level = C64::new(m.energy, -0.5 * m.broadening);
        let rest: C64 = modes
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != n)
            .map(|(_, o)| o.coupling * o.coupling / (level - C64::new(o.energy, -0.5 * o.broadening)))
            .sum();
        let den = level - spec.epsilon_d - rest;
        if den.norm() > 0.0 && den.re.is_finite() && den.im.is_finite() {
            out.push(level + m.coupling * m.coupling / den);
        }
        let r = m.coupling.max(spec.pole_tol() * 1e3);
        out.extend((0..8).map(|k| level + r * C64::from_polar(1.0, k as f64 * PI / 4.0)));
    }
    out
}

/// All roots of z − ε_d − Σ_d(z) in `rect`, from damped Newton iterations
/// seeded on a grid with the rectangle's pitch and next to each bath level.
pub fn find_poles(spec: &ToyBathSpec, rect: &SearchRect) -> Result<PoleSet> {
    spec.validate()?;
    let uncoupled = match &spec.modes {
        None => spec.coupling == 0.0,
        Some(m) => m.iter().all(|b| b.coupling == 0.0),
    };
    if uncoupled {
        let pole = Pole { z: C64::new(spec.epsilon_d, 0.0), residue: C64::new(1.0, 0.0) };
        return Ok(PoleSet { poles: vec![pole], dominant_rate: 0.0, failed_seeds: 0 });
    }
    if spec.modes.is_none() && !(spec.broadening > 0.0) {
        return Err(Error::param("broadening", "pole search needs η > 0"));
    }
    let dedup = 1e-6 * spec.spacing;
    let nr = ((rect.re_max - rect.re_min) / rect.pitch).floor() as usize + 1;
    let ni = ((rect.im_max - rect.im_min) / rect.pitch).floor() as usize + 1;
    let mut seeds: Vec<C64> = (0..nr)
        .flat_map(|a| (0..ni).map(move |b| (a, b)))
        .map(|(a, b)| C64::new(rect.re_min + a as f64 * rect.pitch, rect.im_max - b as f64 * rect.pitch))
        .collect();
    // A weakly coupled, narrow level hides its pole inside a radius ~ g_n of
    // ε_n − iη_n/2, far below the grid pitch.
    if let Some(modes) = &spec.modes {
        seeds.extend(level_seeds(spec, modes));
    }
    let mut roots: Vec<C64> = Vec::new();
    let mut failed = 0;
    for seed in seeds {
        match newton(spec, seed, 0.5 * spec.spacing) {
            Some(z) if rect.contains(z) => {
                if !roots.iter().any(|r| (r - z).norm() < dedup) {
                    roots.push(z);
                }
            }
            _ => failed += 1,
        }
    }
    if roots.is_empty() {
        return Err(Error::NoPoles { failed });
    }
    roots.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    let poles: Vec<Pole> = roots
        .into_iter()
        .map(|z| {
            let (_, ds) = sigma_and_derivative(z, spec)?;
            Ok(Pole { z, residue: 1.0 / (1.0 - ds) })
        })
        .collect::<Result<_>>()?;
    let slowest = poles.iter().map(|p| p.z.im.abs()).fold(f64::INFINITY, f64::min);
    Ok(PoleSet { poles, dominant_rate: 2.0 * slowest, failed_seeds: failed })
}

/// Uniformly sampled complex signal.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    pub t0: f64,
    pub dt: f64,
    pub values: Vec<C64>,
}

impl TimeSeries {
    pub fn new(t0: f64, dt: f64, values: Vec<C64>) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::param("dt", "time step must be > 0"));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::param("values", "non-finite sample"));
        }
        Ok(Self { t0, dt, values })
    }

    pub fn time(&self, j: usize) -> f64 {
        self.t0 + j as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.values.len()).map(|j| self.time(j)).collect()
    }

    /// |G(t)|².
    pub fn survival(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }
}

/// Revival-sum propagator for the equidistant bath with the default revival
/// cutoff ⌈t_max/t_H⌉ + 2.
pub fn propagator_revival_sum(spec: &ToyBathSpec, t0: f64, dt: f64, len: usize) -> Result<TimeSeries> {
    let t_h = 2.0 * PI / spec.spacing;
    let t_max = t0 + dt * len.saturating_sub(1) as f64;
    let m_max = (t_max / t_h).ceil() as usize + 2;
    propagator_revival_sum_with_order(spec, t0, dt, len, m_max)
}

/// G_d(t) = e^{−iε_d t} [ e^{−Γt/2} + Σ_{m≥1} Θ(s_m) e^{−ηm t_H/2} e^{−iδ_min m t_H}
/// e^{−Γ s_m/2} Σ_{j=1}^{m} C(m−1, j−1) (−Γ s_m)^j / j! ],  s_m = t − m t_H,
/// with Γ = Γ_FGR. Terms are accumulated from logarithms with explicit signs.
pub fn propagator_revival_sum_with_order(
    spec: &ToyBathSpec,
    t0: f64,
    dt: f64,
    len: usize,
    m_max: usize,
) -> Result<TimeSeries> {
    spec.validate()?;
    if spec.modes.is_some() {
        return Err(Error::param("modes", "revival sum needs the equidistant bath"));
    }
    if t0 < 0.0 {
        return Err(Error::param("t0", "times must be >= 0"));
    }
    let t_h = 2.0 * PI / spec.spacing;
    let t_max = t0 + dt * len.saturating_sub(1) as f64;
    let needed = (t_max / t_h).ceil() as usize;
    if m_max < needed {
        return Err(Error::RevivalOrder { given: m_max, needed });
    }
    let gamma = spec.gamma_fgr();
    let eta = spec.broadening;
    // ln C(m−1, j−1) − ln j! needs ln k! up to m_max.
    let mut ln_fact = vec![0.0; m_max + 2];
    for k in 1..ln_fact.len() {
        ln_fact[k] = ln_fact[k - 1] + (k as f64).ln();
    }
    let mut values = Vec::with_capacity(len);
    for j in 0..len {
        let t = t0 + j as f64 * dt;
        let mut g = C64::new((-0.5 * gamma * t).exp(), 0.0);
        if gamma > 0.0 {
            for m in 1..=m_max {
                let s = t - m as f64 * t_h;
                if s <= 0.0 {
                    break;
                }
                let ln_x = (gamma * s).ln();
                let base = -0.5 * eta * m as f64 * t_h - 0.5 * gamma * s;
                let mut inner = 0.0;
                for k in 1..=m {
                    let ln_binom = ln_fact[m - 1] - ln_fact[k - 1] - ln_fact[m - k];
                    let mag = (ln_binom + k as f64 * ln_x - ln_fact[k] + base).exp();
                    inner += if k % 2 == 0 { mag } else { -mag };
                }
                let phase = C64::from_polar(1.0, -spec.delta_min * m as f64 * t_h);
                g += phase * inner;
            }
        }
        values.push(g * C64::from_polar(1.0, -spec.epsilon_d * t));
    }
    TimeSeries::new(t0, dt, values)
}

/// Controls for the late-time exponential fit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitPolicy {
    /// Fraction of the series, counted from the end, used for the fit.
    pub window_fraction: f64,
    /// Samples with |G|² below this are discarded.
    pub floor: f64,
    /// Maximum RMS residual of ln|G|².
    pub fit_tol: f64,
    pub min_points: usize,
}

impl Default for FitPolicy {
    fn default() -> Self {
        Self { window_fraction: 0.4, floor: 1e-12, fit_tol: 1e-2, min_points: 8 }
    }
}

/// Γ from a straight-line fit of ln|G|² against t over the late-time window.
pub fn late_time_rate(series: &TimeSeries, policy: &FitPolicy) -> Result<RateFit> {
    let n = series.values.len();
    let start = ((1.0 - policy.window_fraction) * n as f64).floor() as usize;
    let mut x = Vec::new();
    let mut y = Vec::new();
    for j in start..n {
        let p = series.values[j].norm_sqr();
        if p >= policy.floor {
            x.push(series.time(j));
            y.push(p.ln());
        }
    }
    if x.len() < policy.min_points.max(2) {
        return Err(Error::WindowUnderrun { points: x.len(), needed: policy.min_points.max(2) });
    }
    let f = fit_line(&x, &y);
    let rate = -f.slope;
    if f.rms > policy.fit_tol {
        return Err(Error::FitResidual { rate, residual: f.rms, tol: policy.fit_tol });
    }
    Ok(RateFit { rate, residual: f.rms, points: f.points })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn continuum_imaginary_part() {
        let s = sigma_continuum(C64::new(0.0, -1e-12), 1.0, 0.1, 1e4).unwrap();
        assert!((s.im + PI * 0.01).abs() < 1e-9, "{s}");
        assert!(s.re.abs() < 1e-6);
    }

    #[test]
    fn continuum_rejects_band_edge() {
        assert!(sigma_continuum(C64::new(2.0, 0.0), 1.0, 1.0, 2.0).is_err());
    }

    #[test]
    fn continuum_zero_coupling() {
        let s = sigma_continuum(C64::new(0.3, -0.2), 1.0, 0.0, 5.0).unwrap();
        assert_eq!(s, C64::new(0.0, 0.0));
    }

    #[test]
    fn continuum_pole_near_golden_rule() {
        // ν|g|² = 1, D = 10⁴: z − Σ(z) vanishes at −iπ up to O(1/D)
        let z = C64::new(0.0, -PI);
        let s = sigma_continuum(z, 1.0, 1.0, 1e4).unwrap();
        assert!((z - s).norm() < 1e-3, "{}", (z - s).norm());
    }

    #[test]
    fn cot_form_real_between_levels() {
        let spec = ToyBathSpec::equidistant(1.0, 0.5, 0.0);
        let s = sigma_discrete(C64::new(0.5, 0.0), &spec).unwrap();
        assert!(s.im.abs() < 1e-15 && s.re.abs() < 1e-14);
    }

    #[test]
    fn cot_form_rejects_level() {
        let spec = ToyBathSpec::equidistant(1.0, 0.5, 0.0);
        assert!(sigma_discrete(C64::new(2.0, 0.0), &spec).is_err());
    }

    #[test]
    fn cot_form_dense_limit() {
        // deep below the axis cot → i, so Σ → iΓ_FGR/2 = iπ|g|²/Δ
        let spec = ToyBathSpec::equidistant(1e-3, 1.0, 0.0);
        let s = sigma_discrete(C64::new(0.2, -0.1), &spec).unwrap();
        assert!((s - C64::new(0.0, 0.5)).norm() < 1e-12, "{s}");
    }

    #[test]
    fn uncoupled_level() {
        let spec = ToyBathSpec::equidistant(1.0, 0.0, 2.0);
        let p = find_poles(&spec, &SearchRect::default_for(&spec)).unwrap();
        assert_eq!(p.poles.len(), 1);
        assert_eq!(p.dominant_rate, 0.0);
    }

    #[test]
    fn poles_satisfy_pole_equation() {
        let mut spec = ToyBathSpec::equidistant(1.0, 1.0, 0.5);
        spec.epsilon_d = 0.2;
        spec.delta_min = -0.3;
        let set = find_poles(&spec, &SearchRect::default_for(&spec)).unwrap();
        assert!(set.poles.len() >= 8, "{}", set.poles.len());
        for p in &set.poles {
            let f = p.z - spec.epsilon_d - sigma_discrete(p.z, &spec).unwrap();
            assert!(f.norm() < 1e-10);
            assert!(p.z.im < 0.0);
        }
    }

    #[test]
    fn revival_first_period_is_exponential() {
        let spec = ToyBathSpec::equidistant(1.0, 3.0, 0.7);
        let s = propagator_revival_sum(&spec, 0.0, 0.05, 120).unwrap();
        for (j, v) in s.values.iter().enumerate() {
            let t = s.time(j);
            assert!((v - C64::new((-1.5 * t).exp(), 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn revival_order_guard() {
        let spec = ToyBathSpec::equidistant(1.0, 3.0, 0.7);
        let err = propagator_revival_sum_with_order(&spec, 0.0, 0.1, 200, 1).unwrap_err();
        assert!(matches!(err, Error::RevivalOrder { needed: 4, .. }));
    }

    #[test]
    fn pure_exponential_fit() {
        let g = 0.37;
        let v = (0..400).map(|j| C64::from_polar((-0.5 * g * j as f64 * 0.1).exp(), 1.3 * j as f64)).collect();
        let s = TimeSeries::new(0.0, 0.1, v).unwrap();
        let f = late_time_rate(&s, &FitPolicy::default()).unwrap();
        assert!((f.rate - g).abs() < 1e-12);
    }

    #[test]
    fn fit_window_floor() {
        let v = (0..100).map(|j| C64::new((-0.5 * j as f64).exp(), 0.0)).collect();
        let s = TimeSeries::new(0.0, 1.0, v).unwrap();
        assert!(matches!(late_time_rate(&s, &FitPolicy::default()), Err(Error::WindowUnderrun { .. })));
    }
}

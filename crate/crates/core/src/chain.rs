//! Single-photon modes of a Josephson array terminated by a Cooper-pair box.
//!
//! Units: ħ = e = 1, energies and frequencies share one unit, capacitances
//! are inverse energies. Grain 0 carries the impurity capacitance C_0, grains
//! 1..N−1 the ground capacitance C_g, neighbouring grains are joined by
//! junctions (E_J_line, C_line), and the last junction connects grain N−1 to
//! a grounded grain N. The harmonic problem is K ψ = ω² (C/4) ψ.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::quad::integrate_positive;
use crate::{Error, Result};

/// Circuit parameters of the array and the impurity.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainSpec {
    pub sites: usize,
    pub ej_line: f64,
    pub c_line: f64,
    pub c_ground: f64,
    pub c_impurity: f64,
    pub ej_impurity: f64,
    /// Relative half-width a of the uniform disorder factors in [1 − a, 1 + a].
    pub disorder_amplitude: f64,
    pub seed: u64,
}

impl ChainSpec {
    /// Builds the circuit from velocity v, plasma frequency ω_p, Luttinger
    /// parameter z, impurity E_J and charging energy E_C = 1/(2C_0).
    pub fn from_line_parameters(
        sites: usize,
        velocity: f64,
        plasma: f64,
        luttinger: f64,
        ej_impurity: f64,
        charging_energy: f64,
    ) -> Result<Self> {
        for (name, v) in
            [("velocity", velocity), ("plasma", plasma), ("luttinger", luttinger), ("charging_energy", charging_energy)]
        {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::param(name, "must be finite and > 0"));
            }
        }
        let z_line = 0.5 * PI * luttinger;
        let l = z_line / velocity;
        let spec = Self {
            sites,
            ej_line: 0.25 / l,
            c_line: 1.0 / (plasma * plasma * l),
            c_ground: 1.0 / (z_line * velocity),
            c_impurity: 0.5 / charging_energy,
            ej_impurity,
            disorder_amplitude: 0.0,
            seed: 0,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn inductance(&self) -> f64 {
        0.25 / self.ej_line
    }

    pub fn velocity(&self) -> f64 {
        1.0 / (self.inductance() * self.c_ground).sqrt()
    }

    pub fn plasma_frequency(&self) -> f64 {
        1.0 / (self.inductance() * self.c_line).sqrt()
    }

    pub fn impedance(&self) -> f64 {
        (self.inductance() / self.c_ground).sqrt()
    }

    /// z = Z/R_Q with R_Q = π/2.
    pub fn luttinger(&self) -> f64 {
        self.impedance() / (0.5 * PI)
    }

    pub fn gamma0(&self) -> f64 {
        1.0 / (self.impedance() * self.c_impurity)
    }

    pub fn charging_energy(&self) -> f64 {
        0.5 / self.c_impurity
    }

    /// Δ = πv/N.
    pub fn spacing(&self) -> f64 {
        PI * self.velocity() / self.sites as f64
    }

    /// ω_c = min(ω_p, Γ_0).
    pub fn cutoff(&self) -> f64 {
        self.plasma_frequency().min(self.gamma0())
    }

    pub fn profile(&self) -> CouplingProfile {
        CouplingProfile::Lattice { z: self.luttinger(), plasma: self.plasma_frequency(), gamma0: self.gamma0() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites < 2 {
            return Err(Error::param("sites", "need N >= 2"));
        }
        for (name, v) in [
            ("ej_line", self.ej_line),
            ("c_line", self.c_line),
            ("c_ground", self.c_ground),
            ("c_impurity", self.c_impurity),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::param(name, "must be finite and > 0"));
            }
        }
        if !(self.ej_impurity >= 0.0) {
            return Err(Error::param("ej_impurity", "must be >= 0"));
        }
        if !(0.0..0.5).contains(&self.disorder_amplitude) {
            return Err(Error::param("disorder_amplitude", "must lie in [0, 0.5)"));
        }
        let ratio = self.velocity() / self.plasma_frequency();
        if ratio < 10.0 {
            log::warn!("v/ω_p = {ratio:.2} < 10: continuum phase-shift formulas are inaccurate");
        }
        // E_C,line = 1/(2 C_line)
        if self.ej_line < 10.0 * 0.5 / self.c_line {
            log::warn!("E_J,line is not large compared to E_C,line; phase slips are not negligible");
        }
        Ok(())
    }
}

/// Continuum model of the coupling density f²(ω)/Δ(ω) used for golden-rule
/// integrals and Debye–Waller bookkeeping.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CouplingProfile {
    /// Array profile, 2z √(1 − x²) / (ω (1 − x² + ω²/Γ_0²)) with x = ω/ω_p;
    /// `plasma` may be infinite.
    Lattice { z: f64, plasma: f64, gamma0: f64 },
    /// 2z e^{−ω/ω_c}/ω.
    ExponentialCutoff { z: f64, cutoff: f64 },
}

impl CouplingProfile {
    pub fn luttinger(&self) -> f64 {
        match *self {
            Self::Lattice { z, .. } | Self::ExponentialCutoff { z, .. } => z,
        }
    }

    /// f²(ω)/Δ(ω).
    pub fn density(&self, w: f64) -> f64 {
        match *self {
            Self::Lattice { z, plasma, gamma0 } => {
                let x2 = (w / plasma).powi(2);
                if x2 >= 1.0 {
                    return 0.0;
                }
                2.0 * z * (1.0 - x2).sqrt() / (w * (1.0 - x2 + (w / gamma0).powi(2)))
            }
            Self::ExponentialCutoff { z, cutoff } => 2.0 * z * (-w / cutoff).exp() / w,
        }
    }

    /// Local mode spacing Δ(ω) for a chain with low-frequency spacing Δ.
    pub fn local_spacing(&self, w: f64, spacing: f64) -> f64 {
        match *self {
            Self::Lattice { plasma, .. } => {
                let x2 = (w / plasma).powi(2);
                spacing * (1.0 - x2).max(0.0).powf(1.5)
            }
            Self::ExponentialCutoff { .. } => spacing,
        }
    }

    /// f² of a mode at ω.
    pub fn coupling(&self, w: f64, spacing: f64) -> f64 {
        self.density(w) * self.local_spacing(w, spacing)
    }

    /// Upper end of the spectrum (ω_p, or ∞).
    pub fn upper_limit(&self) -> f64 {
        match *self {
            Self::Lattice { plasma, .. } => plasma,
            Self::ExponentialCutoff { .. } => f64::INFINITY,
        }
    }

    /// ∫_{lower}^{upper} f²/Δ dω.
    pub fn integral(&self, lower: f64) -> f64 {
        let upper = self.upper_limit();
        if lower >= upper {
            return 0.0;
        }
        integrate_positive(|w| self.density(w), lower, upper, 1e-13)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    CleanAnalytic,
    Disordered,
}

/// Eigenmodes of one array realization, sorted by frequency.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeSet {
    pub wavenumber: Vec<f64>,
    pub omega: Vec<f64>,
    pub phase_shift: Vec<f64>,
    pub local_spacing: Vec<f64>,
    pub f2: Vec<f64>,
    /// Low-frequency spacing Δ = πv/N.
    pub spacing: f64,
    pub profile: CouplingProfile,
    pub provenance: Provenance,
    pub realization: usize,
}

impl ModeSet {
    /// Mode list with given frequencies and couplings and no lattice data.
    pub fn synthetic(omega: Vec<f64>, f2: Vec<f64>, spacing: f64, profile: CouplingProfile) -> Self {
        let n = omega.len();
        let local_spacing = omega.iter().map(|&w| profile.local_spacing(w, spacing)).collect();
        Self {
            wavenumber: vec![0.0; n],
            omega,
            phase_shift: vec![0.0; n],
            local_spacing,
            f2,
            spacing,
            profile,
            provenance: Provenance::CleanAnalytic,
            realization: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    /// Modes entering bath sums: ω ≥ Δ/4.
    pub fn is_bath_mode(&self, k: usize) -> bool {
        self.omega[k] >= 0.25 * self.spacing
    }

    /// Σ f² over bath modes.
    pub fn sum_f2(&self) -> f64 {
        (0..self.len()).filter(|&k| self.is_bath_mode(k)).map(|k| self.f2[k]).sum()
    }

    /// First `count` modes only.
    pub fn truncated(&self, count: usize) -> Self {
        let c = count.min(self.len());
        Self {
            wavenumber: self.wavenumber[..c].to_vec(),
            omega: self.omega[..c].to_vec(),
            phase_shift: self.phase_shift[..c].to_vec(),
            local_spacing: self.local_spacing[..c].to_vec(),
            f2: self.f2[..c].to_vec(),
            ..self.clone()
        }
    }
}

/// Lattice quantities shared by the analytic and the numerical route.
struct Lattice<'a> {
    spec: &'a ChainSpec,
    v2: f64,
    wp2: f64,
}

impl<'a> Lattice<'a> {
    fn new(spec: &'a ChainSpec) -> Self {
        Self { spec, v2: spec.velocity().powi(2), wp2: spec.plasma_frequency().powi(2) }
    }

    /// ω² = v² s/(1 + v² s/ω_p²), s = 4 sin²(k/2).
    fn omega2(&self, k: f64) -> f64 {
        let s = 4.0 * (0.5 * k).sin().powi(2);
        self.v2 * s / (1.0 + self.v2 * s / self.wp2)
    }

    /// Inverse of `omega2`, clamped to [0, π].
    fn wavenumber(&self, w: f64) -> f64 {
        let w2 = w * w;
        let denom = self.v2 * (1.0 - w2 / self.wp2);
        if denom <= 0.0 {
            return PI;
        }
        let half = (w2 / denom).sqrt() / 2.0;
        2.0 * half.min(1.0).asin()
    }

    /// Boundary phase shift in [−π, 0] for ψ_i = sin(ki + δ).
    fn phase_shift(&self, k: f64) -> f64 {
        let s = self.spec;
        let a = 0.25 * self.omega2(k);
        let aa = a * (s.c_ground - s.c_impurity);
        let bb = a * s.c_line - s.ej_line;
        (-bb * k.sin()).atan2(aa + bb * (1.0 - k.cos())) - PI
    }

    /// ψᵀ C ψ for ψ_i = sin(ki + δ), i = 0..N−1, ψ_N = 0.
    fn capacitance_norm(&self, k: f64, delta: f64) -> f64 {
        let s = self.spec;
        let n = s.sites;
        let psi0 = delta.sin();
        // Σ_{i=a}^{b} cos(θ i + φ)
        let cos_sum = |theta: f64, phi: f64, a: usize, b: usize| -> f64 {
            let half = 0.5 * theta;
            if half.sin().abs() < 1e-3 {
                (a..=b).map(|i| (theta * i as f64 + phi).cos()).sum()
            } else {
                let cnt = (b - a + 1) as f64;
                (cnt * half).sin() / half.sin() * (phi + half * (a + b) as f64).cos()
            }
        };
        let ground = 0.5 * (n - 1) as f64 - 0.5 * cos_sum(2.0 * k, 2.0 * delta, 1, n - 1);
        // ψ_i − ψ_{i−1} = 2 sin(k/2) cos(k(i − 1/2) + δ)
        let links = 4.0 * (0.5 * k).sin().powi(2) * (0.5 * n as f64 + 0.5 * cos_sum(2.0 * k, 2.0 * delta - k, 1, n));
        s.c_impurity * psi0 * psi0 + s.c_ground * ground + s.c_line * links
    }
}

impl Lattice<'_> {
    /// Mode above the band, ψ_i = (−1)^i sinh(κ(N − i)), localized at grain 0.
    /// Returns (ω, f²) if the boundary condition has a root κ > 0.
    fn bound_state(&self) -> Option<(f64, f64)> {
        let s = self.spec;
        let n = s.sites as f64;
        let omega2 = |kappa: f64| {
            let sv = 4.0 * (0.5 * kappa).cosh().powi(2);
            self.v2 * sv / (1.0 + self.v2 * sv / self.wp2)
        };
        // boundary row divided by sinh(κN)
        let h = |kappa: f64| {
            let a = 0.25 * omega2(kappa);
            let ratio = kappa.cosh() + kappa.sinh() / (kappa * n).tanh();
            a * (s.c_ground - s.c_impurity) + (a * s.c_line - s.ej_line) * (1.0 + ratio)
        };
        let (mut lo, mut hi) = (1e-9, 50.0);
        if h(lo).signum() == h(hi).signum() {
            return None;
        }
        let sign_lo = h(lo).signum();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if h(mid).signum() == sign_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let kappa = 0.5 * (lo + hi);
        let w = omega2(kappa).sqrt();
        // ψ_i scaled by 1/sinh(κN), ψ_0 = 1
        let psi = |i: usize| -> f64 {
            let m = (s.sites - i) as f64;
            let mag = (-kappa * i as f64).exp() * (-(-2.0 * kappa * m).exp_m1()) / (-(-2.0 * kappa * n).exp_m1());
            if i.is_multiple_of(2) {
                mag
            } else {
                -mag
            }
        };
        let mut norm = s.c_impurity;
        for i in 1..s.sites {
            norm += s.c_ground * psi(i).powi(2);
        }
        for i in 1..=s.sites {
            let next = if i == s.sites { 0.0 } else { psi(i) };
            norm += s.c_line * (next - psi(i - 1)).powi(2);
        }
        Some((w, 1.0 / (0.25 * norm) / (2.0 * w)))
    }
}

/// Modes of the clean array from the exact lattice dispersion and the
/// quantization condition kN + δ_k = πl, l = 0..N−1.
pub fn clean_modes(spec: &ChainSpec) -> Result<ModeSet> {
    spec.validate()?;
    let lat = Lattice::new(spec);
    let n = spec.sites;
    let nf = n as f64;
    let spacing = spec.spacing();
    let profile = spec.profile();
    let mut out = ModeSet {
        wavenumber: Vec::with_capacity(n),
        omega: Vec::with_capacity(n),
        phase_shift: Vec::with_capacity(n),
        local_spacing: Vec::with_capacity(n),
        f2: Vec::with_capacity(n),
        spacing,
        profile,
        provenance: Provenance::CleanAnalytic,
        realization: 0,
    };
    for l in 0..n {
        let target = PI * l as f64;
        let f = |k: f64| k * nf + lat.phase_shift(k) - target;
        let mut lo = PI * l as f64 / nf;
        let mut hi = (PI * (l + 1) as f64 / nf).min(PI);
        if f(lo) > 0.0 || f(hi) < 0.0 {
            lo = (PI * (l as f64 - 1.0) / nf).max(0.0);
            if f(lo) > 0.0 || f(hi) < 0.0 {
                // a light impurity grain pushes the top mode out of the band
                let (w, f2) = lat.bound_state().ok_or(Error::Bracket(l))?;
                out.wavenumber.push(PI);
                out.omega.push(w);
                out.phase_shift.push(target - PI * nf);
                out.local_spacing.push(profile.local_spacing(w, spacing));
                out.f2.push(f2);
                continue;
            }
        }
        while hi - lo > 1e-12 * hi {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let k = 0.5 * (lo + hi);
        if k >= PI * (1.0 - 1e-10) {
            // root pinned at the zone edge: ψ ≡ 0, the mode is the bound state
            let (w, f2) = lat.bound_state().ok_or(Error::Bracket(l))?;
            out.wavenumber.push(PI);
            out.omega.push(w);
            out.phase_shift.push(target - PI * nf);
            out.local_spacing.push(profile.local_spacing(w, spacing));
            out.f2.push(f2);
            continue;
        }
        let delta = lat.phase_shift(k);
        let w = lat.omega2(k).sqrt();
        let norm = 0.25 * lat.capacitance_norm(k, delta);
        out.wavenumber.push(k);
        out.omega.push(w);
        out.phase_shift.push(delta);
        out.local_spacing.push(profile.local_spacing(w, spacing));
        out.f2.push(delta.sin().powi(2) / norm / (2.0 * w));
    }
    Ok(out)
}

/// Derives the seed of realization `r` from a master seed (SplitMix64 finalizer
/// applied to master ⊕ golden-ratio multiple of r + 1).
pub fn realization_seed(master: u64, r: usize) -> u64 {
    let mut x = master ^ (r as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Modes of one disordered realization from the generalized eigenproblem.
///
/// Draw order from a ChaCha8 stream: N junction factors (E_J,line), N link
/// factors (C_line), N−1 grain factors (C_g, grains 1..N−1). Eigenvectors are
/// normalized as ψᵀ(C/4)ψ = 1 and f² = ψ_0²/(2ω). Disordered modes carry
/// an effective k from inverting the clean dispersion and δ = πl − kN.
pub fn disordered_modes(spec: &ChainSpec, realization_seed: u64) -> Result<ModeSet> {
    spec.validate()?;
    let n = spec.sites;
    let a = spec.disorder_amplitude;
    let mut rng = ChaCha8Rng::seed_from_u64(realization_seed);
    let mut draw = |count: usize| -> Vec<f64> {
        (0..count).map(|_| if a > 0.0 { rng.random_range(1.0 - a..=1.0 + a) } else { 1.0 }).collect()
    };
    // junction/link i joins grain i−1 and grain i (grain N grounded)
    let ej: Vec<f64> = draw(n).iter().map(|f| f * spec.ej_line).collect();
    let cl: Vec<f64> = draw(n).iter().map(|f| f * spec.c_line).collect();
    let cg: Vec<f64> = draw(n - 1).iter().map(|f| f * spec.c_ground).collect();

    let mut stiff = DMatrix::<f64>::zeros(n, n);
    let mut mass = DMatrix::<f64>::zeros(n, n);
    mass[(0, 0)] = spec.c_impurity;
    for i in 1..n {
        mass[(i, i)] += cg[i - 1];
    }
    for link in 1..=n {
        let (p, q) = (link - 1, link);
        stiff[(p, p)] += ej[link - 1];
        mass[(p, p)] += cl[link - 1];
        if q < n {
            stiff[(q, q)] += ej[link - 1];
            mass[(q, q)] += cl[link - 1];
            stiff[(p, q)] -= ej[link - 1];
            stiff[(q, p)] -= ej[link - 1];
            mass[(p, q)] -= cl[link - 1];
            mass[(q, p)] -= cl[link - 1];
        }
    }
    mass *= 0.25;

    let chol = mass.cholesky().ok_or(Error::NotPositiveDefinite)?;
    let l = chol.l();
    let x = l.solve_lower_triangular(&stiff).ok_or(Error::NotPositiveDefinite)?;
    let mut reduced = l.solve_lower_triangular(&x.transpose()).ok_or(Error::NotPositiveDefinite)?;
    reduced = 0.5 * (&reduced + reduced.transpose());
    let eig = SymmetricEigen::new(reduced);
    let psi = l.transpose().solve_upper_triangular(&eig.eigenvectors).ok_or(Error::NotPositiveDefinite)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&p, &q| eig.eigenvalues[p].total_cmp(&eig.eigenvalues[q]));
    let lat = Lattice::new(spec);
    let spacing = spec.spacing();
    let mut omega = Vec::with_capacity(n);
    let mut f2 = Vec::with_capacity(n);
    for &j in &order {
        let w2 = eig.eigenvalues[j];
        if !(w2 > 0.0) {
            return Err(Error::Unstable(w2));
        }
        let w = w2.sqrt();
        omega.push(w);
        f2.push(psi[(0, j)].powi(2) / (2.0 * w));
    }
    let wavenumber: Vec<f64> = omega.iter().map(|&w| lat.wavenumber(w)).collect();
    let phase_shift = wavenumber.iter().enumerate().map(|(l, k)| PI * l as f64 - k * n as f64).collect();
    let local_spacing = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(1);
            let hi = (i + 1).min(n - 1);
            (omega[hi] - omega[lo]) / (hi - lo) as f64
        })
        .collect();
    Ok(ModeSet {
        wavenumber,
        omega,
        phase_shift,
        local_spacing,
        f2,
        spacing,
        profile: spec.profile(),
        provenance: Provenance::Disordered,
        realization: 0,
    })
}

/// Σ f² and the remainder (Σ f² − ∫_{Δ/2} f²/Δ dω)/(2z).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DebyeWaller {
    pub sum_f2: f64,
    pub gamma_half: f64,
}

pub fn debye_waller(modes: &ModeSet) -> DebyeWaller {
    let sum_f2 = modes.sum_f2();
    let integral = modes.profile.integral(0.5 * modes.spacing);
    let z = modes.profile.luttinger();
    DebyeWaller { sum_f2, gamma_half: (sum_f2 - integral) / (2.0 * z) }
}

/// Renormalized Josephson scale E_J* = (E_J/ω_c^z)^{1/(1−z)} for z < 1,
/// zero otherwise.
pub fn rg_scale(spec: &ChainSpec) -> f64 {
    let z = spec.luttinger();
    if z >= 1.0 || spec.ej_impurity == 0.0 {
        return 0.0;
    }
    (spec.ej_impurity / spec.cutoff().powf(z)).powf(1.0 / (1.0 - z))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: usize) -> ChainSpec {
        ChainSpec::from_line_parameters(n, 40.0, 1.0, 0.5, 0.1, 1.0).unwrap()
    }

    #[test]
    fn derived_quantities_round_trip() {
        let s = spec(100);
        assert!((s.velocity() - 40.0).abs() < 1e-12);
        assert!((s.plasma_frequency() - 1.0).abs() < 1e-12);
        assert!((s.luttinger() - 0.5).abs() < 1e-12);
        assert!((s.charging_energy() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quantization_holds() {
        let s = spec(50);
        let m = clean_modes(&s).unwrap();
        for l in 0..50 {
            let r = m.wavenumber[l] * 50.0 + m.phase_shift[l] - PI * l as f64;
            assert!(r.abs() < 1e-9, "{l} {r}");
        }
        assert!(m.omega.windows(2).all(|w| w[1] > w[0]));
        assert!(m.f2.iter().all(|&f| f > 0.0));
    }

    #[test]
    fn seeds_differ() {
        assert_ne!(realization_seed(1, 0), realization_seed(1, 1));
        assert_ne!(realization_seed(1, 0), realization_seed(2, 0));
    }

    #[test]
    fn rg_scale_limits() {
        let mut s = spec(10);
        s.ej_impurity = 0.0;
        assert_eq!(rg_scale(&s), 0.0);
        let s = ChainSpec::from_line_parameters(10, 40.0, 1.0, 1.2, 0.1, 1.0).unwrap();
        assert_eq!(rg_scale(&s), 0.0);
    }

    #[test]
    fn profile_infinite_plasma() {
        let p = CouplingProfile::Lattice { z: 0.5, plasma: f64::INFINITY, gamma0: 10.0 };
        let w = 3.0;
        assert!((p.density(w) - 1.0 / (w * (1.0 + 0.09))).abs() < 1e-15);
    }
}

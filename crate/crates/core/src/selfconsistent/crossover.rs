use crate::chain::ChainSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// Both the golden-rule rate and the multi-photon spacing exceed (2n+1)Γᵇ.
    Microscopic,
    Crossover,
    /// Both are below threshold·(2n+1)Γᵇ.
    Fgr,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::Microscopic => "microscopic",
            Regime::Crossover => "crossover",
            Regime::Fgr => "fgr",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrossoverPrediction {
    pub n: usize,
    pub omega: f64,
    /// Δ_{2n+1}(ω_k).
    pub spacing: f64,
    pub gamma_fgr: f64,
    /// Γ^FGR/((2n+1)Γᵇ).
    pub rate_ratio: f64,
    /// Δ_{2n+1}/((2n+1)Γᵇ).
    pub spacing_ratio: f64,
    /// Array size above which both ratios drop below the threshold.
    pub sites_fgr: f64,
    pub regime: Regime,
}

/// Level spacing of 2n+1-photon states at total energy ω,
/// Δ_{2n+1} = (2n)!·Δ^{2n+1}/ω^{2n}.
pub fn multi_photon_spacing(n: usize, omega: f64, spacing: f64) -> f64 {
    let fact: f64 = (1..=2 * n).map(|i| i as f64).product();
    fact * spacing.powi(2 * n as i32 + 1) / omega.powi(2 * n as i32)
}

/// Regime of bath 2n+1 for mode ω_k at the chain's N, given its golden-rule
/// rate at that N. At fixed ω_k and Γᵇ the rate scales as Δ^{1+2z} (up to
/// logarithms) and Δ_{2n+1} as Δ^{2n+1}, which fixes the crossover size.
pub fn crossover_scale(
    n: usize,
    omega_k: f64,
    gamma_fgr: f64,
    chain: &ChainSpec,
    gamma_b: f64,
    threshold: f64,
) -> CrossoverPrediction {
    let d = chain.spacing();
    let z = chain.luttinger();
    let bound = (2 * n + 1) as f64 * gamma_b;
    let spacing = multi_photon_spacing(n, omega_k, d);
    let rate_ratio = gamma_fgr / bound;
    let spacing_ratio = spacing / bound;
    let sites = chain.sites as f64;
    let from_rate = sites * (rate_ratio / threshold).powf(1.0 / (1.0 + 2.0 * z));
    let from_spacing = sites * (spacing_ratio / threshold).powf(1.0 / (2 * n + 1) as f64);
    let regime = if rate_ratio < threshold && spacing_ratio < threshold {
        Regime::Fgr
    } else if rate_ratio >= 1.0 && spacing_ratio >= 1.0 {
        Regime::Microscopic
    } else {
        Regime::Crossover
    };
    CrossoverPrediction {
        n,
        omega: omega_k,
        spacing,
        gamma_fgr,
        rate_ratio,
        spacing_ratio,
        sites_fgr: from_rate.max(from_spacing),
        regime,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_photon_spacing() {
        assert!((multi_photon_spacing(1, 10.0, 1.0) - 0.02).abs() < 1e-15);
    }

    #[test]
    fn label_matches_sites() {
        let chain = ChainSpec::from_line_parameters(512, 163.0, 16.0, 0.5, 3.0, 16.0).unwrap();
        let d = chain.spacing();
        for (w, rate) in [(3.0, 0.3), (10.0, 0.02), (14.0, 1e-4)] {
            let p = crossover_scale(1, w * d, rate * d, &chain, 0.01 * d, 1.0 / 3.0);
            assert_eq!(p.regime == Regime::Fgr, p.sites_fgr <= 512.0 * (1.0 + 1e-12), "{p:?}");
        }
    }

    #[test]
    fn higher_frequency_crosses_over_sooner() {
        let chain = ChainSpec::from_line_parameters(512, 163.0, 16.0, 0.5, 3.0, 16.0).unwrap();
        let d = chain.spacing();
        let a = crossover_scale(1, 5.0 * d, 0.0, &chain, 0.01 * d, 1.0 / 3.0);
        let b = crossover_scale(1, 10.0 * d, 0.0, &chain, 0.01 * d, 1.0 / 3.0);
        assert!(b.sites_fgr < a.sites_fgr);
        // ν = 2n/(2n+1) when the spacing inequality binds
        let nu = (a.sites_fgr / b.sites_fgr).ln() / 2f64.ln();
        assert!((nu - 2.0 / 3.0).abs() < 1e-9);
    }
}

use std::f64::consts::PI;

use photon_decay::chain::{
    clean_modes, debye_waller, disordered_modes, realization_seed, rg_scale, ChainSpec, CouplingProfile, ModeSet,
};
use photon_decay::special::{gamma_half_exact, EULER_GAMMA};

fn large_array(n: usize) -> ChainSpec {
    ChainSpec::from_line_parameters(n, 3330.0 / (2.0 * PI), 20.0, 0.5, 1.0, 20.0).unwrap()
}

fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| ((x - y) / y).abs()).fold(0.0, f64::max)
}

#[test]
fn eigenproblem_matches_analytic_modes() {
    for n in [64, 256] {
        let spec = ChainSpec::from_line_parameters(n, 12.0, 1.0, 0.7, 0.2, 1.5).unwrap();
        let clean = clean_modes(&spec).unwrap();
        let num = disordered_modes(&spec, 7).unwrap();
        assert!(max_rel(&num.omega, &clean.omega) < 1e-9, "omega n={n}");
        assert!(max_rel(&num.f2, &clean.f2) < 1e-8, "f2 n={n}");
    }
}

#[test]
fn light_impurity_bound_state() {
    // C_0 < C_g: the top mode is localized at grain 0, above the band
    let spec = ChainSpec::from_line_parameters(64, 12.0, 3.0, 0.5, 0.0, 500.0).unwrap();
    let clean = clean_modes(&spec).unwrap();
    let num = disordered_modes(&spec, 1).unwrap();
    assert!(max_rel(&num.omega, &clean.omega) < 1e-9);
    assert!(max_rel(&num.f2, &clean.f2) < 1e-8);
}

#[test]
fn large_array_spacing_and_rg_scale() {
    let spec = large_array(10_000);
    assert!((spec.spacing() - 0.1665).abs() < 1e-3);
    assert!((spec.gamma0() - 50.93).abs() < 0.01);
    assert!(rg_scale(&spec) / spec.spacing() < 1.0);
}

#[test]
fn low_mode_couplings() {
    let spec = large_array(10_000);
    let m = clean_modes(&spec).unwrap();
    let z = spec.luttinger();
    for l in 0..6 {
        let expect = 2.0 * z * m.spacing / m.omega[l];
        assert!((m.f2[l] / expect - 1.0).abs() < 0.01, "l={l} {}", m.f2[l] / expect);
    }
    assert!((m.omega[0] / (0.5 * m.spacing) - 1.0).abs() < 0.01);
}

#[test]
fn couplings_follow_continuum_profile() {
    let spec = large_array(10_000);
    let m = clean_modes(&spec).unwrap();
    let wp = spec.plasma_frequency();
    for l in (0..m.len()).step_by(97) {
        if m.omega[l] > 0.8 * wp {
            continue;
        }
        let want = spec.profile().coupling(m.omega[l], m.spacing);
        // lattice and C_g/C_0 corrections are dropped by the continuum form
        assert!((m.f2[l] / want - 1.0).abs() < 0.02, "l={l} {}", m.f2[l] / want);
    }
}

#[test]
fn linear_dispersion_limit() {
    let spec = ChainSpec::from_line_parameters(2000, 1.0, 1e6, 0.5, 0.0, 1e9).unwrap();
    let m = clean_modes(&spec).unwrap();
    for l in 0..20 {
        let k = m.wavenumber[l];
        assert!((m.omega[l] - k * spec.velocity()).abs() < 1e-3 * m.omega[l]);
        let want = (l as f64 + 0.5) * spec.spacing();
        assert!((m.omega[l] / want - 1.0).abs() < 3.0 / 2000.0);
    }
}

#[test]
fn spacing_converges_with_size() {
    let err = |n: usize| {
        let spec = ChainSpec::from_line_parameters(n, 30.0, 1.0, 0.5, 0.0, 2.0).unwrap();
        let m = clean_modes(&spec).unwrap();
        let mut worst: f64 = 0.0;
        for l in 1..m.len() - 1 {
            if m.omega[l] > 0.8 || m.omega[l] < 5.0 * m.spacing {
                continue;
            }
            let num = 0.5 * (m.omega[l + 1] - m.omega[l - 1]);
            worst = worst.max((num / m.local_spacing[l] - 1.0).abs());
        }
        worst
    };
    let (e1, e2) = (err(2000), err(8000));
    assert!(e1 < 0.02 && e2 < 0.5 * e1, "{e1} {e2}");
}

#[test]
fn coupling_scales_with_spacing() {
    let a = ChainSpec::from_line_parameters(1000, 30.0, 1.0, 0.5, 0.0, 2.0).unwrap();
    let b = ChainSpec::from_line_parameters(2000, 30.0, 1.0, 0.5, 0.0, 2.0).unwrap();
    let (ma, mb) = (clean_modes(&a).unwrap(), clean_modes(&b).unwrap());
    // mode l of chain a sits next to mode 2l (+1/2) of chain b
    for l in [20, 100, 300] {
        let w = ma.omega[l];
        let j = mb.omega.partition_point(|&x| x < w);
        let (w0, w1) = (mb.omega[j - 1], mb.omega[j]);
        let t = (w - w0) / (w1 - w0);
        let fb = mb.f2[j - 1] * (1.0 - t) + mb.f2[j] * t;
        assert!((ma.f2[l] / fb - 2.0).abs() < 0.02, "{}", ma.f2[l] / fb);
    }
}

#[test]
fn gamma_half_from_modes() {
    let spec = large_array(10_000);
    let m = clean_modes(&spec).unwrap();
    let dw = debye_waller(&m);
    assert!((dw.gamma_half / 1.27 - 1.0).abs() < 0.02, "{}", dw.gamma_half);
}

#[test]
fn debye_waller_grows_logarithmically() {
    let s1 = debye_waller(&clean_modes(&large_array(2500)).unwrap()).sum_f2;
    let s2 = debye_waller(&clean_modes(&large_array(10_000)).unwrap()).sum_f2;
    let growth = s2 - s1;
    let want = 2.0 * 0.5 * 4f64.ln();
    assert!((growth / want - 1.0).abs() < 0.05, "{growth} {want}");
}

#[test]
fn exponential_cutoff_debye_waller() {
    let z = 0.5;
    let wc = 2000.0;
    let profile = CouplingProfile::ExponentialCutoff { z, cutoff: wc };
    let omega: Vec<f64> = (0..200_000).map(|l| l as f64 + 0.5).collect();
    let f2 = omega.iter().map(|&w| profile.coupling(w, 1.0)).collect();
    let m = ModeSet::synthetic(omega, f2, 1.0, profile);
    let dw = debye_waller(&m);
    let predicted = (0.5 / wc).powf(2.0 * z) * (2.0 * z * (EULER_GAMMA - gamma_half_exact())).exp();
    assert!(((-dw.sum_f2).exp() / predicted - 1.0).abs() < 0.01);
    assert!((dw.gamma_half - gamma_half_exact()).abs() < 1e-2);
}

#[test]
fn disorder_keeps_modes_physical() {
    let mut spec = ChainSpec::from_line_parameters(128, 20.0, 1.0, 0.5, 0.1, 2.0).unwrap();
    spec.disorder_amplitude = 0.1;
    for r in 0..4 {
        let m = disordered_modes(&spec, realization_seed(11, r)).unwrap();
        assert!(m.omega.iter().all(|&w| w > 0.0));
        assert!(m.omega.windows(2).all(|w| w[1] > w[0]));
        assert!(m.f2.iter().all(|&f| f > 0.0));
    }
}

#[test]
fn disorder_average_approaches_clean() {
    let mut spec = ChainSpec::from_line_parameters(128, 5.0, 1.0, 0.5, 0.1, 2.0).unwrap();
    let clean = clean_modes(&spec).unwrap();
    spec.disorder_amplitude = 0.1;
    let reps = 100;
    let mut sum = vec![0.0; 128];
    let mut sq = vec![0.0; 128];
    for r in 0..reps {
        let m = disordered_modes(&spec, realization_seed(3, r)).unwrap();
        for l in 0..128 {
            sum[l] += m.omega[l];
            sq[l] += m.omega[l] * m.omega[l];
        }
    }
    for l in [1, 3, 5] {
        let mean = sum[l] / reps as f64;
        let var = sq[l] / reps as f64 - mean * mean;
        let se = (var / reps as f64).sqrt();
        // bias of a nonlinear average is second order in the amplitude
        let bias = (mean - clean.omega[l]).abs();
        assert!(bias < 4.0 * se + 5e-3 * clean.omega[l], "l={l} {bias} {se} {}", clean.omega[l]);
    }
}

#[test]
fn same_seed_same_modes() {
    let mut spec = ChainSpec::from_line_parameters(32, 20.0, 1.0, 0.5, 0.1, 2.0).unwrap();
    spec.disorder_amplitude = 0.1;
    let a = disordered_modes(&spec, 99).unwrap();
    let b = disordered_modes(&spec, 99).unwrap();
    assert_eq!(a, b);
}

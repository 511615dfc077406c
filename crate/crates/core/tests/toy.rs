mod common;

use std::f64::consts::PI;

use common::Star;
use photon_decay::toy_model::*;
use photon_decay::C64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dominant(spec: &ToyBathSpec) -> f64 {
    find_poles(spec, &SearchRect::default_for(spec)).unwrap().dominant_rate
}

#[test]
fn weak_and_strong_coupling_asymptotes() {
    let eta = 2.0;
    let weak = dominant(&ToyBathSpec::equidistant(1.0, 1e-2 * eta, eta));
    assert!((weak / (1e-2 * eta) - 1.0).abs() < 0.1, "{weak}");
    let strong = dominant(&ToyBathSpec::equidistant(1.0, 1e2 * eta, eta));
    assert!(strong / eta >= 0.9 && strong / eta <= 1.0, "{strong}");
}

/// Random finite bath with 2 to 12 levels.
fn random_bath(rng: &mut ChaCha8Rng) -> ToyBathSpec {
    let n = rng.random_range(2..=12);
    let modes = (0..n)
        .map(|_| BathMode {
            energy: rng.random_range(-4.0..4.0),
            coupling: rng.random_range(0.05..1.5),
            broadening: rng.random_range(0.01..2.0),
        })
        .collect();
    ToyBathSpec::general(rng.random_range(-1.0..1.0), 1.0, modes)
}

#[test]
fn rate_bounded_by_largest_broadening() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for case in 0..200 {
        let spec = random_bath(&mut rng);
        let rate = dominant(&spec);
        assert!(rate < spec.max_broadening(), "case {case}: {rate} vs {}", spec.max_broadening());
    }
}

#[test]
fn poles_are_eigenvalues_of_the_dense_matrix() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let spec = random_bath(&mut rng);
        let poles = find_poles(&spec, &SearchRect::default_for(&spec)).unwrap();
        let eig = Star::new(spec.epsilon_d, spec.modes.as_ref().unwrap()).eigenvalues();
        for p in &poles.poles {
            let nearest = eig.iter().map(|e| (e - p.z).norm()).fold(f64::INFINITY, f64::min);
            assert!(nearest < 1e-8, "{} {nearest}", p.z);
        }
        // the slowest eigenvalue is a pole as well
        let slowest = eig.iter().map(|e| e.im.abs()).fold(f64::INFINITY, f64::min);
        assert!((poles.dominant_rate - 2.0 * slowest).abs() < 1e-8);
    }
}

#[test]
fn revivals_scale_with_broadening_term_by_term() {
    // on (2t_H, 3t_H) two revival terms are alive: solving for them from η = 0
    // and η₁ predicts G at η₂
    let (d, g) = (1.0, 1.3);
    let t_h = 2.0 * PI / d;
    let at = |eta: f64, t: f64| -> C64 {
        let s = ToyBathSpec::equidistant(d, g, eta);
        propagator_revival_sum(&s, t, 1.0, 1).unwrap().values[0] - (-0.5 * g * t).exp()
    };
    let (e1, e2) = (0.3, 0.7);
    let damp = |eta: f64, m: f64| (-0.5 * eta * m * t_h).exp();
    for t in [2.1 * t_h, 2.5 * t_h, 2.93 * t_h] {
        let (g0, g1) = (at(0.0, t), at(e1, t));
        // g0 = T1 + T2, g1 = a1 T1 + a2 T2
        let (a1, a2) = (damp(e1, 1.0), damp(e1, 2.0));
        let t2 = (g1 - a1 * g0) / (a2 - a1);
        let t1 = g0 - t2;
        let want = damp(e2, 1.0) * t1 + damp(e2, 2.0) * t2;
        assert!((at(e2, t) - want).norm() < 1e-12, "t = {t}");
    }
}

#[test]
fn closed_cot_form_matches_truncated_sum() {
    let spec = ToyBathSpec::equidistant(1.0, 3.0, 2.0);
    let mut big = spec.clone();
    big.truncation = 10_000;
    let general = ToyBathSpec::general(0.0, 1.0, big.truncated_modes());
    // levels sit at n − i
    for z in [C64::new(0.3, -0.2), C64::new(0.25, -2.0), C64::new(-0.4, -0.6)] {
        let a = sigma_discrete(z, &spec).unwrap();
        let b = sigma_discrete(z, &general).unwrap();
        assert!(((a - b) / a).norm() < 1e-3, "{z}: {a} {b}");
    }
}

fn oracle_error(eta: f64, gamma: f64, n_trunc: usize) -> (f64, Vec<C64>, Vec<C64>) {
    let mut spec = ToyBathSpec::equidistant(1.0, gamma, eta);
    spec.truncation = n_trunc;
    let t_h = 2.0 * PI;
    let len = 601;
    let dt = 3.0 * t_h / (len - 1) as f64;
    let sum = propagator_revival_sum(&spec, 0.0, dt, len).unwrap().values;
    let dense = Star::from_spec(&spec).evolve(dt, len);
    let err = sum.iter().zip(&dense).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    (err, sum, dense)
}

#[test]
fn dense_evolution_converges_to_revival_sum() {
    // the truncated bath differs from the infinite one by O(Γ_FGR/N) band-edge
    // transients: halving with N, and Richardson in N removes them
    for (eta, gamma) in [(0.5, 0.5), (2.0, 8.0)] {
        let (e1, sum, g1) = oracle_error(eta, gamma, 500);
        let (e2, _, g2) = oracle_error(eta, gamma, 1000);
        assert!(e2 < 0.6 * e1, "η={eta} Γ={gamma}: {e1} {e2}");
        let rich = sum.iter().zip(g1.iter().zip(&g2)).map(|(s, (a, b))| (s - (2.0 * b - a)).norm()).fold(0.0, f64::max);
        assert!(rich < 1e-4, "η={eta} Γ={gamma}: {rich}");
    }
}

#[test]
fn first_period_is_pure_exponential_in_the_dense_model() {
    let (err, sum, _) = oracle_error(2.0, 0.5, 1000);
    assert!(err < 2e-3, "{err}");
    for (j, v) in sum.iter().take(200).enumerate() {
        let t = j as f64 * 6.0 * PI / 600.0;
        assert!((v - (-0.25 * t).exp()).norm() < 1e-14);
    }
}

#[test]
fn pole_and_fit_rates_agree_when_the_fit_is_clean() {
    let policy = FitPolicy::default();
    let mut checked = 0;
    for eta in [0.5, 1.0, 2.0] {
        for gamma in [0.05, 0.2, 0.5, 1.0, 3.0] {
            let spec = ToyBathSpec::equidistant(1.0, gamma, eta);
            let pole = dominant(&spec);
            let len = 4000;
            let dt = 25.0 / pole / (len - 1) as f64;
            let series = propagator_revival_sum(&spec, 0.0, dt, len).unwrap();
            if let Ok(fit) = late_time_rate(&series, &policy) {
                assert!((fit.rate / pole - 1.0).abs() < 0.05, "η={eta} Γ={gamma}: {} {pole}", fit.rate);
                checked += 1;
            }
        }
    }
    assert!(checked >= 5, "{checked}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn survival_never_exceeds_one(eta in 0.0..3.0f64, gamma in 0.0..10.0f64, t in 0.0..40.0f64) {
        let s = ToyBathSpec::equidistant(1.0, gamma, eta);
        let g = propagator_revival_sum(&s, t, 1.0, 1).unwrap().values[0];
        prop_assert!(g.norm() <= 1.0 + 1e-9, "{}", g.norm());
    }

    #[test]
    fn decoupled_level_keeps_unit_amplitude(eta in 0.0..3.0f64, t in 0.0..40.0f64) {
        let s = ToyBathSpec::equidistant(1.0, 0.0, eta);
        let g = propagator_revival_sum(&s, t, 1.0, 1).unwrap().values[0];
        prop_assert!((g.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn before_the_first_revival_decay_is_golden_rule(eta in 0.0..3.0f64, gamma in 0.0..10.0f64, x in 0.0..1.0f64) {
        let s = ToyBathSpec::equidistant(1.0, gamma, eta);
        let t = x * 2.0 * PI * 0.999;
        let g = propagator_revival_sum(&s, t, 1.0, 1).unwrap().values[0];
        prop_assert!((g - (-0.5 * gamma * t).exp()).norm() < 1e-15);
    }

    #[test]
    fn random_bath_rate_below_max_broadening(seed in any::<u64>()) {
        let spec = random_bath(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!(dominant(&spec) < spec.max_broadening());
    }
}

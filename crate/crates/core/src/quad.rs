//! Adaptive Gauss–Kronrod (7/15) quadrature.

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// ∫_a^b f with bisection until the local error estimate meets
/// `max(abs_tol, rel_tol·|I|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (i0, e0) = gk15(&f, a, b);
    let mut segs = vec![(a, b, i0, e0)];
    let mut total = i0;
    let mut err = e0;
    let mut iter = 0;
    while err > abs_tol.max(rel_tol * total.abs()) && iter < 2000 {
        iter += 1;
        let (idx, _) = segs.iter().enumerate().max_by(|x, y| x.1 .3.total_cmp(&y.1 .3)).unwrap();
        let (sa, sb, si, se) = segs.swap_remove(idx);
        let m = 0.5 * (sa + sb);
        let (l, le) = gk15(&f, sa, m);
        let (r, re) = gk15(&f, m, sb);
        total += l + r - si;
        err += le + re - se;
        segs.push((sa, m, l, le));
        segs.push((m, sb, r, re));
    }
    segs.iter().map(|s| s.2).sum()
}

/// ∫_a^b f for 0 < a < b ≤ ∞, in the variable ln ω on the finite part and
/// ω = X/s beyond X = 1e3·a when b is infinite.
pub fn integrate_positive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    assert!(a > 0.0 && b > a);
    let log_part = |lo: f64, hi: f64| {
        integrate(
            |u| {
                let w = u.exp();
                f(w) * w
            },
            lo.ln(),
            hi.ln(),
            0.0,
            rel_tol,
        )
    };
    if b.is_finite() {
        return log_part(a, b);
    }
    let x = 1e3 * a;
    let head = log_part(a, x);
    let tail = integrate(|s| if s <= 0.0 { 0.0 } else { f(x / s) * x / (s * s) }, 0.0, 1.0, 1e-300, rel_tol);
    head + tail
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = integrate(|x| x.powi(5) - 2.0 * x, 0.0, 2.0, 1e-14, 1e-14);
        assert!((v - (64.0 / 6.0 - 4.0)).abs() < 1e-12);
    }

    #[test]
    fn sqrt_endpoint() {
        let v = integrate(|x| (1.0 - x * x).max(0.0).sqrt(), -1.0, 1.0, 1e-12, 1e-12);
        assert!((v - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
    }

    #[test]
    fn semi_infinite() {
        let v = integrate_positive(|w| 1.0 / (w * (1.0 + w * w)), 1.0, f64::INFINITY, 1e-12);
        assert!((v - 0.5 * 2f64.ln()).abs() < 1e-10, "{v}");
    }
}

//! Special constants and the gamma-function derivative table.

pub use statrs::function::gamma::gamma;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Riemann zeta at integer argument k >= 2.
pub fn zeta(k: u32) -> f64 {
    assert!(k >= 2, "zeta(k) needs k >= 2");
    let s = k as f64;
    let n = 20usize;
    let mut sum = 0.0;
    for j in (1..n).rev() {
        sum += (j as f64).powf(-s);
    }
    // Euler–Maclaurin tail from n with Bernoulli numbers B2..B8.
    let nf = n as f64;
    let mut tail = nf.powf(1.0 - s) / (s - 1.0) + 0.5 * nf.powf(-s);
    let bern = [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0];
    let mut rising = s; // s (s+1) ... (s+2j-2)
    let mut fact = 2.0; // (2j)!
    for (j, b) in bern.iter().enumerate() {
        let p = 2 * j + 1;
        tail += b / fact * rising * nf.powf(-s - p as f64);
        rising *= (s + p as f64) * (s + p as f64 + 1.0);
        fact *= ((p + 2) * (p + 3)) as f64;
    }
    sum + tail
}

/// Derivatives Γ^{(s)}(1) for s = 0..=max_order.
///
/// Built from ln Γ(1+x) = −γx + Σ_{k≥2} (−1)^k ζ(k) x^k / k by exponentiating
/// the power series.
#[derive(Clone, Debug)]
pub struct GammaDerivatives {
    values: Vec<f64>,
}

impl GammaDerivatives {
    pub fn new(max_order: usize) -> Self {
        let mut c = vec![0.0; max_order + 1];
        if max_order >= 1 {
            c[1] = -EULER_GAMMA;
        }
        for (k, ck) in c.iter_mut().enumerate().skip(2) {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            *ck = sign * zeta(k as u32) / k as f64;
        }
        // b = exp(a): m b_m = Σ_j j c_j b_{m-j}
        let mut b = vec![0.0; max_order + 1];
        b[0] = 1.0;
        for m in 1..=max_order {
            let mut acc = 0.0;
            for j in 1..=m {
                acc += j as f64 * c[j] * b[m - j];
            }
            b[m] = acc / m as f64;
        }
        let mut fact = 1.0;
        let values = b
            .iter()
            .enumerate()
            .map(|(s, bs)| {
                if s > 0 {
                    fact *= s as f64;
                }
                bs * fact
            })
            .collect();
        Self { values }
    }

    pub fn max_order(&self) -> usize {
        self.values.len() - 1
    }

    pub fn get(&self, order: usize) -> crate::Result<f64> {
        self.values.get(order).copied().ok_or(crate::Error::DerivativeTable { order, max: self.max_order() })
    }
}

/// γ_{1/2} = ∫₀^∞ dx [1/(⌊x⌋ + 1/2) − 1/(x + 1/2)].
///
/// Summed cell by cell; the tail beyond `cells` uses the integral of the
/// cell term plus a half-cell endpoint correction.
pub fn gamma_half_from_integral(cells: usize) -> f64 {
    let term = |a: f64| 1.0 / a - (1.0 / a).ln_1p();
    let mut sum = 0.0;
    for l in (0..cells).rev() {
        sum += term(l as f64 + 0.5);
    }
    let a = cells as f64 + 0.5;
    let tail = (a + 1.0) * (1.0 / a).ln_1p() - 1.0 + 0.5 * term(a);
    sum + tail
}

/// Closed-form value γ + ln 2 of the same integral.
pub fn gamma_half_exact() -> f64 {
    EULER_GAMMA + std::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_known_values() {
        let pi = std::f64::consts::PI;
        assert!((zeta(2) - pi * pi / 6.0).abs() < 1e-15);
        assert!((zeta(4) - pi.powi(4) / 90.0).abs() < 1e-15);
        assert!((zeta(3) - 1.202_056_903_159_594_2).abs() < 1e-15);
    }

    #[test]
    fn gamma_derivative_low_orders() {
        let g = GammaDerivatives::new(3);
        let pi2 = std::f64::consts::PI.powi(2);
        assert_eq!(g.get(0).unwrap(), 1.0);
        assert!((g.get(1).unwrap() + EULER_GAMMA).abs() < 1e-15);
        let second = EULER_GAMMA * EULER_GAMMA + pi2 / 6.0;
        assert!((g.get(2).unwrap() - second).abs() < 1e-14);
        assert!(g.get(4).is_err());
    }

    #[test]
    fn gamma_half_matches_closed_form() {
        let a = gamma_half_from_integral(10_000);
        assert!((a - gamma_half_exact()).abs() < 1e-10, "{a}");
    }
}

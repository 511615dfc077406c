//! Brute-force references shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use photon_decay::toy_model::{BathMode, ToyBathSpec};
use photon_decay::C64;

/// Single-excitation Hamiltonian of a level coupled to broadened bath modes:
/// H = [[ε_d, g_nᵀ], [g_n, diag(ε_n − iη_n/2)]].
pub struct Star {
    pub epsilon_d: f64,
    pub levels: Vec<C64>,
    pub couplings: Vec<f64>,
}

impl Star {
    pub fn new(epsilon_d: f64, modes: &[BathMode]) -> Self {
        Self {
            epsilon_d,
            levels: modes.iter().map(|m| C64::new(m.energy, -0.5 * m.broadening)).collect(),
            couplings: modes.iter().map(|m| m.coupling).collect(),
        }
    }

    pub fn from_spec(spec: &ToyBathSpec) -> Self {
        Self::new(spec.epsilon_d, &spec.truncated_modes())
    }

    pub fn dim(&self) -> usize {
        self.levels.len() + 1
    }

    /// out = H v, with v[0] the level and v[1..] the bath.
    fn apply(&self, v: &[C64], out: &mut [C64]) {
        let mut d = self.epsilon_d * v[0];
        for ((o, (&e, &g)), &b) in out[1..].iter_mut().zip(self.levels.iter().zip(&self.couplings)).zip(&v[1..]) {
            d += g * b;
            *o = e * b + g * v[0];
        }
        out[0] = d;
    }

    fn norm_bound(&self) -> f64 {
        let diag = self.levels.iter().map(|e| e.norm()).fold(self.epsilon_d.abs(), f64::max);
        diag + self.couplings.iter().map(|g| g * g).sum::<f64>().sqrt()
    }

    /// ⟨d| e^{−iHt_j} |d⟩ at t_j = j·dt, j < len, by Taylor-series steps of
    /// norm at most one.
    pub fn evolve(&self, dt: f64, len: usize) -> Vec<C64> {
        let sub = ((self.norm_bound() * dt).ceil() as usize).max(1);
        let h = dt / sub as f64;
        let n = self.dim();
        let mut psi = vec![C64::new(0.0, 0.0); n];
        psi[0] = C64::new(1.0, 0.0);
        let mut term = vec![C64::new(0.0, 0.0); n];
        let mut next = vec![C64::new(0.0, 0.0); n];
        let mut out = Vec::with_capacity(len);
        for j in 0..len {
            out.push(psi[0]);
            if j + 1 == len {
                break;
            }
            for _ in 0..sub {
                term.copy_from_slice(&psi);
                for k in 1..60 {
                    self.apply(&term, &mut next);
                    let f = -C64::i() * h / k as f64;
                    let mut size: f64 = 0.0;
                    for ((t, x), p) in term.iter_mut().zip(&next).zip(psi.iter_mut()) {
                        *t = f * x;
                        *p += *t;
                        size = size.max(t.norm());
                    }
                    if size < 1e-18 {
                        break;
                    }
                }
            }
        }
        out
    }

    /// Eigenvalues of the dense matrix.
    pub fn eigenvalues(&self) -> Vec<C64> {
        let n = self.dim();
        let mut m = DMatrix::<C64>::zeros(n, n);
        m[(0, 0)] = C64::new(self.epsilon_d, 0.0);
        for (i, (&e, &g)) in self.levels.iter().zip(&self.couplings).enumerate() {
            m[(i + 1, i + 1)] = e;
            m[(0, i + 1)] = C64::new(g, 0.0);
            m[(i + 1, 0)] = C64::new(g, 0.0);
        }
        m.eigenvalues().expect("schur converged").iter().copied().collect()
    }
}

//! Finite-size self-energies of the array modes, their propagators and the
//! decay rates read off from the long-time tails.
//!
//! Each mode k sees the baths of 2n+1-photon states through
//! Σ_{k;2n+1}(ω) = i·2E_J² f_k² e^{−Σf²}/(2n+1)! · ∫dt e^{iωt} S(t)^{2n+1},
//! S(t) = Σ_{k'} f²_{k'} iG̃_{k'}(t).
//! With this orientation Im Σ ≥ 0 and the bath adds Γ = 2 Im Σ(ω_k) to the
//! mode's own broadening Γᵇ.
//!
//! Three schemes differ only in which propagators enter S:
//!
//! * bare: free propagators of every mode;
//! * partial: for each bath its own running sum over k' < k of propagators
//!   dressed by that bath alone;
//! * dressed: a single ascending pass where S holds the fully dressed
//!   propagators of k' < k.
//!
//! All transforms share one periodic [`FreqGrid`]. Time-domain propagators
//! are the analytic free part plus the FFT of the (fast decaying) remainder,
//! which keeps the 1/ω² tails of the Lorentzians out of the FFT.

mod crossover;
mod grid;
mod rates;
mod solver;
mod sweep;

pub use crossover::{crossover_scale, multi_photon_spacing, CrossoverPrediction, Regime};
pub use grid::{free_propagator_freq, free_propagator_time, pole, FreqGrid};
pub use rates::{extract_rate, full_propagator, mode_rates, propagator_time, ModeRate, RateFitPolicy};
pub use solver::{bath_self_energy, solve, solve_with, ModeSelfEnergy, ModeSolution, SelfEnergyTable};
pub use sweep::{disorder_sweep, realization_modes, Aggregate, RateRow, RateTable};

use crate::chain::ChainSpec;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    Bare,
    Partial,
    Dressed,
}

impl Scheme {
    pub fn label(self) -> &'static str {
        match self {
            Scheme::Bare => "bare",
            Scheme::Partial => "partial",
            Scheme::Dressed => "dressed",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "bare" => Some(Scheme::Bare),
            "partial" => Some(Scheme::Partial),
            "dressed" => Some(Scheme::Dressed),
            _ => None,
        }
    }
}

/// Everything the solver needs besides the modes. Frequencies are absolute.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    /// Nyquist frequency of the grid.
    pub omega_max: f64,
    /// Grid size M (power of two).
    pub points: usize,
    pub gamma_b: f64,
    pub schemes: Vec<Scheme>,
    /// Bath labels 2n+1, each odd and >= 3.
    pub baths: Vec<usize>,
    /// Modes with ω_k in this range get self-energies and rates.
    pub window: (f64, f64),
    pub realizations: usize,
    pub master_seed: u64,
    pub fit: RateFitPolicy,
    /// Also extract a rate per bath, not only the total.
    pub per_bath: bool,
    /// Largest |Im Σ| near the grid edge relative to its peak.
    pub aliasing_tol: f64,
    /// Factor standing in for "≪" in the crossover inequalities.
    pub crossover_threshold: f64,
    /// Modes whose full Σ(ω) arrays are kept in the table.
    pub record: Vec<usize>,
}

impl RunConfig {
    /// Default grid for a chain: Ω_max = 1.25(2n_max+1)ω_p and δω ≤ Γᵇ/10.
    pub fn for_chain(spec: &ChainSpec, gamma_b: f64) -> Result<Self> {
        let baths = vec![3, 5, 7, 9];
        let omega_max = 1.25 * 9.0 * spec.plasma_frequency();
        if !(gamma_b > 0.0) {
            return Err(finite_broadening());
        }
        let points = ((2.0 * omega_max / (0.1 * gamma_b)).ceil() as usize).next_power_of_two();
        Ok(Self {
            omega_max,
            points,
            gamma_b,
            schemes: vec![Scheme::Bare, Scheme::Partial, Scheme::Dressed],
            baths,
            window: (0.0, f64::INFINITY),
            realizations: 1,
            master_seed: 0,
            fit: RateFitPolicy::default(),
            per_bath: true,
            aliasing_tol: 1e-2,
            crossover_threshold: 1.0 / 3.0,
            record: Vec::new(),
        })
    }

    pub fn d_omega(&self) -> f64 {
        2.0 * self.omega_max / self.points as f64
    }

    /// Largest n with 2n+1 in the bath set.
    pub fn n_max(&self) -> usize {
        self.baths.iter().map(|b| (b - 1) / 2).max().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_b > 0.0) || !self.gamma_b.is_finite() {
            return Err(finite_broadening());
        }
        if !self.points.is_power_of_two() {
            return Err(Error::param("points", "must be a power of two"));
        }
        if self.d_omega() > 0.1 * self.gamma_b * (1.0 + 1e-12) {
            return Err(Error::param(
                "points",
                format!("grid step {:.3e} exceeds Γᵇ/10 = {:.3e}", self.d_omega(), 0.1 * self.gamma_b),
            ));
        }
        if self.baths.is_empty() || self.baths.iter().any(|&b| b < 3 || b % 2 == 0) {
            return Err(Error::param("baths", "need odd bath labels >= 3"));
        }
        if self.schemes.is_empty() {
            return Err(Error::param("schemes", "need at least one scheme"));
        }
        if self.realizations < 1 {
            return Err(Error::param("realizations", "need R >= 1"));
        }
        if !(self.window.0 <= self.window.1) {
            return Err(Error::param("window", "lower edge above upper edge"));
        }
        if !(self.crossover_threshold > 0.0 && self.crossover_threshold < 1.0) {
            return Err(Error::param("crossover_threshold", "must lie in (0, 1)"));
        }
        self.fit.validate()
    }

    /// Checks that the grid holds the full multi-photon bandwidth of a chain.
    pub fn validate_for(&self, spec: &ChainSpec) -> Result<()> {
        self.validate()?;
        let need = (2 * self.n_max() + 1) as f64 * spec.plasma_frequency();
        if self.omega_max < need {
            return Err(Error::param("omega_max", format!("{:.4e} below (2n_max+1)·ω_p = {need:.4e}", self.omega_max)));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<FreqGrid> {
        FreqGrid::new(self.omega_max, self.points)
    }
}

fn finite_broadening() -> Error {
    Error::param(
        "gamma_b",
        "must be > 0: without a finite external broadening every finite bath only produces revivals and no long-time decay rate exists",
    )
}

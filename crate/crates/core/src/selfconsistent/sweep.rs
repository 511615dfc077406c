use std::collections::BTreeMap;

use rayon::prelude::*;

use super::rates::mode_rates;
use super::solver::solve_with;
use super::{FreqGrid, RunConfig, Scheme};
use crate::chain::{clean_modes, disordered_modes, realization_seed, ChainSpec, ModeSet};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct RateRow {
    pub realization: usize,
    pub k: usize,
    pub omega_over_delta: f64,
    pub scheme: Scheme,
    /// 2n+1, or None for the total.
    pub bath: Option<usize>,
    pub gamma_in_over_delta: f64,
    pub residual: f64,
    pub quality: bool,
}

/// Mean and standard error over realizations of one (mode, scheme, bath).
#[derive(Clone, Debug, PartialEq)]
pub struct Aggregate {
    pub k: usize,
    pub scheme: Scheme,
    pub bath: Option<usize>,
    pub omega_over_delta: f64,
    pub mean: f64,
    pub std_err: f64,
    /// Quality rows entering the mean.
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateTable {
    pub rows: Vec<RateRow>,
    pub aggregates: Vec<Aggregate>,
    /// (realization, error message) of excluded realizations.
    pub failed: Vec<(usize, String)>,
}

impl RateTable {
    pub fn aggregate(&self, k: usize, scheme: Scheme, bath: Option<usize>) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| a.k == k && a.scheme == scheme && a.bath == bath)
    }
}

/// Modes of realization r: the clean chain without disorder, otherwise a
/// disordered draw seeded from (master seed, r).
pub fn realization_modes(spec: &ChainSpec, master_seed: u64, r: usize) -> Result<ModeSet> {
    let mut modes = if spec.disorder_amplitude == 0.0 {
        clean_modes(spec)?
    } else {
        disordered_modes(spec, realization_seed(master_seed, r))?
    };
    modes.realization = r;
    Ok(modes)
}

fn run_realization(spec: &ChainSpec, cfg: &RunConfig, grid: &FreqGrid, r: usize) -> Result<Vec<RateRow>> {
    let modes = realization_modes(spec, cfg.master_seed, r)?;
    let d = modes.spacing;
    let mut rows = Vec::new();
    for &scheme in &cfg.schemes {
        solve_with(&modes, spec.ej_impurity, scheme, cfg, grid, |sol| {
            for rate in mode_rates(sol, &modes, cfg, grid)? {
                rows.push(RateRow {
                    realization: r,
                    k: sol.k,
                    omega_over_delta: sol.omega / d,
                    scheme,
                    bath: rate.bath,
                    gamma_in_over_delta: rate.gamma_in / d,
                    residual: rate.fit.residual,
                    quality: rate.quality,
                });
            }
            Ok(())
        })?;
    }
    Ok(rows)
}

/// Solves every realization (in parallel on the current rayon pool) and
/// aggregates the quality rows. Output order does not depend on scheduling.
pub fn disorder_sweep(spec: &ChainSpec, cfg: &RunConfig) -> Result<RateTable> {
    cfg.validate_for(spec)?;
    let z = spec.luttinger();
    if z < 1.0 && crate::chain::rg_scale(spec) > spec.spacing() {
        return Err(Error::param(
            "ej_impurity",
            "E_J* exceeds Δ: strong coupling from the first mode, outside the perturbative solver",
        ));
    }
    let grid = cfg.grid()?;
    let results: Vec<Result<Vec<RateRow>>> =
        (0..cfg.realizations).into_par_iter().map(|r| run_realization(spec, cfg, &grid, r)).collect();
    let mut rows = Vec::new();
    let mut failed = Vec::new();
    for (r, res) in results.into_iter().enumerate() {
        match res {
            Ok(mut v) => rows.append(&mut v),
            Err(e) if e.is_validation() => return Err(e),
            Err(e) => {
                log::warn!("realization {r} failed: {e}");
                failed.push((r, e.to_string()));
            }
        }
    }
    if failed.len() * 5 > cfg.realizations {
        return Err(Error::Realizations { failed: failed.len(), total: cfg.realizations });
    }
    let aggregates = aggregate(&rows);
    Ok(RateTable { rows, aggregates, failed })
}

fn aggregate(rows: &[RateRow]) -> Vec<Aggregate> {
    // bath None sorts first, so the total leads each group
    let mut groups: BTreeMap<(usize, Scheme, Option<usize>), Vec<&RateRow>> = BTreeMap::new();
    for row in rows.iter().filter(|r| r.quality) {
        groups.entry((row.k, row.scheme, row.bath)).or_default().push(row);
    }
    groups
        .into_iter()
        .map(|((k, scheme, bath), g)| {
            let n = g.len() as f64;
            let mean = g.iter().map(|r| r.gamma_in_over_delta).sum::<f64>() / n;
            let var = if g.len() > 1 {
                g.iter().map(|r| (r.gamma_in_over_delta - mean).powi(2)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            Aggregate {
                k,
                scheme,
                bath,
                omega_over_delta: g.iter().map(|r| r.omega_over_delta).sum::<f64>() / n,
                mean,
                std_err: (var / n).sqrt(),
                count: g.len(),
            }
        })
        .collect()
}

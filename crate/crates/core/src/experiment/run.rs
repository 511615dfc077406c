use std::f64::consts::PI;

use rayon::prelude::*;

use super::config::{FgrPlan, RatesPlan, SpectralPlan, ToyPlan};
use crate::chain::{clean_modes, ChainSpec, ModeSet};
use crate::fgr::{bath_rate_closed_form, total_rate_luttinger, FgrEngine, FgrSpec};
use crate::output::{Cell, Table};
use crate::selfconsistent::{
    crossover_scale, disorder_sweep, full_propagator, realization_modes, solve, Aggregate, RateTable, RunConfig,
};
use crate::special::GammaDerivatives;
use crate::toy_model::{find_poles, late_time_rate, propagator_revival_sum, SearchRect, TimeSeries, ToyBathSpec};
use crate::{Error, Result, C64};

/// Tables of one experiment plus `key: value` notes for the manifest.
#[derive(Debug, Default)]
pub struct Outcome {
    pub tables: Vec<Table>,
    pub notes: Vec<(String, String)>,
}

pub const GAMMA_IN_CONVENTION: &str =
    "gamma_in = fitted late-time rate minus gamma_b, clamped at 0; bath rows insert only that bath's self-energy, total rows all baths";

fn bath_label(bath: Option<usize>) -> String {
    bath.map_or_else(|| "total".to_string(), |b| b.to_string())
}

fn toy_spec(plan: &ToyPlan, gamma_fgr: f64) -> ToyBathSpec {
    let mut spec = ToyBathSpec::equidistant(plan.spacing, gamma_fgr, plan.eta);
    spec.epsilon_d = plan.epsilon_d;
    spec.delta_min = plan.delta_min;
    spec
}

/// Late-time fit of the revival sum over 25 e-folds of the pole rate.
fn toy_fit_rate(plan: &ToyPlan, spec: &ToyBathSpec, pole_rate: f64) -> Result<f64> {
    let t_end = 25.0 / pole_rate;
    let dt = t_end / (plan.fit_samples - 1) as f64;
    let series = propagator_revival_sum(spec, 0.0, dt, plan.fit_samples)?;
    Ok(late_time_rate(&series, &plan.fit)?.rate)
}

pub fn toy(plan: &ToyPlan) -> Result<Outcome> {
    let t_h = 2.0 * PI / plan.spacing;
    let rows: Vec<Result<(f64, f64, Option<f64>)>> = plan
        .ratios
        .par_iter()
        .map(|&ratio| {
            let spec = toy_spec(plan, ratio * plan.eta);
            let poles = find_poles(&spec, &SearchRect::default_for(&spec))?;
            let fit = match toy_fit_rate(plan, &spec, poles.dominant_rate) {
                Ok(r) => Some(r),
                Err(e @ (Error::FitResidual { .. } | Error::WindowUnderrun { .. })) => {
                    log::debug!("toy fit at Γ_FGR/η = {ratio:.3e} skipped: {e}");
                    None
                }
                Err(e) => return Err(e),
            };
            Ok((ratio, poles.dominant_rate, fit))
        })
        .collect();
    let mut rates = Table::new("toy", &["gamma_fgr_over_eta", "gamma_over_eta", "method"])
        .meta("eta_over_Delta", format!("{:.16e}", plan.eta / plan.spacing))
        .meta("epsilon_d_over_Delta", format!("{:.16e}", plan.epsilon_d / plan.spacing))
        .meta("delta_min_over_Delta", format!("{:.16e}", plan.delta_min / plan.spacing));
    let mut skipped = 0;
    let mut fits = Vec::new();
    for r in rows {
        let (ratio, pole_rate, fit) = r?;
        rates.push(vec![ratio.into(), (pole_rate / plan.eta).into(), "poles".into()]);
        match fit {
            Some(f) => fits.push(vec![ratio.into(), (f / plan.eta).into(), "fit".into()]),
            None => skipped += 1,
        }
    }
    rates.rows.extend(fits);

    let series: Vec<Result<TimeSeries>> = plan
        .survival_gamma_fgr
        .par_iter()
        .map(|&g| {
            let dt = plan.survival_t_max * t_h / (plan.survival_samples - 1) as f64;
            propagator_revival_sum(&toy_spec(plan, g), 0.0, dt, plan.survival_samples)
        })
        .collect();
    let mut survival =
        Table::new("survival", &["gamma_fgr_over_Delta", "eta_over_Delta", "t_over_tH", "survival_prob"]);
    for (s, &g) in series.into_iter().zip(&plan.survival_gamma_fgr) {
        let s = s?;
        for (t, p) in s.times().into_iter().zip(s.survival()) {
            survival.push(vec![
                (g / plan.spacing).into(),
                (plan.eta / plan.spacing).into(),
                (t / t_h).into(),
                p.into(),
            ]);
        }
    }
    Ok(Outcome {
        tables: vec![rates, survival],
        notes: vec![(
            "toy_fits_skipped".into(),
            format!("{skipped} (fit residual above tolerance or window below floor)"),
        )],
    })
}

pub fn fgr(plan: &FgrPlan) -> Result<Outcome> {
    let spec = &plan.spec;
    let d = spec.spacing;
    let top = plan.omegas.iter().cloned().fold(0.0, f64::max);
    let curves: Vec<Result<Vec<f64>>> = (1..=spec.n_max)
        .into_par_iter()
        .map(|n| {
            let mut engine = FgrEngine::new(spec.clone(), top)?;
            Ok(engine.curve(n, &plan.omegas)?.rate_over_delta)
        })
        .collect();
    let curves: Vec<Vec<f64>> = curves.into_iter().collect::<Result<_>>()?;
    let reference: Vec<f64> = plan.omegas.iter().map(|&w| total_rate_luttinger(w, spec) / d).collect();
    let mut table =
        Table::new("fgr", &["omega_over_Delta", "bath", "rate_over_Delta", "method", "reference_over_Delta"])
            .meta("z", format!("{:.16e}", spec.luttinger()))
            .meta("ej_over_Delta", format!("{:.16e}", spec.ej / d))
            .meta("cutoff_over_Delta", format!("{:.16e}", spec.cutoff() / d))
            .meta("reference", "thermodynamic-limit total rate (Luttinger power law)");
    let row = |w: f64, bath: String, rate: f64, method: &str, reference: f64| -> Vec<Cell> {
        vec![(w / d).into(), bath.into(), rate.into(), method.into(), reference.into()]
    };
    for (n, curve) in (1..=spec.n_max).zip(&curves) {
        for (i, &w) in plan.omegas.iter().enumerate() {
            table.push(row(w, (2 * n + 1).to_string(), curve[i], "numeric", reference[i]));
        }
    }
    for (i, &w) in plan.omegas.iter().enumerate() {
        let sum = curves.iter().map(|c| c[i]).sum();
        table.push(row(w, "sum".into(), sum, "numeric", reference[i]));
    }
    if plan.closed_form {
        let derivs = GammaDerivatives::new(2 * spec.n_max);
        for n in 1..=spec.n_max {
            for (i, &w) in plan.omegas.iter().enumerate() {
                let rate = bath_rate_closed_form(n, w, spec, &derivs)? / d;
                table.push(row(w, (2 * n + 1).to_string(), rate, "closed_form", reference[i]));
            }
        }
    }
    Ok(Outcome { tables: vec![table], notes: Vec::new() })
}

fn modes_table(sets: &[ModeSet]) -> Table {
    let mut t = Table::new("modes", &["l", "k", "omega", "delta_k", "spacing", "f2", "realization"])
        .meta("units", "omega and spacing in units of Delta, k in radians per site");
    for m in sets {
        for l in 0..m.len() {
            t.push(vec![
                l.into(),
                m.wavenumber[l].into(),
                (m.omega[l] / m.spacing).into(),
                m.phase_shift[l].into(),
                (m.local_spacing[l] / m.spacing).into(),
                m.f2[l].into(),
                m.realization.into(),
            ]);
        }
    }
    t
}

/// Golden-rule rate and regime of every clean-chain mode in the window, per bath.
pub fn crossover_table(chain: &ChainSpec, run: &RunConfig) -> Result<Table> {
    let clean = clean_modes(chain)?;
    let d = chain.spacing();
    let targets: Vec<usize> =
        (0..clean.len()).filter(|&k| clean.omega[k] >= run.window.0 && clean.omega[k] <= run.window.1).collect();
    let mut t = Table::new(
        "crossover",
        &[
            "k",
            "omega_over_Delta",
            "bath",
            "gamma_fgr_over_Delta",
            "rate_ratio",
            "spacing_ratio",
            "sites_fgr",
            "regime",
        ],
    )
    .meta("threshold", format!("{:.16e}", run.crossover_threshold))
    .meta("gamma_b_over_Delta", format!("{:.16e}", run.gamma_b / d));
    let Some(&last) = targets.last() else {
        return Ok(t);
    };
    let mut spec = FgrSpec::new(chain.ej_impurity, d, chain.profile());
    spec.n_max = run.n_max();
    let mut engine = FgrEngine::new(spec, clean.omega[last])?;
    for &k in &targets {
        for &bath in &run.baths {
            let n = (bath - 1) / 2;
            let w = clean.omega[k];
            let rate = engine.rate(n, w)?;
            let p = crossover_scale(n, w, rate, chain, run.gamma_b, run.crossover_threshold);
            t.push(vec![
                k.into(),
                (w / d).into(),
                bath.to_string().into(),
                (rate / d).into(),
                p.rate_ratio.into(),
                p.spacing_ratio.into(),
                p.sites_fgr.into(),
                p.regime.label().into(),
            ]);
        }
    }
    Ok(t)
}

pub fn rate_tables(table: &RateTable, gamma_b_over_delta: f64) -> (Table, Table) {
    let mut rows = Table::new(
        "rates",
        &["realization", "k", "omega_over_Delta", "scheme", "bath", "gamma_in_over_Delta", "residual", "quality"],
    )
    .meta("gamma_in", GAMMA_IN_CONVENTION)
    .meta("gamma_b_over_Delta", format!("{gamma_b_over_delta:.16e}"));
    for r in &table.rows {
        rows.push(vec![
            r.realization.into(),
            r.k.into(),
            r.omega_over_delta.into(),
            r.scheme.label().into(),
            bath_label(r.bath).into(),
            r.gamma_in_over_delta.into(),
            r.residual.into(),
            r.quality.into(),
        ]);
    }
    let mut mean = Table::new(
        "rates_mean",
        &["k", "omega_over_Delta", "scheme", "bath", "mean_over_Delta", "std_err_over_Delta", "count"],
    )
    .meta("gamma_in", GAMMA_IN_CONVENTION)
    .meta("averaging", "quality rows only");
    for a in &table.aggregates {
        let Aggregate { k, scheme, bath, omega_over_delta, mean: m, std_err, count } = a;
        mean.push(vec![
            (*k).into(),
            (*omega_over_delta).into(),
            scheme.label().into(),
            bath_label(*bath).into(),
            (*m).into(),
            (*std_err).into(),
            (*count).into(),
        ]);
    }
    (rows, mean)
}

pub fn rates(plan: &RatesPlan) -> Result<Outcome> {
    let RatesPlan { chain, run } = plan;
    let d = chain.spacing();
    let table = disorder_sweep(chain, run)?;
    let (rows, mean) = rate_tables(&table, run.gamma_b / d);
    let sets: Vec<ModeSet> = (0..run.realizations)
        .into_par_iter()
        .map(|r| realization_modes(chain, run.master_seed, r))
        .collect::<Result<_>>()?;
    let crossover = crossover_table(chain, run)?;
    let mut notes = vec![("gamma_in".to_string(), GAMMA_IN_CONVENTION.to_string())];
    for (r, msg) in &table.failed {
        notes.push((format!("realization_{r}_failed"), msg.clone()));
    }
    Ok(Outcome { tables: vec![rows, mean, crossover, modes_table(&sets)], notes })
}

pub fn spectral(plan: &SpectralPlan) -> Result<Outcome> {
    let SpectralPlan { chain, run, span, stride, realizations } = plan;
    let grid = run.grid()?;
    let d = chain.spacing();
    type Block = (Vec<Vec<Cell>>, Vec<Vec<Cell>>);
    let blocks: Vec<Result<Block>> = realizations
        .par_iter()
        .map(|&r| {
            let modes = realization_modes(chain, run.master_seed, r)?;
            let mut spec_rows = Vec::new();
            let mut sigma_rows = Vec::new();
            for &scheme in &run.schemes {
                let table = solve(&modes, chain.ej_impurity, scheme, run)?;
                for &k in &run.record {
                    let m = table.get(k).ok_or_else(|| Error::InvalidParameter {
                        name: "spectral.modes",
                        reason: format!("mode {k} lies outside the solver window"),
                    })?;
                    let full = m.full.as_ref().expect("recorded mode keeps its arrays");
                    let mut total = vec![C64::new(0.0, 0.0); grid.len()];
                    for s in full {
                        total.iter_mut().zip(s).for_each(|(a, b)| *a += b);
                    }
                    let g = full_propagator(k, &modes, &total, m.re_sigma0_total(), run.gamma_b, &grid);
                    let lo = grid.index_of((m.omega - span).max(0.0));
                    let hi = grid.index_of(m.omega + span);
                    for j in (lo..=hi).step_by(*stride) {
                        let w = grid.omega(j) / d;
                        spec_rows.push(vec![
                            k.into(),
                            w.into(),
                            (-g[j].im * d).into(),
                            (g[j].re * d).into(),
                            scheme.label().into(),
                            r.into(),
                        ]);
                        for (s, &bath) in full.iter().zip(&run.baths) {
                            sigma_rows.push(vec![
                                k.into(),
                                w.into(),
                                bath.to_string().into(),
                                (s[j].re / d).into(),
                                (s[j].im / d).into(),
                                scheme.label().into(),
                                r.into(),
                            ]);
                        }
                    }
                }
            }
            Ok((spec_rows, sigma_rows))
        })
        .collect();
    let mut spectral = Table::new("spectral", &["k", "omega_over_Delta", "neg_im_G", "re_G", "scheme", "realization"])
        .meta("units", "G in units of 1/Delta")
        .meta("gamma_b_over_Delta", format!("{:.16e}", run.gamma_b / d));
    let mut selfenergy =
        Table::new("selfenergy", &["k", "omega_over_Delta", "bath", "re_sigma", "im_sigma", "scheme", "realization"])
            .meta("units", "sigma in units of Delta; Re sigma(0) is subtracted only inside G");
    for b in blocks {
        let (a, s) = b?;
        spectral.rows.extend(a);
        selfenergy.rows.extend(s);
    }
    Ok(Outcome { tables: vec![spectral, selfenergy], notes: Vec::new() })
}

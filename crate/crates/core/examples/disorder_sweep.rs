//! Disorder-averaged decay rates over a few realizations, in parallel, with the
//! regime each bath is in according to the crossover estimate.

use std::f64::consts::PI;

use photon_decay::chain::{clean_modes, ChainSpec};
use photon_decay::fgr::{FgrEngine, FgrSpec};
use photon_decay::selfconsistent::{crossover_scale, disorder_sweep, RunConfig, Scheme};

fn main() -> photon_decay::Result<()> {
    let n = 512;
    let v = n as f64 / PI;
    let wp = v / 10.2;
    let mut chain = ChainSpec::from_line_parameters(n, v, wp, 0.5, 3.6, wp)?;
    chain.disorder_amplitude = 0.1;
    let mut cfg = RunConfig::for_chain(&chain, 0.05)?;
    cfg.realizations = 4;
    cfg.master_seed = 7;
    cfg.baths = vec![3, 5];
    cfg.omega_max = 1.5 * 5.0 * wp;
    cfg.points = ((2.0 * cfg.omega_max / (0.1 * cfg.gamma_b)).ceil() as usize).next_power_of_two();
    cfg.window = (0.0, 0.9 * wp);
    cfg.schemes = vec![Scheme::Bare, Scheme::Dressed];
    let table = disorder_sweep(&chain, &cfg)?;
    println!("{} rate rows, {} failed realizations", table.rows.len(), table.failed.len());

    let clean = clean_modes(&chain)?;
    let mut spec = FgrSpec::new(chain.ej_impurity, chain.spacing(), chain.profile());
    spec.n_max = 2;
    let mut engine = FgrEngine::new(spec, 0.9 * wp)?;
    println!("{:>3} {:>7} {:>11} {:>11} {:>11} {:>10}", "k", "ω/Δ", "bare Γ3", "dressed Γ3", "FGR Γ3", "regime");
    for k in (0..clean.len()).filter(|&k| clean.omega[k] <= 0.9 * wp).step_by(4) {
        let w = clean.omega[k];
        let get = |s| table.aggregate(k, s, Some(3)).map_or(f64::NAN, |a| a.mean);
        let fgr = engine.rate(1, w)?;
        let p = crossover_scale(1, w, fgr, &chain, cfg.gamma_b, cfg.crossover_threshold);
        println!(
            "{k:>3} {:>7.3} {:>11.4e} {:>11.4e} {:>11.4e} {:>10}",
            w / chain.spacing(),
            get(Scheme::Bare),
            get(Scheme::Dressed),
            fgr / chain.spacing(),
            p.regime.label()
        );
    }
    Ok(())
}

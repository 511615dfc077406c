//! Bare and dressed self-energies of the low modes of a small clean array.

use std::f64::consts::PI;

use photon_decay::chain::{clean_modes, ChainSpec};
use photon_decay::selfconsistent::{solve, RunConfig, Scheme};

fn main() -> photon_decay::Result<()> {
    let n = 512;
    let v = n as f64 / PI;
    let wp = v / 10.2;
    let chain = ChainSpec::from_line_parameters(n, v, wp, 0.5, 3.6, wp)?;
    let modes = clean_modes(&chain)?;
    let mut cfg = RunConfig::for_chain(&chain, 0.05)?;
    cfg.baths = vec![3, 5];
    cfg.omega_max = 1.5 * 5.0 * wp;
    cfg.points = ((2.0 * cfg.omega_max / (0.1 * cfg.gamma_b)).ceil() as usize).next_power_of_two();
    cfg.window = (0.0, 0.9 * wp);
    println!("{} modes in the window, grid M = {}", modes.omega.iter().filter(|&&w| w <= 0.9 * wp).count(), cfg.points);
    for scheme in [Scheme::Bare, Scheme::Dressed] {
        let table = solve(&modes, chain.ej_impurity, scheme, &cfg)?;
        println!("{}: 2 Im Σ_k(ω_k) per bath", scheme.label());
        for m in table.modes.iter().step_by(2) {
            let rates: Vec<String> = m.at_mode.iter().map(|s| format!("{:.3e}", 2.0 * s.im)).collect();
            println!("  k = {:>2}  ω = {:6.3}  {}", m.k, m.omega, rates.join("  "));
        }
    }
    Ok(())
}

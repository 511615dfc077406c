//! Spectral function −Im G_k(ω) of one mode, bare against dressed.

use std::f64::consts::PI;

use photon_decay::chain::{clean_modes, ChainSpec};
use photon_decay::selfconsistent::{full_propagator, solve, RunConfig, Scheme};

fn main() -> photon_decay::Result<()> {
    let n = 512;
    let v = n as f64 / PI;
    let wp = v / 10.2;
    let chain = ChainSpec::from_line_parameters(n, v, wp, 0.5, 3.6, wp)?;
    let modes = clean_modes(&chain)?;
    let k = modes.omega.iter().position(|&w| w > 0.6 * wp).unwrap_or(0);
    let mut cfg = RunConfig::for_chain(&chain, 0.05)?;
    cfg.omega_max = 1.5 * 9.0 * wp;
    cfg.points = ((2.0 * cfg.omega_max / (0.1 * cfg.gamma_b)).ceil() as usize).next_power_of_two();
    cfg.window = (0.0, modes.omega[k]);
    cfg.record = vec![k];
    let grid = cfg.grid()?;
    println!("mode k = {k}, ω_k = {:.4}", modes.omega[k]);
    for scheme in [Scheme::Bare, Scheme::Dressed] {
        let table = solve(&modes, chain.ej_impurity, scheme, &cfg)?;
        let m = table.get(k).expect("recorded mode");
        let full = m.full.as_ref().expect("recorded mode");
        let mut total = full[0].clone();
        for s in &full[1..] {
            total.iter_mut().zip(s).for_each(|(a, b)| *a += b);
        }
        let g = full_propagator(k, &modes, &total, m.re_sigma0_total(), cfg.gamma_b, &grid);
        let (lo, hi) = (grid.index_of(modes.omega[k] - 1.0), grid.index_of(modes.omega[k] + 1.0));
        let peak = (lo..=hi).max_by(|&a, &b| (-g[a].im).total_cmp(&-g[b].im)).unwrap();
        println!("{}: peak −Im G = {:.4} at ω = {:.4}", scheme.label(), -g[peak].im, grid.omega(peak));
        for j in (lo..=hi).step_by((hi - lo) / 10) {
            println!("  ω = {:7.4}  −Im G = {:.5}", grid.omega(j), -g[j].im);
        }
    }
    Ok(())
}

//! Normal modes of a clean and a disordered array, with the impurity
//! couplings f_k² and the γ½ constant.

use std::f64::consts::PI;

use photon_decay::chain::{clean_modes, debye_waller, disordered_modes, ChainSpec};

fn main() -> photon_decay::Result<()> {
    let n = 256;
    let v = n as f64 / PI;
    let wp = v / 10.2;
    let mut spec = ChainSpec::from_line_parameters(n, v, wp, 0.5, 3.6, wp)?;
    let clean = clean_modes(&spec)?;
    spec.disorder_amplitude = 0.1;
    let dirty = disordered_modes(&spec, 42)?;
    println!("Δ = {:.4}, ω_p = {:.3}, z = {}", spec.spacing(), spec.plasma_frequency(), spec.luttinger());
    println!("{:>3} {:>10} {:>12} {:>10} {:>12}", "l", "ω clean", "f² clean", "ω 10%", "f² 10%");
    for l in 0..10 {
        println!(
            "{l:>3} {:>10.4} {:>12.4e} {:>10.4} {:>12.4e}",
            clean.omega[l], clean.f2[l], dirty.omega[l], dirty.f2[l]
        );
    }
    let dw = debye_waller(&clean);
    println!("Σ f² = {:.4}, γ½ = {:.4}", dw.sum_f2, dw.gamma_half);
    Ok(())
}

//! Thermodynamic-limit golden-rule rates of the 3, 5, 7 and 9-photon baths,
//! their sum, and the Luttinger power law.

use photon_decay::chain::CouplingProfile;
use photon_decay::fgr::{total_rate_luttinger, FgrEngine, FgrSpec};

fn main() -> photon_decay::Result<()> {
    let spec = FgrSpec::new(20.0, 1.0, CouplingProfile::Lattice { z: 0.5, plasma: f64::INFINITY, gamma0: 1e4 });
    let omegas: Vec<f64> = (0..7).map(|i| 10f64.powf(1.0 + i as f64 / 3.0)).collect();
    let mut engine = FgrEngine::new(spec.clone(), 1e3)?;
    let curves: Vec<Vec<f64>> =
        (1..=4).map(|n| engine.curve(n, &omegas).map(|c| c.rate_over_delta)).collect::<Result<_, _>>()?;
    println!("{:>8} {:>11} {:>11} {:>11} {:>11} {:>11} {:>11}", "ω/Δ", "Γ3", "Γ5", "Γ7", "Γ9", "sum", "power law");
    for (i, w) in omegas.iter().enumerate() {
        let sum: f64 = curves.iter().map(|c| c[i]).sum();
        print!("{w:>8.1}");
        for c in &curves {
            print!(" {:>11.4e}", c[i]);
        }
        println!(" {sum:>11.4e} {:>11.4e}", total_rate_luttinger(*w, &spec));
    }
    Ok(())
}

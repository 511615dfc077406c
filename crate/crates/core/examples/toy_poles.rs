//! Dominant decay rate of a level coupled to an equidistant, broadened bath,
//! swept from weak to strong coupling.

use photon_decay::toy_model::{find_poles, SearchRect, ToyBathSpec};

fn main() -> photon_decay::Result<()> {
    let eta = 2.0;
    println!("{:>12} {:>12} {:>12}", "Γ_FGR/η", "Γ/η", "Γ/Γ_FGR");
    for i in 0..=8 {
        let ratio = 10f64.powf(-2.0 + 0.5 * i as f64);
        let spec = ToyBathSpec::equidistant(1.0, ratio * eta, eta);
        let poles = find_poles(&spec, &SearchRect::default_for(&spec))?;
        let g = poles.dominant_rate;
        println!("{ratio:>12.3e} {:>12.5} {:>12.5}", g / eta, g / (ratio * eta));
    }
    Ok(())
}

//! Survival probability with Heisenberg-time revivals, and the late-time rate
//! fitted from it.

use std::f64::consts::PI;

use photon_decay::toy_model::{find_poles, late_time_rate, propagator_revival_sum, FitPolicy, SearchRect, ToyBathSpec};

fn main() -> photon_decay::Result<()> {
    let spec = ToyBathSpec::equidistant(1.0, 0.5, 2.0);
    let t_h = 2.0 * PI;
    let series = propagator_revival_sum(&spec, 0.0, t_h / 20.0, 81)?;
    for (t, p) in series.times().iter().zip(series.survival()).step_by(5) {
        println!("t/t_H = {:5.2}  P = {p:.6}", t / t_h);
    }

    let pole = find_poles(&spec, &SearchRect::default_for(&spec))?.dominant_rate;
    let len = 4000;
    let long = propagator_revival_sum(&spec, 0.0, 25.0 / pole / (len - 1) as f64, len)?;
    let fit = late_time_rate(&long, &FitPolicy::default())?;
    println!("pole rate {pole:.6}, fitted {:.6}", fit.rate);
    Ok(())
}

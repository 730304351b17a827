//! Phase of a direct carrier plus a ghost carrier.

use std::f64::consts::PI;

use drivecal::qubitsim::phase_interference;

fn main() -> drivecal::Result<()> {
    let ghost = 10f64.powf(-30.0 / 20.0);
    for step in 0..=8 {
        let theta = step as f64 * PI / 4.0;
        let phi = phase_interference(1.0, ghost, 0.0, theta)?;
        println!("ghost phase {:>6.3} rad -> resultant {:+.3e} rad", theta, phi);
    }
    Ok(())
}

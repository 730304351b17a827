//! Separate a connector reflection from a far-end reflection with time gates.

use std::f64::consts::PI;

use drivecal::sparam::{ComplexTrace, FrequencyGrid};
use drivecal::timegate::{apply_gate, to_time_domain, GateSpec};
use drivecal::Complex64;

fn main() -> drivecal::Result<()> {
    let grid = FrequencyGrid::new(10e6, 10e6, 2650)?;
    let raw = ComplexTrace::from_fn(grid, |f| {
        Complex64::from_polar(0.05, 0.0) + Complex64::from_polar(0.9, -2.0 * PI * f * 2.15e-9)
    })?;

    let td = to_time_domain(&raw)?;
    for (lo, hi) in [(-0.5e-9, 0.5e-9), (1.5e-9, 3.0e-9)] {
        if let Some((j, mag)) = td.peak(lo, hi) {
            println!("peak {:.3} at {:.3} ns", mag, td.time(j) * 1e9);
        }
    }

    for name in ["connector", "through-short", "atten"] {
        let gate = GateSpec::preset(name)?;
        let gated = apply_gate(&raw, &gate)?;
        let mid = gated.value_near(10e9).unwrap_or_default();
        println!(
            "{name:>13}: center {:.2} ns span {:.1} ns -> |S11(10 GHz)| = {:.4}",
            gate.center_s * 1e9,
            gate.span_s * 1e9,
            mid.norm()
        );
    }
    Ok(())
}

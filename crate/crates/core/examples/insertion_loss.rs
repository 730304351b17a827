//! Insertion loss of a cable from its gated shorted-end reflection.

use std::f64::consts::PI;

use drivecal::sparam::{ComplexTrace, FrequencyGrid};
use drivecal::timegate::{apply_gate, extract_insertion_loss, GateSpec};
use drivecal::uncertainty::s21_uncertainty;
use drivecal::Complex64;

fn main() -> drivecal::Result<()> {
    let grid = FrequencyGrid::new(10e6, 10e6, 2650)?;
    let one_way_db = 1.38;
    let s21 = 10f64.powf(-one_way_db / 20.0);
    let shorted = ComplexTrace::from_fn(grid, |f| {
        Complex64::new(0.03, 0.0) - Complex64::from_polar(s21 * s21, -2.0 * PI * f * 2.15e-9)
    })?;
    let gated = apply_gate(&shorted, &GateSpec::through_short())?;
    let il = extract_insertion_loss(&gated)?;
    println!("freq_GHz  loss_dB  +bar   -bar");
    for f in [2e9, 5e9, 10e9, 20e9] {
        if let Some(k) = grid.nearest_index(f) {
            let bars = s21_uncertainty(il.s21[k], 0.002, 0.001);
            let (up, lo) = bars.map_or((f64::NAN, f64::NAN), |b| (b.upper_db, b.lower_db));
            println!("{:8.1}  {:7.3}  {up:.3}  {lo:.3}", f / 1e9, il.loss_db[k]);
        }
    }
    Ok(())
}

//! Solve a one-port error model from data-defined standards and correct a DUT.

use drivecal::solcal::{apply_correction, forward_model, solve_error_model, ErrorModelOnePort, StandardsSet};
use drivecal::sparam::{ComplexTrace, FrequencyGrid};
use drivecal::Complex64;

fn main() -> drivecal::Result<()> {
    let grid = FrequencyGrid::new(100e6, 100e6, 200)?;
    // a lossy, frequency-dependent error box
    let e00: Vec<Complex64> = grid.points().map(|f| Complex64::from_polar(0.05, f * 1e-10)).collect();
    let e11: Vec<Complex64> = grid.points().map(|f| Complex64::from_polar(0.08, -f * 2e-10)).collect();
    let tracking: Vec<Complex64> = grid.points().map(|f| Complex64::from_polar(0.9 - f * 1e-11, -f * 3e-9)).collect();
    let delta_e = (0..grid.count()).map(|k| e00[k] * e11[k] - tracking[k]).collect();
    let truth = ErrorModelOnePort::new(grid, e00, e11, delta_e)?;

    // standards defined by data, not by ideal values
    let short = ComplexTrace::from_fn(grid, |f| -Complex64::from_polar(0.99, -f * 2e-11))?;
    let open = ComplexTrace::from_fn(grid, |f| Complex64::from_polar(0.995, -f * 5e-11))?;
    let load = ComplexTrace::from_fn(grid, |f| Complex64::new(0.01 + f * 1e-12, 0.0))?;
    let set = StandardsSet {
        measured_short: forward_model(&truth, &short)?,
        measured_open: forward_model(&truth, &open)?,
        measured_load: forward_model(&truth, &load)?,
        defined_short: short,
        defined_open: open,
        defined_load: load,
    };
    let model = solve_error_model(&set)?;

    let dut = ComplexTrace::from_fn(grid, |f| Complex64::from_polar(0.2, -f * 1.4e-9))?;
    let corrected = apply_correction(&model, &forward_model(&truth, &dut)?)?;
    let err = corrected.values().iter().zip(dut.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    println!("max |corrected - true| = {err:.2e}");
    print!("{}", model.to_csv().lines().take(4).collect::<Vec<_>>().join("\n"));
    println!();
    Ok(())
}

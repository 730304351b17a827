//! Write a one-port trace in each Touchstone format and read it back.

use drivecal::sparam::{parse_touchstone, write_touchstone, ComplexTrace, DataFormat, FrequencyGrid, PortCount};
use drivecal::Complex64;

fn main() -> drivecal::Result<()> {
    let grid = FrequencyGrid::new(1e9, 0.5e9, 5)?;
    let trace = ComplexTrace::from_fn(grid, |f| Complex64::from_polar(0.1, -f * 1e-9))?;
    for fmt in [DataFormat::RI, DataFormat::MA, DataFormat::DB] {
        let text = write_touchstone(&trace, fmt)?;
        let back = parse_touchstone(&text, PortCount::One)?.one_port()?;
        let err = trace.values().iter().zip(back.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        println!("{fmt:?}: max round-trip error {err:.1e}");
    }
    print!("{}", write_touchstone(&trace, DataFormat::DB)?);
    Ok(())
}

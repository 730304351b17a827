//! Ghost-pulse ladder of two mismatched elements, as taps and as a sampled
//! Fourier response.

use drivecal::distortion::{impulse_response_fourier, impulse_response_taps, MismatchModel};
use drivecal::sparam::FrequencyGrid;

fn main() -> drivecal::Result<()> {
    let model = MismatchModel::symmetric(12.0, 0.276)?;
    let taps = impulse_response_taps(&model);
    println!("round trip {:.3} ns", model.round_trip_s() * 1e9);
    println!("{:>10} {:>12}", "delay_ns", "amplitude");
    for t in &taps.taps {
        println!("{:>10.4} {:>12.4e}", t.delay_s * 1e9, t.amplitude);
    }

    let grid = FrequencyGrid::new(5e6, 5e6, 8000)?;
    let trace = impulse_response_fourier(&model, &grid)?;
    for t in taps.taps.iter().take(3) {
        let w = 0.2e-9;
        if let Some((j, mag)) = trace.peak(t.delay_s - w, t.delay_s + w) {
            println!("Fourier peak near {:.3} ns: {:.4e} at {:.3} ns", t.delay_s * 1e9, mag, trace.time(j) * 1e9);
        }
    }
    Ok(())
}

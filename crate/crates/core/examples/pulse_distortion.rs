//! Distort a calibrated drive pulse through a mismatched line and compare
//! the tap and Fourier routes.

use drivecal::distortion::{distort, distort_fourier, impulse_response_taps, MismatchModel};
use drivecal::qubitsim::{synth_gate_pulse, GateKind, GateOp, QubitParams};

fn main() -> drivecal::Result<()> {
    let params = QubitParams::default();
    let pulse = synth_gate_pulse(&GateOp::new(GateKind::XPi), 5e-9, &params)?;
    let model = MismatchModel::symmetric(15.0, 0.276)?;
    let via_taps = distort(&pulse, &impulse_response_taps(&model).relative_to_direct());
    let via_fourier = distort_fourier(&pulse, &model, true)?;
    println!("samples {} -> {}", pulse.len(), via_taps.len());
    println!("energy ideal {:.4e}, distorted {:.4e}", pulse.energy(), via_taps.energy());
    println!("|taps - Fourier| / |taps| = {:.2e}", via_taps.l2_distance(&via_fourier) / via_taps.energy().sqrt());
    Ok(())
}

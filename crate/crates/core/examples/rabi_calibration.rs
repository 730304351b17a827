//! Calibrate Gaussian pulse amplitudes and check the resulting rotations.

use drivecal::qubitsim::{calibrate_amplitude, evolve, synth_gate_pulse, GateKind, GateOp, QubitParams, QubitState};

fn main() -> drivecal::Result<()> {
    let params = QubitParams::default();
    for duration in [5e-9, 20e-9, 60e-9] {
        for kind in [GateKind::XPi, GateKind::XPi2, GateKind::YPi] {
            let op = GateOp::new(kind);
            let amp = calibrate_amplitude(&op, duration, &params)?;
            let wave = synth_gate_pulse(&op, duration, &params)?;
            let end = evolve(&QubitState::ground(), &wave, &params)?;
            println!(
                "{:>2.0} ns {kind:<4} amplitude {:.5e} rad/s  P1 = {:.6}",
                duration * 1e9,
                amp,
                end.excited_population()
            );
        }
    }
    Ok(())
}

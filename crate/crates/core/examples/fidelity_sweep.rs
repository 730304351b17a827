//! Gate-fidelity deviation of Xpi then Ypi against return loss and length.

use drivecal::distortion::MismatchModel;
use drivecal::qubitsim::{
    dominant_period, sweep_length, sweep_return_loss, threshold_crossings, QubitParams, SimOptions, HEADLINE_PAIR,
};

fn main() -> drivecal::Result<()> {
    let params = QubitParams::default();
    let template = MismatchModel::symmetric(15.0, 0.276)?;
    let opts = SimOptions::default();

    let rls: Vec<f64> = (0..30).map(|i| 5.0 + i as f64).collect();
    let by_rl = sweep_return_loss(&template, &rls, 5e-9, &params, &[HEADLINE_PAIR], &opts)?;
    let series = by_rl.series(HEADLINE_PAIR).unwrap_or_default();
    for (rl, d) in rls.iter().zip(&series).step_by(5) {
        println!("RL {rl:>4.1} dB  1-F = {d:.3e}");
    }
    for thr in [1e-3, 1e-4] {
        println!("1-F = {thr:e} at RL {:?} dB", threshold_crossings(&rls, &series, thr));
    }

    let lengths: Vec<f64> = (0..=100).map(|i| 0.22 + i as f64 * 1e-3).collect();
    let by_len = sweep_length(&template, &lengths, 5e-9, &params, &[HEADLINE_PAIR], &opts)?;
    let period = dominant_period(&lengths, &by_len.series(HEADLINE_PAIR).unwrap_or_default());
    println!("length period {:.2} mm", period.unwrap_or(f64::NAN) * 1e3);
    Ok(())
}

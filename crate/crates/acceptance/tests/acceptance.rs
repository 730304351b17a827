//! Acceptance checks. Prints one `PASS`/`FAIL` line per criterion and exits
//! non-zero if any fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use drivecal::distortion::MismatchModel;
use drivecal::qubitsim::{
    allxy_pairs, dominant_period, evolve, run_allxy, sweep_length, sweep_return_loss, synth_gate_pulse,
    threshold_crossings, GateKind, GateOp, QubitParams, QubitState, ResponseRoute, SimOptions, HEADLINE_PAIR,
};
use drivecal::solcal::{apply_correction, forward_model, solve_error_model, ErrorModelOnePort, StandardsSet};
use drivecal::sparam::{ComplexTrace, FrequencyGrid};
use drivecal::timegate::{apply_gate, extract_insertion_loss, GateSpec};
use drivecal::uncertainty::to_return_loss;
use drivecal::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const C0: f64 = 299_792_458.0;

type Check = (&'static str, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn single_thread<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(f)
}

fn polar(rng: &mut ChaCha8Rng, r_min: f64, r_max: f64) -> Complex64 {
    Complex64::from_polar(rng.gen_range(r_min..r_max), rng.gen_range(-PI..PI))
}

fn sol_round_trip() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x501);
    let mut worst = 0.0f64;
    let n = 32;
    for _ in 0..1000 {
        let grid = FrequencyGrid::new(rng.gen_range(1.0..100.0) * 1e7, rng.gen_range(1.0..50.0) * 1e6, n).unwrap();
        let mut terms = (Vec::new(), Vec::new(), Vec::new());
        for _ in 0..n {
            let e00 = polar(&mut rng, 0.0, 0.3);
            let e11 = polar(&mut rng, 0.0, 0.3);
            let tracking = polar(&mut rng, 0.2, 1.2);
            terms.0.push(e00);
            terms.1.push(e11);
            terms.2.push(e00 * e11 - tracking);
        }
        let model = ErrorModelOnePort::new(grid, terms.0, terms.1, terms.2).unwrap();
        let mut random_trace = |base: Complex64, r: f64| {
            let v: Vec<Complex64> = (0..n).map(|_| base + polar(&mut rng, 0.0, r)).collect();
            ComplexTrace::new(grid, v).unwrap()
        };
        let short = random_trace(Complex64::new(-1.0, 0.0), 0.1);
        let open = random_trace(Complex64::new(1.0, 0.0), 0.1);
        let load = random_trace(Complex64::new(0.0, 0.0), 0.05);
        let dut = random_trace(Complex64::new(0.0, 0.0), 0.99);
        let measured = |t: &ComplexTrace| forward_model(&model, t).unwrap();
        let set = StandardsSet {
            measured_short: measured(&short),
            measured_open: measured(&open),
            measured_load: measured(&load),
            defined_short: short,
            defined_open: open,
            defined_load: load,
        };
        let solved = solve_error_model(&set).unwrap();
        let back = apply_correction(&solved, &measured(&dut)).unwrap();
        for (a, b) in back.values().iter().zip(dut.values()) {
            worst = worst.max((a - b).norm());
        }
    }
    let t = start.elapsed();
    verdict(worst < 1e-10 && t < Duration::from_secs(10), format!("max error {worst:.2e}, {:.2} s", t.as_secs_f64()))
}

fn reflectors(grid: FrequencyGrid, taps: &[(f64, f64)]) -> ComplexTrace {
    ComplexTrace::from_fn(grid, |f| taps.iter().map(|&(a, t)| Complex64::from_polar(a, -2.0 * PI * f * t)).sum())
        .unwrap()
}

fn cable_grid() -> FrequencyGrid {
    FrequencyGrid::new(10e6, 2.5e6, 10597).unwrap()
}

fn mid_band(f: f64) -> bool {
    (1e9..=25e9).contains(&f)
}

fn gating() -> Verdict {
    let grid = cable_grid();
    let raw = reflectors(grid, &[(0.05, 0.0), (0.9, 2.15e-9)]);
    let mut worst = 0.0f64;
    for (gate, truth) in [(GateSpec::connector(), 0.05), (GateSpec::through_short(), 0.9)] {
        let gated = apply_gate(&raw, &gate).unwrap();
        for (f, v) in gated.iter() {
            if mid_band(f) {
                worst = worst.max((v.norm() / truth - 1.0).abs());
            }
        }
    }
    let spliced_gate = GateSpec::connector().with_splice(true);
    let spliced = apply_gate(&raw, &spliced_gate).unwrap();
    let mut below = 0;
    let mut exact = true;
    for (k, (f, v)) in spliced.iter().enumerate() {
        if f < spliced_gate.cutoff_hz() {
            below += 1;
            exact &= v == raw.values()[k];
        }
    }
    verdict(
        worst < 0.01 && exact && below > 0,
        format!("worst mid-band error {:.3} %, {below} spliced points exact: {exact}", 100.0 * worst),
    )
}

fn insertion_loss() -> Verdict {
    let grid = cable_grid();
    let mut worst = 0.0f64;
    let mut report = Vec::new();
    for loss_db in [0.02, 0.99, 1.38, 4.72] {
        let s21 = 10f64.powf(-loss_db / 20.0);
        let line_delay = 2.15e-9;
        let connector = 0.03;
        // short at the far end plus a connector reflection and the second round trip
        let raw = ComplexTrace::from_fn(grid, |f| {
            let w = -2.0 * PI * f;
            Complex64::new(connector, 0.0) - Complex64::from_polar(s21.powi(2), w * line_delay)
                + Complex64::from_polar(connector * s21.powi(4), w * 2.0 * line_delay)
        })
        .unwrap();
        let gated = apply_gate(&raw, &GateSpec::through_short()).unwrap();
        let il = extract_insertion_loss(&gated).unwrap();
        let mut err = 0.0f64;
        for (k, f) in grid.points().enumerate() {
            if mid_band(f) {
                err = err.max((il.loss_db[k] - loss_db).abs());
            }
        }
        worst = worst.max(err);
        report.push(format!("{loss_db} dB ±{err:.4}"));
    }
    verdict(worst < 0.05, report.join(", "))
}

fn error_bars() -> Verdict {
    let shown = |s11: f64, sigma: f64| to_return_loss(s11, sigma).unwrap().display().to_string();
    let a = shown(0.019, 0.006);
    let b = shown(0.022, 0.006);
    verdict(
        a == "35,+3,-2" && b == "33,+3,-2",
        format!("s11 0.019 -> {a} (want 35,+3,-2), s11 0.022 -> {b} (want 33,+3,-2)"),
    )
}

fn headline_model() -> MismatchModel {
    MismatchModel::symmetric(15.0, 0.276).unwrap()
}

fn fidelity_thresholds() -> Verdict {
    let params = QubitParams::default();
    let rls: Vec<f64> = (0..30).map(|i| 5.0 + i as f64).collect();
    let start = Instant::now();
    let result = single_thread(|| {
        sweep_return_loss(&headline_model(), &rls, 5e-9, &params, &[HEADLINE_PAIR], &SimOptions::default()).unwrap()
    });
    let t = start.elapsed();
    let series = result.series(HEADLINE_PAIR).unwrap();
    let at = |thr: f64| threshold_crossings(&rls, &series, thr).first().copied().unwrap_or(f64::NAN);
    let (c3, c4) = (at(1e-3), at(1e-4));
    let pass = (c3 - 9.7).abs() <= 1.5 && (c4 - 14.7).abs() <= 1.5 && t < Duration::from_secs(300);
    verdict(
        pass,
        format!("1e-3 at {c3:.2} dB (want 9.7±1.5), 1e-4 at {c4:.2} dB (want 14.7±1.5), {:.2} s", t.as_secs_f64()),
    )
}

fn pulse_length_contrast() -> Verdict {
    let params = QubitParams::default();
    let m = headline_model();
    let dev = |d| run_allxy(Some(&m), d, &params, &[HEADLINE_PAIR], &SimOptions::default()).unwrap()[0];
    let (short, long) = (dev(5e-9), dev(60e-9));
    let ratio = short / long;
    verdict((30.0..=300.0).contains(&ratio), format!("{short:.3e} / {long:.3e} = {ratio:.1}"))
}

fn length_period() -> Verdict {
    let params = QubitParams::default();
    let lengths: Vec<f64> = (0..=150).map(|i| 0.20 + i as f64 * 1e-3).collect();
    let r = sweep_length(&headline_model(), &lengths, 5e-9, &params, &[HEADLINE_PAIR], &SimOptions::default()).unwrap();
    let period = dominant_period(&lengths, &r.series(HEADLINE_PAIR).unwrap()).unwrap_or(f64::NAN);
    let expected = 0.7 * C0 / (2.0 * params.freq_hz());
    verdict(
        (period / expected - 1.0).abs() <= 0.10,
        format!("{:.2} mm (want {:.2} mm ±10%)", period * 1e3, expected * 1e3),
    )
}

fn model_equivalence() -> Verdict {
    let params = QubitParams::default();
    let taps = SimOptions::default();
    let fourier = SimOptions { route: ResponseRoute::Fourier, ..taps };
    let pairs = [HEADLINE_PAIR, (GateKind::XPi2, GateKind::YPi2), (GateKind::YPi, GateKind::XPi2)];
    let mut worst = 0.0f64;
    for rl in [12.0, 15.0, 20.0, 25.0, 30.0] {
        let m = MismatchModel::symmetric(rl, 0.276).unwrap();
        let a = run_allxy(Some(&m), 60e-9, &params, &pairs, &taps).unwrap();
        let b = run_allxy(Some(&m), 60e-9, &params, &pairs, &fourier).unwrap();
        for (x, y) in a.iter().zip(&b) {
            worst = worst.max((x - y).abs() / x.abs().max(y.abs()));
        }
    }
    verdict(worst <= 0.20, format!("worst relative difference {:.2e}", worst))
}

fn invariants() -> Verdict {
    let params = QubitParams::default();
    let opts = SimOptions::default();

    let mut wave = synth_gate_pulse(&GateOp::new(GateKind::XPi), 60e-9, &params).unwrap();
    wave.samples.extend(std::iter::repeat_n(0.0, 1000));
    let end = evolve(&QubitState::ground(), &wave, &params).unwrap();
    let drift = (end.norm() - 1.0).abs();

    let ideal = run_allxy(None, 5e-9, &params, &allxy_pairs(), &opts).unwrap().into_iter().fold(0.0, f64::max);
    let matched = MismatchModel::symmetric(200.0, 0.276).unwrap();
    let limit =
        run_allxy(Some(&matched), 5e-9, &params, &allxy_pairs(), &opts).unwrap().into_iter().fold(0.0, f64::max);

    let m = headline_model();
    let coarse = run_allxy(Some(&m), 5e-9, &params, &[HEADLINE_PAIR], &opts).unwrap()[0];
    let fine = run_allxy(Some(&m), 5e-9, &params.with_dt(params.dt_s / 2.0), &[HEADLINE_PAIR], &opts).unwrap()[0];
    let halving = (coarse - fine).abs() / fine;

    verdict(
        drift < 1e-9 && ideal < 1e-12 && limit < 1e-10 && halving < 0.01,
        format!("norm drift {drift:.1e}, ideal {ideal:.1e}, 200 dB {limit:.1e}, step halving {halving:.1e}"),
    )
}

fn main() {
    let criteria: [Check; 9] = [
        ("SOL round trip", sol_round_trip),
        ("gating amplitude fidelity", gating),
        ("insertion-loss extraction", insertion_loss),
        ("error-bar display", error_bars),
        ("fidelity thresholds", fidelity_thresholds),
        ("pulse-length contrast", pulse_length_contrast),
        ("length periodicity", length_period),
        ("taps vs Fourier", model_equivalence),
        ("physics invariants", invariants),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        failed += usize::from(!v.pass);
        println!("{} criterion {} ({name}): {}", if v.pass { "PASS" } else { "FAIL" }, i + 1, v.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

//! Closed two-level system driven by a real microwave waveform.
//!
//! `H/ħ = ω_q|1⟩⟨1| + x(t)·σx` with the full cosine drive (no rotating-wave
//! approximation). Integration is fixed-step RK4 carried out in the
//! interaction picture of the static term, which removes the fast free phase
//! from the integrated variables; results are returned in the lab frame.

mod pulse;
mod sweep;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::distortion::PulseWaveform;
use crate::{Error, Result};

pub use pulse::{calibrate_amplitude, gaussian_envelope, rotation_angle, synth_gate_pulse, synth_sequence, GatePulse};
pub use sweep::{
    dominant_period, run_allxy, sweep_length, sweep_return_loss, threshold_crossings, FidelitySweepResult,
    LineCompensation, ResponseRoute, SimOptions, SweepAxis,
};

/// Integrations whose norm drifts more than this are rejected.
pub const MAX_NORM_DRIFT: f64 = 1e-6;

fn default_omega() -> f64 {
    2.0 * PI * 5e9
}
fn default_dt() -> f64 {
    1e-12
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitParams {
    /// Transition angular frequency (rad/s).
    #[serde(default = "default_omega")]
    pub omega_q: f64,
    /// Integrator step (s).
    #[serde(default = "default_dt")]
    pub dt_s: f64,
}

impl Default for QubitParams {
    fn default() -> Self {
        Self { omega_q: default_omega(), dt_s: default_dt() }
    }
}

impl QubitParams {
    pub fn new(freq_hz: f64, dt_s: f64) -> Result<Self> {
        let p = Self { omega_q: 2.0 * PI * freq_hz, dt_s };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_q.is_finite() && self.omega_q > 0.0) {
            return Err(Error::invalid(format!("qubit frequency must be > 0, got {} rad/s", self.omega_q)));
        }
        if !(self.dt_s.is_finite() && self.dt_s > 0.0) {
            return Err(Error::invalid(format!("integrator step must be > 0, got {}", self.dt_s)));
        }
        if self.dt_s * self.freq_hz() > 1.0 / 20.0 + 1e-12 {
            return Err(Error::invalid(format!(
                "integrator step {} s too coarse for {} Hz (need ≥ 20 steps per period)",
                self.dt_s,
                self.freq_hz()
            )));
        }
        Ok(())
    }

    pub fn freq_hz(&self) -> f64 {
        self.omega_q / (2.0 * PI)
    }

    pub fn with_dt(mut self, dt_s: f64) -> Self {
        self.dt_s = dt_s;
        self
    }
}

/// Single-qubit gate from the ALLXY alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GateKind {
    I,
    #[serde(rename = "Xpi")]
    XPi,
    #[serde(rename = "Ypi")]
    YPi,
    #[serde(rename = "Xpi2")]
    XPi2,
    #[serde(rename = "Ypi2")]
    YPi2,
}

impl GateKind {
    pub const ALL: [GateKind; 5] = [GateKind::I, GateKind::XPi, GateKind::YPi, GateKind::XPi2, GateKind::YPi2];

    pub fn label(self) -> &'static str {
        match self {
            GateKind::I => "I",
            GateKind::XPi => "Xpi",
            GateKind::YPi => "Ypi",
            GateKind::XPi2 => "Xpi2",
            GateKind::YPi2 => "Ypi2",
        }
    }

    pub fn from_label(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.label() == s)
            .ok_or_else(|| Error::Config(format!("unknown gate `{s}` (expected I, Xpi, Ypi, Xpi2 or Ypi2)")))
    }
}

impl std::fmt::Display for GateKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Gate with its drive phase and target rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateOp {
    pub kind: GateKind,
    pub phase_rad: f64,
    pub angle_rad: f64,
}

impl GateOp {
    pub fn new(kind: GateKind) -> Self {
        let (phase_rad, angle_rad) = match kind {
            GateKind::I => (0.0, 0.0),
            GateKind::XPi => (0.0, PI),
            GateKind::YPi => (PI / 2.0, PI),
            GateKind::XPi2 => (0.0, PI / 2.0),
            GateKind::YPi2 => (PI / 2.0, PI / 2.0),
        };
        Self { kind, phase_rad, angle_rad }
    }
}

impl From<GateKind> for GateOp {
    fn from(kind: GateKind) -> Self {
        Self::new(kind)
    }
}

/// All 25 ordered pairs over the gate alphabet.
pub fn allxy_pairs() -> Vec<(GateKind, GateKind)> {
    GateKind::ALL.iter().flat_map(|&a| GateKind::ALL.iter().map(move |&b| (a, b))).collect()
}

/// `(Xπ, Yπ)`.
pub const HEADLINE_PAIR: (GateKind, GateKind) = (GateKind::XPi, GateKind::YPi);

/// Amplitudes on `|0⟩` and `|1⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    pub amplitudes: [Complex64; 2],
}

impl QubitState {
    pub fn new(c0: Complex64, c1: Complex64) -> Self {
        Self { amplitudes: [c0, c1] }
    }

    pub fn ground() -> Self {
        Self::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
    }

    pub fn excited() -> Self {
        Self::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))
    }

    pub fn norm(&self) -> f64 {
        (self.amplitudes[0].norm_sqr() + self.amplitudes[1].norm_sqr()).sqrt()
    }

    pub fn excited_population(&self) -> f64 {
        self.amplitudes[1].norm_sqr()
    }

    pub fn scaled(&self, phase: Complex64) -> Self {
        Self::new(self.amplitudes[0] * phase, self.amplitudes[1] * phase)
    }
}

/// `|⟨a|b⟩|²`.
pub fn fidelity(a: &QubitState, b: &QubitState) -> f64 {
    let ip = a.amplitudes[0].conj() * b.amplitudes[0] + a.amplitudes[1].conj() * b.amplitudes[1];
    ip.norm_sqr().min(1.0)
}

/// Drive samples at integrator steps and midpoints.
struct Drive<'a> {
    x: &'a [f64],
    sub: usize,
}

impl Drive<'_> {
    fn at(&self, i: isize) -> f64 {
        if i < 0 {
            0.0
        } else {
            self.x.get(i as usize).copied().unwrap_or(0.0)
        }
    }

    fn node(&self, step: usize) -> f64 {
        self.at((step * self.sub) as isize)
    }

    fn midpoint(&self, step: usize) -> f64 {
        let base = step * self.sub;
        if self.sub.is_multiple_of(2) {
            return self.at((base + self.sub / 2) as isize);
        }
        let i = (base + self.sub / 2) as isize;
        (-self.at(i - 1) + 9.0 * self.at(i) + 9.0 * self.at(i + 1) - self.at(i + 2)) / 16.0
    }
}

/// Evolve `state` (lab frame at `t = 0`) under `waveform` over its full
/// sampled length; returns the lab-frame state at the last sample time.
///
/// The waveform sample interval must equal the integrator step or divide it
/// by an integer; midpoint values are exact samples when the ratio is even
/// and four-point interpolated otherwise.
pub fn evolve(state: &QubitState, waveform: &PulseWaveform, params: &QubitParams) -> Result<QubitState> {
    evolve_from(state, waveform, params, 0.0)
}

/// As [`evolve`] with the first sample at absolute time `t0_s`; the input
/// state is the lab-frame state at `t0_s`.
pub fn evolve_from(
    state: &QubitState,
    waveform: &PulseWaveform,
    params: &QubitParams,
    t0_s: f64,
) -> Result<QubitState> {
    params.validate()?;
    let ratio = params.dt_s / waveform.dt_s;
    let sub = ratio.round();
    if sub < 1.0 || (ratio - sub).abs() > 1e-9 * ratio {
        return Err(Error::invalid(format!(
            "waveform interval {} s is not an integer subdivision of the integrator step {} s",
            waveform.dt_s, params.dt_s
        )));
    }
    let sub = sub as usize;
    let steps = waveform.len().saturating_sub(1) / sub;
    let drive = Drive { x: &waveform.samples, sub };
    let h = params.dt_s;
    let w = params.omega_q;
    let norm0 = state.norm();

    // interaction picture: c1_I = e^{iωt} c1
    let [mut a0, a1_lab] = state.amplitudes;
    let mut a1 = a1_lab * Complex64::from_polar(1.0, w * t0_s);
    let i = Complex64::new(0.0, 1.0);
    let rhs = |x: f64, e: Complex64, b0: Complex64, b1: Complex64| (-i * x * e.conj() * b1, -i * x * e * b0);
    for step in 0..steps {
        let t = t0_s + step as f64 * h;
        let (x0, xm, x1) = (drive.node(step), drive.midpoint(step), drive.node(step + 1));
        if x0 == 0.0 && xm == 0.0 && x1 == 0.0 {
            continue;
        }
        let e0 = Complex64::from_polar(1.0, w * t);
        let em = Complex64::from_polar(1.0, w * (t + 0.5 * h));
        let e1 = Complex64::from_polar(1.0, w * (t + h));
        let (k1a, k1b) = rhs(x0, e0, a0, a1);
        let (k2a, k2b) = rhs(xm, em, a0 + 0.5 * h * k1a, a1 + 0.5 * h * k1b);
        let (k3a, k3b) = rhs(xm, em, a0 + 0.5 * h * k2a, a1 + 0.5 * h * k2b);
        let (k4a, k4b) = rhs(x1, e1, a0 + h * k3a, a1 + h * k3b);
        a0 += h / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
        a1 += h / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
    }
    let t_end = t0_s + steps as f64 * h;
    let out = QubitState::new(a0, a1 * Complex64::from_polar(1.0, -w * t_end));
    let drift = (out.norm() - norm0).abs();
    if !(drift <= MAX_NORM_DRIFT) {
        return Err(Error::Numeric(format!("norm drifted by {drift:e} over {t_end:e} s; reduce the integrator step")));
    }
    Ok(out)
}

/// Resultant phase of two interfering carriers `A e^{iθ1} + B e^{iθ2}`.
pub fn phase_interference(a: f64, b: f64, theta1: f64, theta2: f64) -> Result<f64> {
    if a == 0.0 && b == 0.0 {
        return Err(Error::invalid("phase of two zero-amplitude carriers is undefined"));
    }
    Ok((a * theta1.sin() + b * theta2.sin()).atan2(a * theta1.cos() + b * theta2.cos()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> QubitParams {
        QubitParams::default()
    }

    #[test]
    fn fidelity_examples() {
        let g = QubitState::ground();
        let e = QubitState::excited();
        assert_eq!(fidelity(&g, &g), 1.0);
        assert_eq!(fidelity(&g, &e), 0.0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = QubitState::new(Complex64::new(s, 0.0), Complex64::new(s, 0.0));
        assert!((fidelity(&g, &plus) - 0.5).abs() < 1e-15);
        let rotated = plus.scaled(Complex64::from_polar(1.0, 0.731));
        assert!((fidelity(&rotated, &plus) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn free_evolution() {
        let p = params();
        let w = PulseWaveform::zeros(p.dt_s, 7001, p.freq_hz()).unwrap();
        let g = evolve(&QubitState::ground(), &w, &p).unwrap();
        assert_eq!(g, QubitState::ground());
        let e = evolve(&QubitState::excited(), &w, &p).unwrap();
        let t = 7000.0 * p.dt_s;
        let expect = Complex64::from_polar(1.0, -p.omega_q * t);
        assert!((e.amplitudes[1] - expect).norm() < 1e-12);
        assert_eq!(e.amplitudes[0], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn params_validation() {
        assert!(QubitParams::new(5e9, 1e-12).is_ok());
        assert!(QubitParams::new(5e9, 2e-11).is_err());
        assert!(QubitParams::new(-1.0, 1e-12).is_err());
        let p = params();
        let coarse = PulseWaveform::zeros(2e-12, 10, 5e9).unwrap();
        assert!(evolve(&QubitState::ground(), &coarse, &p).is_err());
        let odd = PulseWaveform::zeros(0.4e-12, 10, 5e9).unwrap();
        assert!(evolve(&QubitState::ground(), &odd, &p).is_err());
    }

    #[test]
    fn phase_interference_examples() {
        assert_eq!(phase_interference(1.0, 0.0, 0.3, 1.0).unwrap(), 0.3);
        assert!((phase_interference(1.0, 1.0, 0.0, PI / 2.0).unwrap() - PI / 4.0).abs() < 1e-15);
        assert!(phase_interference(1.0, 0.1, 0.0, PI).unwrap().abs() < 1e-15);
        assert!(phase_interference(0.0, 0.0, 0.0, 1.0).is_err());
        // quadrant-correct where the one-argument form is not
        assert!((phase_interference(1.0, 0.0, 2.5, 0.0).unwrap() - 2.5).abs() < 1e-15);
    }

    #[test]
    fn gate_labels_round_trip() {
        for k in GateKind::ALL {
            assert_eq!(GateKind::from_label(k.label()).unwrap(), k);
        }
        assert!(GateKind::from_label("Z").is_err());
        assert_eq!(allxy_pairs().len(), 25);
        let y = GateOp::new(GateKind::YPi);
        assert_eq!((y.phase_rad, y.angle_rad), (PI / 2.0, PI));
    }
}

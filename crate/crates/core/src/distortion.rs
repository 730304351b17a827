//! Two-reflector (Fabry–Pérot) transmission: discrete tap ladder, closed-form
//! transfer function, and convolution of sampled drive waveforms.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::sparam::{fmt_num, ComplexTrace, FrequencyGrid};
use crate::spectrum::{analytic_signal, fast_len, fft, ifft};
use crate::timegate::{to_time_domain, TimeTrace};
use crate::{Error, Result, SPEED_OF_LIGHT};

/// Ghost terms below this magnitude are treated as zero when sizing buffers.
const GHOST_FLOOR: f64 = 1e-13;

fn default_v_p() -> f64 {
    0.7 * SPEED_OF_LIGHT
}
fn default_k() -> usize {
    5
}
fn default_sign() -> f64 {
    1.0
}
fn default_true() -> bool {
    true
}

/// Two mismatched elements a distance `length_m` apart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MismatchModel {
    pub rl1_db: f64,
    pub rl2_db: f64,
    #[serde(default = "default_sign")]
    pub sign1: f64,
    #[serde(default = "default_sign")]
    pub sign2: f64,
    pub length_m: f64,
    #[serde(default = "default_v_p")]
    pub v_p: f64,
    #[serde(default = "default_k")]
    pub max_reflections: usize,
    /// Scale so the direct path has unit amplitude.
    #[serde(default = "default_true")]
    pub normalized: bool,
}

impl MismatchModel {
    /// Same-sign elements, `v_p = 0.7c`, five reflections, normalized.
    pub fn new(rl1_db: f64, rl2_db: f64, length_m: f64) -> Result<Self> {
        let m = Self {
            rl1_db,
            rl2_db,
            sign1: 1.0,
            sign2: 1.0,
            length_m,
            v_p: default_v_p(),
            max_reflections: default_k(),
            normalized: true,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn symmetric(rl_db: f64, length_m: f64) -> Result<Self> {
        Self::new(rl_db, rl_db, length_m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rl1_db > 0.0 && self.rl2_db > 0.0) || !(self.rl1_db.is_finite() && self.rl2_db.is_finite()) {
            return Err(Error::invalid(format!(
                "return losses must be finite and > 0 dB, got {} and {}",
                self.rl1_db, self.rl2_db
            )));
        }
        if !(self.length_m.is_finite() && self.length_m > 0.0) {
            return Err(Error::invalid(format!("length must be > 0, got {}", self.length_m)));
        }
        if !(self.v_p > 0.0 && self.v_p <= SPEED_OF_LIGHT) {
            return Err(Error::invalid(format!("phase velocity must be in (0, c], got {}", self.v_p)));
        }
        for s in [self.sign1, self.sign2] {
            if s != 1.0 && s != -1.0 {
                return Err(Error::invalid(format!("reflection sign must be ±1, got {s}")));
            }
        }
        Ok(())
    }

    pub fn with_signs(mut self, sign1: f64, sign2: f64) -> Self {
        self.sign1 = sign1;
        self.sign2 = sign2;
        self
    }

    pub fn with_max_reflections(mut self, k: usize) -> Self {
        self.max_reflections = k;
        self
    }

    pub fn with_normalized(mut self, normalized: bool) -> Self {
        self.normalized = normalized;
        self
    }

    pub fn with_length(mut self, length_m: f64) -> Self {
        self.length_m = length_m;
        self
    }

    pub fn with_return_loss(mut self, rl_db: f64) -> Self {
        self.rl1_db = rl_db;
        self.rl2_db = rl_db;
        self
    }

    /// Signed reflection coefficient of the first element.
    pub fn alpha(&self) -> f64 {
        self.sign1 * 10f64.powf(-self.rl1_db / 20.0)
    }

    pub fn beta(&self) -> f64 {
        self.sign2 * 10f64.powf(-self.rl2_db / 20.0)
    }

    /// One-way transit time `L / v_p`.
    pub fn transit_s(&self) -> f64 {
        self.length_m / self.v_p
    }

    /// Round-trip time between ghosts, `2L / v_p`.
    pub fn round_trip_s(&self) -> f64 {
        2.0 * self.transit_s()
    }

    /// Direct-path amplitude `(1−α)(1−β)` (transmission factors taken as 1).
    pub fn direct_amplitude(&self) -> f64 {
        (1.0 - self.alpha()) * (1.0 - self.beta())
    }

    /// Closed-form transmission at `freq_hz`, infinite ghost series.
    pub fn s21_at(&self, freq_hz: f64) -> Complex64 {
        let w = 2.0 * PI * freq_hz;
        let d2 = if self.normalized { 1.0 } else { self.direct_amplitude() };
        let g = self.alpha() * self.beta();
        let num = Complex64::from_polar(d2, -w * self.transit_s());
        num / (Complex64::new(1.0, 0.0) - Complex64::from_polar(g, -w * self.round_trip_s()))
    }

    /// Number of round trips after which ghosts drop below the floor.
    fn ghost_horizon(&self) -> usize {
        let g = (self.alpha() * self.beta()).abs();
        if g < GHOST_FLOOR {
            1
        } else {
            (GHOST_FLOOR.ln() / g.ln()).ceil() as usize + 1
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tap {
    pub delay_s: f64,
    pub amplitude: f64,
}

/// Finite tap list with strictly increasing delays.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpulseResponse {
    pub taps: Vec<Tap>,
    pub normalized: bool,
}

impl ImpulseResponse {
    pub fn new(taps: Vec<Tap>, normalized: bool) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::invalid("impulse response needs at least one tap"));
        }
        if taps.iter().any(|t| !(t.delay_s.is_finite() && t.amplitude.is_finite())) {
            return Err(Error::invalid("tap delays and amplitudes must be finite"));
        }
        if taps.windows(2).any(|w| w[1].delay_s <= w[0].delay_s) {
            return Err(Error::invalid("tap delays must be strictly increasing"));
        }
        Ok(Self { taps, normalized })
    }

    /// Single unit tap at zero delay.
    pub fn identity() -> Self {
        Self { taps: vec![Tap { delay_s: 0.0, amplitude: 1.0 }], normalized: true }
    }

    /// Shift all delays so the first tap sits at zero.
    pub fn relative_to_direct(&self) -> Self {
        let t0 = self.taps[0].delay_s;
        Self {
            taps: self.taps.iter().map(|t| Tap { delay_s: t.delay_s - t0, amplitude: t.amplitude }).collect(),
            normalized: self.normalized,
        }
    }

    /// `Σ a_k e^{−i2πf τ_k}`.
    pub fn transfer_at(&self, freq_hz: f64) -> Complex64 {
        let w = 2.0 * PI * freq_hz;
        self.taps.iter().map(|t| Complex64::from_polar(t.amplitude, -w * t.delay_s)).sum()
    }

    pub fn abs_sum(&self) -> f64 {
        self.taps.iter().map(|t| t.amplitude.abs()).sum()
    }

    pub fn last_delay_s(&self) -> f64 {
        self.taps[self.taps.len() - 1].delay_s
    }
}

/// `K+1` taps at `L(2k+1)/v_p` with amplitudes `α^k (1−α)(β^k − β^{k+1})`,
/// divided by the direct-path amplitude when the model is normalized.
pub fn impulse_response_taps(model: &MismatchModel) -> ImpulseResponse {
    let (a, b) = (model.alpha(), model.beta());
    let taps = (0..=model.max_reflections)
        .map(|k| {
            let k = k as i32;
            // the (1−α)(1−β) factor cancels exactly when normalized
            let amplitude =
                if model.normalized { (a * b).powi(k) } else { a.powi(k) * (1.0 - a) * (b.powi(k) - b.powi(k + 1)) };
            Tap { delay_s: model.transit_s() * (2 * k + 1) as f64, amplitude }
        })
        .collect();
    ImpulseResponse { taps, normalized: model.normalized }
}

/// Closed-form transmission sampled on `grid` and transformed to time.
///
/// The grid must resolve the ghost spacing (`dt` at most a quarter of the
/// round trip) and its time span must hold the ghost train until it decays
/// below 1e-6 of the direct path.
pub fn impulse_response_fourier(model: &MismatchModel, grid: &FrequencyGrid) -> Result<TimeTrace> {
    model.validate()?;
    let dt = 1.0 / (2.0 * grid.stop_hz());
    if dt > model.round_trip_s() / 4.0 {
        return Err(Error::invalid(format!(
            "grid too coarse: time step {dt} s does not resolve the {} s ghost spacing",
            model.round_trip_s()
        )));
    }
    let g = (model.alpha() * model.beta()).abs();
    let ghosts = if g < 1e-6 { 0.0 } else { (1e-6f64).ln() / g.ln() };
    let needed = model.transit_s() + ghosts.ceil() * model.round_trip_s();
    if 1.0 / grid.step_hz() < 2.0 * needed {
        return Err(Error::invalid(format!(
            "grid too coarse: time span {} s cannot hold the {needed} s ghost train",
            1.0 / grid.step_hz()
        )));
    }
    let trace = ComplexTrace::from_fn(*grid, |f| model.s21_at(f))?;
    to_time_domain(&trace)
}

/// Sampled real drive waveform on a carrier.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseWaveform {
    pub dt_s: f64,
    pub samples: Vec<f64>,
    pub carrier_hz: f64,
    pub phase_rad: f64,
}

impl PulseWaveform {
    pub fn new(dt_s: f64, samples: Vec<f64>, carrier_hz: f64, phase_rad: f64) -> Result<Self> {
        let p = Self { dt_s, samples, carrier_hz, phase_rad };
        p.validate()?;
        Ok(p)
    }

    pub fn zeros(dt_s: f64, len: usize, carrier_hz: f64) -> Result<Self> {
        Self::new(dt_s, vec![0.0; len], carrier_hz, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt_s.is_finite() && self.dt_s > 0.0) {
            return Err(Error::invalid(format!("sample interval must be > 0, got {}", self.dt_s)));
        }
        if !(self.carrier_hz.is_finite() && self.carrier_hz >= 0.0) {
            return Err(Error::invalid("carrier frequency must be finite and ≥ 0"));
        }
        if self.dt_s * self.carrier_hz > 1.0 / 20.0 + 1e-12 {
            return Err(Error::invalid(format!(
                "sample interval {} s does not resolve a {} Hz carrier (need ≥ 20 samples per period)",
                self.dt_s, self.carrier_hz
            )));
        }
        if self.samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::invalid("waveform samples must be finite"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 * self.dt_s
    }

    pub fn time(&self, j: usize) -> f64 {
        j as f64 * self.dt_s
    }

    /// `Σ x² · dt`.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|x| x * x).sum::<f64>() * self.dt_s
    }

    pub fn l2_distance(&self, other: &PulseWaveform) -> f64 {
        let n = self.len().max(other.len());
        let at = |p: &PulseWaveform, j: usize| p.samples.get(j).copied().unwrap_or(0.0);
        ((0..n).map(|j| (at(self, j) - at(other, j)).powi(2)).sum::<f64>() * self.dt_s).sqrt()
    }

    /// Zero-pad at the end to `len` samples.
    pub fn padded(mut self, len: usize) -> Self {
        if self.samples.len() < len {
            self.samples.resize(len, 0.0);
        }
        self
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t_s,amplitude\n");
        for (j, x) in self.samples.iter().enumerate() {
            out.push_str(&fmt_num(self.time(j)));
            out.push(',');
            out.push_str(&fmt_num(*x));
            out.push('\n');
        }
        out
    }

    /// Read `t_s,amplitude` CSV; times must start at 0 and be uniform.
    pub fn from_csv(text: &str, carrier_hz: f64, phase_rad: f64) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, h)) if h.trim().replace(' ', "") == "t_s,amplitude" => {}
            Some((i, _)) => return Err(Error::parse(i + 1, "expected header `t_s,amplitude`")),
            None => return Err(Error::parse(1, "empty waveform file")),
        }
        let mut times = Vec::new();
        let mut samples = Vec::new();
        for (i, line) in lines {
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 2 {
                return Err(Error::parse(i + 1, format!("expected 2 columns, got {}", cols.len())));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| Error::parse(i + 1, format!("not a number: `{s}`")));
            times.push(num(cols[0])?);
            samples.push(num(cols[1])?);
        }
        if times.len() < 2 {
            return Err(Error::invalid("waveform needs at least 2 samples"));
        }
        let dt = times[1] - times[0];
        let uniform = times.iter().enumerate().all(|(j, &t)| (t - j as f64 * dt).abs() <= 1e-6 * dt + 1e-9 * t.abs());
        if times[0].abs() > 1e-6 * dt || !uniform {
            return Err(Error::invalid("waveform times must start at 0 and be uniformly spaced"));
        }
        Self::new(dt, samples, carrier_hz, phase_rad)
    }
}

/// `y(t) = Σ a_k x(t − τ_k)`.
///
/// Each delay is rounded to the nearest sample; a non-zero residue `δ` is
/// applied to that copy as the carrier phase rotation `e^{−iω_c δ}` on the
/// analytic signal. The output is extended to cover the last tap.
pub fn distort(pulse: &PulseWaveform, h: &ImpulseResponse) -> PulseWaveform {
    let n = pulse.len();
    let shifts: Vec<(usize, f64, f64)> = h
        .taps
        .iter()
        .map(|t| {
            let s = (t.delay_s / pulse.dt_s).round();
            let residue = t.delay_s - s * pulse.dt_s;
            (s.max(0.0) as usize, residue, t.amplitude)
        })
        .collect();
    let max_shift = shifts.iter().map(|s| s.0).max().unwrap_or(0);
    let mut out = vec![0.0; n + max_shift];
    let needs_rotation = shifts.iter().any(|&(_, r, a)| r != 0.0 && a != 0.0);
    let analytic = needs_rotation.then(|| analytic_signal(&pulse.samples, 2 * n));
    let w = 2.0 * PI * pulse.carrier_hz;
    for &(shift, residue, amp) in &shifts {
        if amp == 0.0 {
            continue;
        }
        let dst = &mut out[shift..shift + n];
        match (&analytic, residue != 0.0) {
            (Some(z), true) => {
                let rot = Complex64::from_polar(amp, -w * residue);
                for (o, zj) in dst.iter_mut().zip(z) {
                    *o += (zj * rot).re;
                }
            }
            _ => {
                for (o, x) in dst.iter_mut().zip(&pulse.samples) {
                    *o += amp * x;
                }
            }
        }
    }
    PulseWaveform { dt_s: pulse.dt_s, samples: out, carrier_hz: pulse.carrier_hz, phase_rad: pulse.phase_rad }
}

/// Filter a waveform through the closed-form transmission (infinite ghost
/// series) by FFT multiplication. With `drop_direct_delay` the one-way
/// transit `L/v_p` is removed so the direct copy stays aligned with the
/// input. The output holds the ghost train until it falls below 1e-13.
pub fn distort_fourier(pulse: &PulseWaveform, model: &MismatchModel, drop_direct_delay: bool) -> Result<PulseWaveform> {
    model.validate()?;
    let n = pulse.len();
    let direct = if drop_direct_delay { 0.0 } else { model.transit_s() };
    let tail_s = direct + model.ghost_horizon() as f64 * model.round_trip_s();
    let out_len = n + (tail_s / pulse.dt_s).ceil() as usize + 1;
    let len = fast_len(out_len + n);
    let mut buf: Vec<Complex64> = pulse.samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    buf.resize(len, Complex64::new(0.0, 0.0));
    fft(&mut buf);
    let df = 1.0 / (len as f64 * pulse.dt_s);
    let advance = if drop_direct_delay { model.transit_s() } else { 0.0 };
    for k in 0..=len / 2 {
        let f = k as f64 * df;
        let h = model.s21_at(f) * Complex64::from_polar(1.0, 2.0 * PI * f * advance);
        buf[k] *= h;
        if k != 0 && len - k != k {
            buf[len - k] *= h.conj();
        }
    }
    ifft(&mut buf);
    PulseWaveform::new(pulse.dt_s, buf[..out_len].iter().map(|z| z.re).collect(), pulse.carrier_hz, pulse.phase_rad)
}

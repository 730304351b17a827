//! Frequency ↔ time transforms, Kaiser band-pass gating, low-frequency
//! splicing and insertion-loss extraction from a shorted line.
//!
//! The one-sided measured spectrum on an aligned grid (`start = n·step`) is
//! extended to dc by repeating the lowest measured value and mirrored
//! Hermitian-symmetrically to negative frequencies. The transform length is
//! odd (`2M + 1` with `M` the top bin index), so no Nyquist bin needs to be
//! forced real and the measured bins survive a time-domain round trip
//! unchanged.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::sparam::ComplexTrace;
use crate::spectrum::{fft, ifft};
use crate::{Error, Result};

pub const DEFAULT_KAISER_BETA: f64 = 6.0;
/// Reflections above unity by more than this are treated as unphysical.
pub const PASSIVITY_SLACK: f64 = 1e-6;

/// Band-pass time gate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateSpec {
    pub center_s: f64,
    pub span_s: f64,
    #[serde(default = "default_beta")]
    pub kaiser_beta: f64,
    #[serde(default)]
    pub splice_below_cutoff: bool,
}

fn default_beta() -> f64 {
    DEFAULT_KAISER_BETA
}

impl GateSpec {
    pub fn new(center_s: f64, span_s: f64) -> Result<Self> {
        let g = Self { center_s, span_s, kaiser_beta: DEFAULT_KAISER_BETA, splice_below_cutoff: false };
        g.validate()?;
        Ok(g)
    }

    pub fn with_splice(mut self, splice: bool) -> Self {
        self.splice_below_cutoff = splice;
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.kaiser_beta = beta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.span_s.is_finite() && self.span_s > 0.0) {
            return Err(Error::invalid(format!("gate span must be > 0, got {}", self.span_s)));
        }
        if !self.center_s.is_finite() {
            return Err(Error::invalid("gate center must be finite"));
        }
        if !(self.kaiser_beta.is_finite() && self.kaiser_beta >= 0.0) {
            return Err(Error::invalid(format!("Kaiser beta must be ≥ 0, got {}", self.kaiser_beta)));
        }
        Ok(())
    }

    /// Frequencies below `1 / span` are not resolved by the gate.
    pub fn cutoff_hz(&self) -> f64 {
        1.0 / self.span_s
    }

    /// Attenuators: 5 ns at the reference plane, original data spliced
    /// below the 200 MHz cutoff.
    pub fn attenuator() -> Self {
        Self { center_s: 0.0, span_s: 5e-9, kaiser_beta: DEFAULT_KAISER_BETA, splice_below_cutoff: true }
    }

    /// Cable input connector: 3 ns at the reference plane.
    pub fn connector() -> Self {
        Self { center_s: 0.0, span_s: 3e-9, kaiser_beta: DEFAULT_KAISER_BETA, splice_below_cutoff: false }
    }

    /// Shorting cap at the far end of a 230 mm cable: 3.8 ns at 2.15 ns.
    pub fn through_short() -> Self {
        Self { center_s: 2.15e-9, span_s: 3.8e-9, kaiser_beta: DEFAULT_KAISER_BETA, splice_below_cutoff: false }
    }

    /// Look up a named preset: `atten`, `connector` or `through-short`.
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "atten" => Ok(Self::attenuator()),
            "connector" => Ok(Self::connector()),
            "through-short" => Ok(Self::through_short()),
            other => Err(Error::Config(format!(
                "unknown gate preset `{other}` (expected atten, connector or through-short)"
            ))),
        }
    }
}

/// Uniformly sampled time response; sample `j` is at `t0_s + j·dt_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeTrace {
    pub dt_s: f64,
    pub t0_s: f64,
    pub values: Vec<Complex64>,
}

impl TimeTrace {
    pub fn new(dt_s: f64, t0_s: f64, values: Vec<Complex64>) -> Result<Self> {
        if !(dt_s > 0.0) || values.len() < 2 {
            return Err(Error::invalid("time trace needs dt > 0 and at least 2 samples"));
        }
        Ok(Self { dt_s, t0_s, values })
    }

    pub fn time(&self, j: usize) -> f64 {
        self.t0_s + j as f64 * self.dt_s
    }

    pub fn span_s(&self) -> f64 {
        self.values.len() as f64 * self.dt_s
    }

    /// Index and magnitude of the largest sample, optionally restricted to
    /// `t_min..=t_max`.
    pub fn peak(&self, t_min: f64, t_max: f64) -> Option<(usize, f64)> {
        self.values
            .iter()
            .enumerate()
            .filter(|(j, _)| {
                let t = self.time(*j);
                t >= t_min && t <= t_max
            })
            .map(|(j, v)| (j, v.norm()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }
}

/// Layout of the Hermitian-extended transform for a given measured grid.
struct Layout {
    first_bin: usize,
    count: usize,
    len: usize,
    df: f64,
}

impl Layout {
    fn of(trace: &ComplexTrace) -> Result<Self> {
        let grid = trace.grid();
        let first_bin =
            grid.alignment().ok_or_else(|| Error::invalid("time-domain transform needs start frequency = n·step"))?;
        if grid.count() < 16 {
            return Err(Error::invalid(format!("time-domain transform needs ≥ 16 points, got {}", grid.count())));
        }
        let top = first_bin + grid.count() - 1;
        Ok(Self { first_bin, count: grid.count(), len: 2 * top + 1, df: grid.step_hz() })
    }

    fn dt(&self) -> f64 {
        1.0 / (self.len as f64 * self.df)
    }

    /// Time of unshifted buffer index `j` (indices past the midpoint are negative times).
    fn time_of(&self, j: usize) -> f64 {
        let half = self.len / 2;
        let s = if j <= half { j as f64 } else { j as f64 - self.len as f64 };
        s * self.dt()
    }

    fn spectrum(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.len];
        let lowest = values[0];
        buf[0] = Complex64::new(lowest.re, 0.0);
        for b in buf.iter_mut().take(self.first_bin).skip(1) {
            *b = lowest;
        }
        for (k, &v) in values.iter().enumerate() {
            buf[self.first_bin + k] = v;
        }
        let top = self.len / 2;
        for k in 1..=top {
            buf[self.len - k] = buf[k].conj();
        }
        buf
    }

    fn time_response(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut buf = self.spectrum(values);
        ifft(&mut buf);
        buf
    }

    fn measured_bins(&self, mut time: Vec<Complex64>) -> Vec<Complex64> {
        fft(&mut time);
        time[self.first_bin..self.first_bin + self.count].to_vec()
    }
}

/// Inverse transform of the Hermitian-extended spectrum. The returned trace
/// starts at the most negative time; `dt = 1 / (2·f_max)` up to the odd
/// length, and the span is `1 / step`.
pub fn to_time_domain(trace: &ComplexTrace) -> Result<TimeTrace> {
    let layout = Layout::of(trace)?;
    let buf = layout.time_response(trace.values());
    let half = layout.len / 2;
    let mut values = Vec::with_capacity(layout.len);
    values.extend_from_slice(&buf[half + 1..]);
    values.extend_from_slice(&buf[..=half]);
    TimeTrace::new(layout.dt(), -(half as f64) * layout.dt(), values)
}

/// Zeroth-order modified Bessel function of the first kind (power series).
pub fn bessel_i0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    while term > 1e-17 * sum {
        term *= q / (k * k);
        sum += term;
        k += 1.0;
    }
    sum
}

/// Kaiser window of unit peak, evaluated at `t` for a window of width `span`
/// centred at `center`; zero outside.
pub fn kaiser(t: f64, center: f64, span: f64, beta: f64) -> f64 {
    let r = 2.0 * (t - center) / span;
    if r.abs() > 1.0 {
        0.0
    } else {
        bessel_i0(beta * (1.0 - r * r).sqrt()) / bessel_i0(beta)
    }
}

fn gate_raw(layout: &Layout, values: &[Complex64], gate: &GateSpec) -> Vec<Complex64> {
    let mut time = layout.time_response(values);
    for (j, v) in time.iter_mut().enumerate() {
        *v *= kaiser(layout.time_of(j), gate.center_s, gate.span_s, gate.kaiser_beta);
    }
    layout.measured_bins(time)
}

/// Gate a reflection trace in the time domain.
///
/// Each output point is divided by the gate's own response to an ideal
/// reflector at the gate center, so an isolated in-gate reflector keeps its
/// amplitude and the band edges are not rolled off.
pub fn apply_gate(trace: &ComplexTrace, gate: &GateSpec) -> Result<ComplexTrace> {
    gate.validate()?;
    let layout = Layout::of(trace)?;
    let half_span = 0.5 / layout.df;
    if gate.center_s - gate.span_s / 2.0 >= half_span || gate.center_s + gate.span_s / 2.0 <= -half_span {
        return Err(Error::invalid(format!(
            "gate at {} s (span {} s) lies outside the measurable ±{} s",
            gate.center_s, gate.span_s, half_span
        )));
    }
    let grid = trace.grid();
    let ideal: Vec<Complex64> =
        grid.points().map(|f| Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * f * gate.center_s)).collect();
    let reference = gate_raw(&layout, &ideal, gate);
    let gated = gate_raw(&layout, trace.values(), gate);
    let cutoff = gate.cutoff_hz();
    let values = gated
        .iter()
        .zip(&reference)
        .zip(&ideal)
        .zip(trace.values())
        .zip(grid.points())
        .map(|((((g, r), i), orig), f)| {
            if gate.splice_below_cutoff && f < cutoff {
                *orig
            } else if r.norm() > 1e-6 {
                g * i / r
            } else {
                *g
            }
        })
        .collect();
    ComplexTrace::new(*grid, values)
}

/// Transmission magnitude of a shorted line from its gated far-end
/// reflection: `|S21| = sqrt(|S11,gated|)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InsertionLoss {
    pub s21: Vec<f64>,
    /// `−20·log10|S21|`.
    pub loss_db: Vec<f64>,
}

pub fn extract_insertion_loss(gated_short_reflection: &ComplexTrace) -> Result<InsertionLoss> {
    let mut s21 = Vec::with_capacity(gated_short_reflection.len());
    for (f, v) in gated_short_reflection.iter() {
        let mag = v.norm();
        if mag > 1.0 + PASSIVITY_SLACK {
            return Err(Error::invalid(format!("|S11,gated| = {mag} > 1 at {f} Hz")));
        }
        s21.push(mag.sqrt());
    }
    let loss_db = s21.iter().map(|s| -20.0 * s.log10()).collect();
    Ok(InsertionLoss { s21, loss_db })
}

//! ALLXY pair runs on a mismatched line and parameter sweeps.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pulse::{calibrate_amplitude, synth_sequence, GatePulse};
use super::{evolve, fidelity, GateKind, GateOp, QubitParams, QubitState};
use crate::distortion::{distort, distort_fourier, impulse_response_taps, MismatchModel};
use crate::sparam::fmt_num;
use crate::spectrum::{fast_len, fft};
use crate::{Error, Result};

/// How the line response is applied to the drive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResponseRoute {
    /// Finite tap ladder (`max_reflections + 1` copies).
    #[default]
    Taps,
    /// Closed-form transmission applied in the frequency domain.
    Fourier,
}

/// Pre-compensation of the distorted drive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LineCompensation {
    /// Drive the line with the ideal calibrated pulses.
    None,
    /// Divide the drive by the line's complex transmission at the qubit
    /// frequency (amplitude and carrier phase), as a continuous-wave
    /// calibration through the line would.
    #[default]
    CarrierTransfer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimOptions {
    #[serde(default)]
    pub route: ResponseRoute,
    #[serde(default)]
    pub compensation: LineCompensation,
}

fn calibrated(kind: GateKind, duration_s: f64, params: &QubitParams) -> Result<GatePulse> {
    let op = GateOp::new(kind);
    let amplitude = if kind == GateKind::I { 0.0 } else { calibrate_amplitude(&op, duration_s, params)? };
    Ok(GatePulse { amplitude, phase_rad: op.phase_rad })
}

fn pair_deviation(
    model: Option<&MismatchModel>,
    pair: (GateKind, GateKind),
    duration_s: f64,
    params: &QubitParams,
    opts: &SimOptions,
) -> Result<f64> {
    let gates = [calibrated(pair.0, duration_s, params)?, calibrated(pair.1, duration_s, params)?];
    let Some(model) = model else {
        let w = synth_sequence(&gates, duration_s, params, 0)?;
        let a = evolve(&QubitState::ground(), &w, params)?;
        let b = evolve(&QubitState::ground(), &w, params)?;
        return Ok(1.0 - fidelity(&a, &b));
    };
    model.validate()?;
    let f_q = params.freq_hz();
    let taps = impulse_response_taps(model).relative_to_direct();
    let transfer = match opts.route {
        ResponseRoute::Taps => taps.transfer_at(f_q),
        ResponseRoute::Fourier => model.s21_at(f_q) * Complex64::from_polar(1.0, params.omega_q * model.transit_s()),
    };
    let (gain, shift) = match opts.compensation {
        LineCompensation::None => (1.0, 0.0),
        LineCompensation::CarrierTransfer => (1.0 / transfer.norm(), -transfer.arg()),
    };
    let driven: Vec<GatePulse> =
        gates.iter().map(|g| GatePulse { amplitude: g.amplitude * gain, phase_rad: g.phase_rad + shift }).collect();
    let drive = synth_sequence(&driven, duration_s, params, 0)?;
    let distorted = match opts.route {
        ResponseRoute::Taps => distort(&drive, &taps),
        ResponseRoute::Fourier => distort_fourier(&drive, model, true)?,
    };
    let reference = synth_sequence(&gates, duration_s, params, distorted.len())?;
    let distorted = distorted.padded(reference.len());
    let a = evolve(&QubitState::ground(), &reference, params)?;
    let b = evolve(&QubitState::ground(), &distorted, params)?;
    Ok((1.0 - fidelity(&a, &b)).clamp(0.0, 1.0))
}

/// `1 − F` per pair between the undistorted and distorted evolutions of
/// `|0⟩` under back-to-back calibrated pulses. `None` runs the ideal line
/// against itself.
pub fn run_allxy(
    model: Option<&MismatchModel>,
    duration_s: f64,
    params: &QubitParams,
    pairs: &[(GateKind, GateKind)],
    opts: &SimOptions,
) -> Result<Vec<f64>> {
    if pairs.is_empty() {
        return Err(Error::invalid("no gate pairs requested"));
    }
    pairs.iter().map(|&p| pair_deviation(model, p, duration_s, params, opts)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    LengthM,
    ReturnLossDb,
}

/// Fidelity deviation per axis point (outer) and gate pair (inner).
#[derive(Debug, Clone, PartialEq)]
pub struct FidelitySweepResult {
    pub axis_kind: SweepAxis,
    pub axis: Vec<f64>,
    pub pairs: Vec<(GateKind, GateKind)>,
    pub deviation: Vec<Vec<f64>>,
    pub pulse_duration_s: f64,
}

impl FidelitySweepResult {
    pub fn pair_index(&self, pair: (GateKind, GateKind)) -> Option<usize> {
        self.pairs.iter().position(|&p| p == pair)
    }

    /// Deviation along the axis for one pair.
    pub fn series(&self, pair: (GateKind, GateKind)) -> Option<Vec<f64>> {
        let i = self.pair_index(pair)?;
        Some(self.deviation.iter().map(|row| row[i]).collect())
    }

    /// `axis_value,pair,one_minus_f`, axis-major.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("axis_value,pair,one_minus_f\n");
        for (x, row) in self.axis.iter().zip(&self.deviation) {
            for (p, v) in self.pairs.iter().zip(row) {
                out.push_str(&format!("{},{}-{},{}\n", fmt_num(*x), p.0, p.1, fmt_num(*v)));
            }
        }
        out
    }
}

fn sweep(
    template: &MismatchModel,
    axis_kind: SweepAxis,
    axis: &[f64],
    duration_s: f64,
    params: &QubitParams,
    pairs: &[(GateKind, GateKind)],
    opts: &SimOptions,
) -> Result<FidelitySweepResult> {
    if axis.is_empty() {
        return Err(Error::invalid("sweep axis is empty"));
    }
    if axis.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::invalid("sweep axis values must be finite and > 0"));
    }
    if pairs.is_empty() {
        return Err(Error::invalid("no gate pairs requested"));
    }
    // warm the calibration cache before fanning out
    for &(a, b) in pairs {
        calibrated(a, duration_s, params)?;
        calibrated(b, duration_s, params)?;
    }
    let deviation = axis
        .par_iter()
        .map(|&v| {
            let m = match axis_kind {
                SweepAxis::LengthM => template.with_length(v),
                SweepAxis::ReturnLossDb => template.with_return_loss(v),
            };
            run_allxy(Some(&m), duration_s, params, pairs, opts)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FidelitySweepResult {
        axis_kind,
        axis: axis.to_vec(),
        pairs: pairs.to_vec(),
        deviation,
        pulse_duration_s: duration_s,
    })
}

/// Vary the element separation at the template's return losses.
pub fn sweep_length(
    template: &MismatchModel,
    lengths_m: &[f64],
    duration_s: f64,
    params: &QubitParams,
    pairs: &[(GateKind, GateKind)],
    opts: &SimOptions,
) -> Result<FidelitySweepResult> {
    sweep(template, SweepAxis::LengthM, lengths_m, duration_s, params, pairs, opts)
}

/// Vary both return losses together at the template's separation.
pub fn sweep_return_loss(
    template: &MismatchModel,
    rls_db: &[f64],
    duration_s: f64,
    params: &QubitParams,
    pairs: &[(GateKind, GateKind)],
    opts: &SimOptions,
) -> Result<FidelitySweepResult> {
    sweep(template, SweepAxis::ReturnLossDb, rls_db, duration_s, params, pairs, opts)
}

/// Axis positions where `values` crosses `threshold`, interpolated linearly
/// in `log10(value)`.
pub fn threshold_crossings(axis: &[f64], values: &[f64], threshold: f64) -> Vec<f64> {
    let lg = |v: f64| v.max(1e-300).log10();
    let t = lg(threshold);
    let mut out = Vec::new();
    for i in 0..axis.len().min(values.len()).saturating_sub(1) {
        let (a, b) = (lg(values[i]) - t, lg(values[i + 1]) - t);
        if a == 0.0 {
            out.push(axis[i]);
        } else if a * b < 0.0 {
            out.push(axis[i] + (axis[i + 1] - axis[i]) * a / (a - b));
        }
    }
    if values.len() == axis.len() && values.last().is_some_and(|&v| lg(v) == t) {
        out.push(axis[axis.len() - 1]);
    }
    out
}

/// Period of the strongest non-dc spectral component of a uniformly
/// sampled series (mean removed, 16× zero padding).
pub fn dominant_period(axis: &[f64], values: &[f64]) -> Option<f64> {
    let n = axis.len();
    if n < 4 || values.len() != n {
        return None;
    }
    let step = (axis[n - 1] - axis[0]) / (n - 1) as f64;
    if !(step > 0.0) || axis.iter().enumerate().any(|(j, &x)| (x - axis[0] - j as f64 * step).abs() > 1e-6 * step) {
        return None;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let len = fast_len(16 * n);
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v - mean, 0.0)).collect();
    buf.resize(len, Complex64::new(0.0, 0.0));
    fft(&mut buf);
    // skip the main lobe of dc: periods longer than the record are not resolved
    let first = len / n + 1;
    let k = (first..=len / 2).max_by(|&a, &b| buf[a].norm().total_cmp(&buf[b].norm()))?;
    Some(len as f64 * step / k as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossings_interpolate_in_log() {
        let axis = [5.0, 6.0, 7.0];
        let v = [1e-2, 1e-3, 1e-5];
        let c = threshold_crossings(&axis, &v, 1e-4);
        assert_eq!(c.len(), 1);
        assert!((c[0] - 6.5).abs() < 1e-12);
        assert_eq!(threshold_crossings(&axis, &v, 1e-3), vec![6.0]);
        assert!(threshold_crossings(&axis, &v, 1.0).is_empty());
    }

    #[test]
    fn period_of_a_sinusoid() {
        let axis: Vec<f64> = (0..200).map(|j| 0.2 + j as f64 * 1e-3).collect();
        let v: Vec<f64> = axis.iter().map(|x| 1.0 + (2.0 * std::f64::consts::PI * x / 0.021).cos()).collect();
        let p = dominant_period(&axis, &v).unwrap();
        assert!((p / 0.021 - 1.0).abs() < 0.02, "{p}");
        assert!(dominant_period(&[1.0, 2.0, 4.0, 5.0], &[0.0; 4]).is_none());
    }

    #[test]
    fn csv_layout() {
        let r = FidelitySweepResult {
            axis_kind: SweepAxis::ReturnLossDb,
            axis: vec![10.0],
            pairs: vec![(GateKind::XPi, GateKind::YPi), (GateKind::I, GateKind::I)],
            deviation: vec![vec![1e-3, 0.0]],
            pulse_duration_s: 5e-9,
        };
        assert_eq!(r.to_csv(), "axis_value,pair,one_minus_f\n1.00000000e1,Xpi-Ypi,1.00000000e-3\n1.00000000e1,I-I,0\n");
        assert_eq!(r.series((GateKind::XPi, GateKind::YPi)).unwrap(), vec![1e-3]);
    }

    #[test]
    fn empty_inputs_are_rejected() {
        let m = MismatchModel::symmetric(15.0, 0.276).unwrap();
        let p = QubitParams::default();
        assert!(run_allxy(Some(&m), 5e-9, &p, &[], &SimOptions::default()).is_err());
        assert!(sweep_length(&m, &[], 5e-9, &p, &[(GateKind::XPi, GateKind::YPi)], &SimOptions::default()).is_err());
        assert!(sweep_length(&m, &[-0.1], 5e-9, &p, &[(GateKind::XPi, GateKind::YPi)], &SimOptions::default()).is_err());
    }
}

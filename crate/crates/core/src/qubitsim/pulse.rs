//! Gaussian gate pulses and amplitude calibration on the ideal line.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use super::{evolve, GateKind, GateOp, QubitParams, QubitState};
use crate::distortion::PulseWaveform;
use crate::{Error, Result};

/// Truncated Gaussian on `[0, T]` with `σ = T/4`, baseline-subtracted so both
/// ends are zero and scaled to unit peak. Returns `round(T/dt) + 1` samples.
pub fn gaussian_envelope(duration_s: f64, dt_s: f64) -> Result<Vec<f64>> {
    let n = (duration_s / dt_s).round() as usize;
    if !(duration_s.is_finite() && dt_s > 0.0) || n < 10 {
        return Err(Error::invalid(format!(
            "pulse duration {duration_s} s must exceed 10 integrator steps of {dt_s} s"
        )));
    }
    let t_total = n as f64 * dt_s;
    let sigma = t_total / 4.0;
    let g = |j: usize| (-0.5 * ((j as f64 * dt_s - t_total / 2.0) / sigma).powi(2)).exp();
    let base = g(0);
    let mut env: Vec<f64> = (0..=n).map(|j| g(j) - base).collect();
    let peak = env.iter().cloned().fold(0.0, f64::max);
    env.iter_mut().for_each(|v| *v /= peak);
    env[0] = 0.0;
    env[n] = 0.0;
    Ok(env)
}

/// One slot of a gate sequence: drive amplitude and carrier phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GatePulse {
    pub amplitude: f64,
    pub phase_rad: f64,
}

/// Back-to-back gates of equal duration with no gap, carrier continuous in
/// absolute time, padded with zeros to at least `min_len` samples.
pub fn synth_sequence(
    gates: &[GatePulse],
    duration_s: f64,
    params: &QubitParams,
    min_len: usize,
) -> Result<PulseWaveform> {
    params.validate()?;
    let env = gaussian_envelope(duration_s, params.dt_s)?;
    let n = env.len() - 1;
    let len = (gates.len() * n + 1).max(min_len);
    let mut x = vec![0.0; len];
    for (slot, g) in gates.iter().enumerate() {
        if g.amplitude == 0.0 {
            continue;
        }
        let start = slot * n;
        for (j, e) in env.iter().enumerate() {
            let t = (start + j) as f64 * params.dt_s;
            x[start + j] += g.amplitude * e * (params.omega_q * t + g.phase_rad).cos();
        }
    }
    let phase = gates.first().map_or(0.0, |g| g.phase_rad);
    PulseWaveform::new(params.dt_s, x, params.freq_hz(), phase)
}

/// Signed rotation angle in `[0, 2π)` reached from `|0⟩` about the gate's
/// drive axis, together with the final state.
pub fn rotation_angle(
    gate: &GateOp,
    amplitude: f64,
    duration_s: f64,
    params: &QubitParams,
) -> Result<(f64, QubitState)> {
    let wave = synth_sequence(&[GatePulse { amplitude, phase_rad: gate.phase_rad }], duration_s, params, 0)?;
    let end = evolve(&QubitState::ground(), &wave, params)?;
    let t_end = (wave.len() - 1) as f64 * params.dt_s;
    // back to the frame co-rotating with the carrier
    let c0 = end.amplitudes[0];
    let c1 = end.amplitudes[1] * num_complex::Complex64::from_polar(1.0, params.omega_q * t_end);
    let i = num_complex::Complex64::new(0.0, 1.0);
    let s = (i * num_complex::Complex64::from_polar(1.0, gate.phase_rad) * c0.conj() * c1).re;
    let z = c0.norm_sqr() - c1.norm_sqr();
    Ok(((2.0 * s).atan2(z).rem_euclid(2.0 * std::f64::consts::PI), end))
}

type CacheKey = (u64, u64, u64, u64, u64);

fn cache() -> &'static Mutex<HashMap<CacheKey, f64>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, f64>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Drive amplitude at which the undistorted pulse rotates `|0⟩` by the
/// gate's target angle. Bisection on the signed angle, bracketed at 0.3–1.7×
/// the area-theorem estimate; results are memoized per gate, duration and
/// qubit parameters.
pub fn calibrate_amplitude(gate: &GateOp, duration_s: f64, params: &QubitParams) -> Result<f64> {
    if gate.kind == GateKind::I || gate.angle_rad == 0.0 {
        return Err(Error::invalid("the identity gate has no amplitude to calibrate"));
    }
    params.validate()?;
    let key = (
        gate.angle_rad.to_bits(),
        gate.phase_rad.to_bits(),
        duration_s.to_bits(),
        params.omega_q.to_bits(),
        params.dt_s.to_bits(),
    );
    if let Some(&a) = cache().lock().expect("calibration cache poisoned").get(&key) {
        return Ok(a);
    }
    let env = gaussian_envelope(duration_s, params.dt_s)?;
    let area: f64 = env.iter().sum::<f64>() * params.dt_s;
    let estimate = gate.angle_rad / area;
    let (mut lo, mut hi) = (0.3 * estimate, 1.7 * estimate);
    let target = gate.angle_rad;
    let angle = |a: f64| rotation_angle(gate, a, duration_s, params).map(|r| r.0);
    let (f_lo, f_hi) = (angle(lo)? - target, angle(hi)? - target);
    if !(f_lo < 0.0 && f_hi > 0.0) {
        return Err(Error::Numeric(format!(
            "amplitude calibration for {} is not bracketed by [{lo:e}, {hi:e}]",
            gate.kind
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if angle(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let a = 0.5 * (lo + hi);
    cache().lock().expect("calibration cache poisoned").insert(key, a);
    Ok(a)
}

/// Calibrated single-gate pulse starting at `t = 0`; `I` yields zeros.
pub fn synth_gate_pulse(gate: &GateOp, duration_s: f64, params: &QubitParams) -> Result<PulseWaveform> {
    let amplitude = if gate.kind == GateKind::I { 0.0 } else { calibrate_amplitude(gate, duration_s, params)? };
    let mut w = synth_sequence(&[GatePulse { amplitude, phase_rad: gate.phase_rad }], duration_s, params, 0)?;
    w.phase_rad = gate.phase_rad;
    Ok(w)
}

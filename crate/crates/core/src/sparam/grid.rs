use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Relative tolerance (per frequency value) used when deciding whether
/// listed frequencies form a uniform grid.
pub const GRID_REL_TOL: f64 = 1e-9;

/// Uniform frequency grid: points are exactly `start_hz + k * step_hz`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    start_hz: f64,
    step_hz: f64,
    count: usize,
}

impl FrequencyGrid {
    pub fn new(start_hz: f64, step_hz: f64, count: usize) -> Result<Self> {
        if !(start_hz.is_finite() && start_hz > 0.0) {
            return Err(Error::invalid(format!("grid start must be > 0 Hz, got {start_hz}")));
        }
        if !(step_hz.is_finite() && step_hz > 0.0) {
            return Err(Error::invalid(format!("grid step must be > 0 Hz, got {step_hz}")));
        }
        if count < 2 {
            return Err(Error::invalid(format!("grid needs at least 2 points, got {count}")));
        }
        Ok(Self { start_hz, step_hz, count })
    }

    /// Grid spanning `start_hz..=stop_hz` with `count` points.
    pub fn from_span(start_hz: f64, stop_hz: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::invalid(format!("grid needs at least 2 points, got {count}")));
        }
        Self::new(start_hz, (stop_hz - start_hz) / (count - 1) as f64, count)
    }

    /// Infer a uniform grid from listed frequencies. Returns `None` when the
    /// spacing deviates from uniform by more than [`GRID_REL_TOL`] of a step.
    pub fn infer(freqs: &[f64]) -> Option<Self> {
        if freqs.len() < 2 {
            return None;
        }
        let start = freqs[0];
        let step = (freqs[freqs.len() - 1] - start) / (freqs.len() - 1) as f64;
        let uniform = freqs.iter().enumerate().all(|(k, &f)| {
            let expected = start + k as f64 * step;
            (f - expected).abs() <= GRID_REL_TOL * expected.abs().max(step)
        });
        if uniform {
            Self::new(start, step, freqs.len()).ok()
        } else {
            None
        }
    }

    pub fn start_hz(&self) -> f64 {
        self.start_hz
    }

    pub fn step_hz(&self) -> f64 {
        self.step_hz
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn stop_hz(&self) -> f64 {
        self.point(self.count - 1)
    }

    pub fn point(&self, k: usize) -> f64 {
        self.start_hz + k as f64 * self.step_hz
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.count).map(move |k| self.point(k))
    }

    /// Number of steps between dc and the first point, when the start is an
    /// integer multiple of the step.
    pub fn alignment(&self) -> Option<usize> {
        let n = (self.start_hz / self.step_hz).round();
        if n >= 1.0 && (n * self.step_hz - self.start_hz).abs() <= GRID_REL_TOL * self.step_hz {
            Some(n as usize)
        } else {
            None
        }
    }

    pub fn is_aligned(&self) -> bool {
        self.alignment().is_some()
    }

    /// Same start, step and count, up to text round-off.
    pub fn same_as(&self, other: &FrequencyGrid) -> bool {
        resample_check(self, other)
    }

    /// Index of the grid point closest to `freq_hz`, if inside the grid span
    /// (half a step of slack at both ends).
    pub fn nearest_index(&self, freq_hz: f64) -> Option<usize> {
        let k = ((freq_hz - self.start_hz) / self.step_hz).round();
        if k < 0.0 || k > (self.count - 1) as f64 {
            None
        } else {
            Some(k as usize)
        }
    }
}

/// True iff both grids have the same start, step and count. Downstream
/// operations never interpolate between grids, so a `false` here is an error
/// for them.
pub fn resample_check(a: &FrequencyGrid, b: &FrequencyGrid) -> bool {
    const TOL: f64 = 1e-12;
    let close = |x: f64, y: f64| (x - y).abs() <= TOL * x.abs().max(y.abs());
    a.count == b.count && close(a.start_hz, b.start_hz) && close(a.step_hz, b.step_hz)
}

pub(crate) fn require_same_grid(a: &FrequencyGrid, b: &FrequencyGrid, what: &str) -> Result<()> {
    if resample_check(a, b) {
        Ok(())
    } else {
        Err(Error::GridMismatch(format!(
            "{what}: [{} Hz, step {} Hz, {} pts] vs [{} Hz, step {} Hz, {} pts]",
            a.start_hz, a.step_hz, a.count, b.start_hz, b.step_hz, b.count
        )))
    }
}

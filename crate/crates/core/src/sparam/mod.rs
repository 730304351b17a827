//! S-parameter containers, Touchstone v1 I/O and the frequency-grid
//! discipline every other module relies on.
//!
//! Every downstream operation requires identical grids and never
//! interpolates; use [`resample_check`] before combining traces.

mod grid;
mod touchstone;

pub(crate) use grid::require_same_grid;
pub use grid::{resample_check, FrequencyGrid, GRID_REL_TOL};
pub use touchstone::{
    parse_touchstone, read_touchstone, write_touchstone, DataFormat, NetworkData, PortCount, Touchstone,
};

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::{Error, Result};

/// One complex value per grid point (reflection or transmission coefficient).
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexTrace {
    grid: FrequencyGrid,
    values: Vec<Complex64>,
}

impl ComplexTrace {
    pub fn new(grid: FrequencyGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.count() {
            return Err(Error::invalid(format!("trace has {} values for a {}-point grid", values.len(), grid.count())));
        }
        if let Some(k) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::invalid(format!("non-finite value at {} Hz", grid.point(k))));
        }
        Ok(Self { grid, values })
    }

    /// Sample `f(freq_hz)` at every grid point.
    pub fn from_fn(grid: FrequencyGrid, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let values = grid.points().map(f).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, Complex64)> + '_ {
        self.grid.points().zip(self.values.iter().copied())
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    /// −20·log10|value| per point (return loss for reflections, insertion
    /// loss for transmissions).
    pub fn loss_db(&self) -> Vec<f64> {
        self.values.iter().map(|v| -20.0 * v.norm().log10()).collect()
    }

    /// Value at the grid point nearest `freq_hz`.
    pub fn value_near(&self, freq_hz: f64) -> Option<Complex64> {
        self.grid.nearest_index(freq_hz).map(|k| self.values[k])
    }

    /// CSV with header `freq_hz,real,imag`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("freq_hz,real,imag\n");
        for (f, v) in self.iter() {
            let _ = writeln!(out, "{},{},{}", fmt_num(f), fmt_num(v.re), fmt_num(v.im));
        }
        out
    }
}

/// Two-port trace sharing one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPortTrace {
    grid: FrequencyGrid,
    pub s11: Vec<Complex64>,
    pub s21: Vec<Complex64>,
    pub s12: Vec<Complex64>,
    pub s22: Vec<Complex64>,
}

impl TwoPortTrace {
    pub fn new(
        grid: FrequencyGrid,
        s11: Vec<Complex64>,
        s21: Vec<Complex64>,
        s12: Vec<Complex64>,
        s22: Vec<Complex64>,
    ) -> Result<Self> {
        let n = grid.count();
        if [s11.len(), s21.len(), s12.len(), s22.len()].iter().any(|&l| l != n) {
            return Err(Error::invalid(format!("two-port sequences must all have {n} points")));
        }
        Ok(Self { grid, s11, s21, s12, s22 })
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn s11_trace(&self) -> ComplexTrace {
        ComplexTrace { grid: self.grid, values: self.s11.clone() }
    }

    pub fn s21_trace(&self) -> ComplexTrace {
        ComplexTrace { grid: self.grid, values: self.s21.clone() }
    }
}

/// Fixed nine-significant-digit formatting used by every tabular output.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    format!("{:.8e}", x)
}

/// Parse CSV with header `freq_hz,real,imag` into a trace on a uniform grid.
pub fn parse_trace_csv(text: &str) -> Result<ComplexTrace> {
    let mut freqs = Vec::new();
    let mut values = Vec::new();
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, header)) if header.trim().replace(' ', "") == "freq_hz,real,imag" => {}
        Some((i, _)) => return Err(Error::parse(i + 1, "expected header `freq_hz,real,imag`")),
        None => return Err(Error::parse(1, "empty CSV")),
    }
    for (i, line) in lines {
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != 3 {
            return Err(Error::parse(i + 1, format!("expected 3 columns, found {}", cols.len())));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| Error::parse(i + 1, format!("non-numeric token `{s}`")));
        freqs.push(num(cols[0])?);
        values.push(Complex64::new(num(cols[1])?, num(cols[2])?));
    }
    let grid = FrequencyGrid::infer(&freqs).ok_or_else(|| Error::invalid("CSV frequencies are not a uniform grid"))?;
    ComplexTrace::new(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_length_must_match_grid() {
        let g = FrequencyGrid::new(1e9, 1e6, 3).unwrap();
        assert!(ComplexTrace::new(g, vec![Complex64::new(1.0, 0.0); 2]).is_err());
        assert!(ComplexTrace::new(g, vec![Complex64::new(f64::NAN, 0.0); 3]).is_err());
    }

    #[test]
    fn csv_roundtrip() {
        let g = FrequencyGrid::new(1e9, 1e6, 4).unwrap();
        let t = ComplexTrace::from_fn(g, |f| Complex64::new(f * 1e-10, -0.5)).unwrap();
        let csv = t.to_csv();
        assert!(csv.starts_with("freq_hz,real,imag\n"));
        let back = parse_trace_csv(&csv).unwrap();
        assert!(back.grid().same_as(t.grid()));
        for (a, b) in back.values().iter().zip(t.values()) {
            assert!((a - b).norm() < 1e-8);
        }
    }

    #[test]
    fn fixed_formatting() {
        assert_eq!(fmt_num(0.019), "1.90000000e-2");
        assert_eq!(fmt_num(0.0), "0");
    }
}

//! Data-based short-open-load one-port calibration.
//!
//! The error box is the three-term model with directivity `e00`, source
//! match `e11` and `Δe = e00·e11 − e01·e10`:
//!
//! ```text
//! m = e00 + (e00·e11 − Δe)·Γ / (1 − e11·Γ)
//! ```
//!
//! which is linear in the unknowns once rearranged as
//! `e00 + Γ·m·e11 − Γ·Δe = m`. Three standards give an exactly determined
//! 3×3 system per frequency. The standards' reflection coefficients are
//! data (a pre-characterization trace), not polynomial models.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::sparam::{fmt_num, require_same_grid, ComplexTrace, FrequencyGrid};
use crate::{Error, Result};

/// Minimum pairwise separation of the defined standards at any frequency.
pub const MIN_STANDARD_SEPARATION: f64 = 1e-6;
/// Denominators below this magnitude make forward or inverse mapping singular.
pub const SINGULAR_EPS: f64 = 1e-15;

/// The three standards: data-based definitions and their raw measurements.
#[derive(Debug, Clone)]
pub struct StandardsSet {
    pub defined_short: ComplexTrace,
    pub defined_open: ComplexTrace,
    pub defined_load: ComplexTrace,
    pub measured_short: ComplexTrace,
    pub measured_open: ComplexTrace,
    pub measured_load: ComplexTrace,
}

impl StandardsSet {
    pub fn grid(&self) -> &FrequencyGrid {
        self.defined_short.grid()
    }

    /// Checks the shared grid and the pairwise distinctness of definitions.
    pub fn validate(&self) -> Result<()> {
        let g = self.grid();
        for (name, t) in [
            ("defined open", &self.defined_open),
            ("defined load", &self.defined_load),
            ("measured short", &self.measured_short),
            ("measured open", &self.measured_open),
            ("measured load", &self.measured_load),
        ] {
            require_same_grid(g, t.grid(), &format!("defined short vs {name}"))?;
        }
        let (s, o, l) = (self.defined_short.values(), self.defined_open.values(), self.defined_load.values());
        for k in 0..g.count() {
            let sep = (s[k] - o[k]).norm().min((s[k] - l[k]).norm()).min((o[k] - l[k]).norm());
            if sep <= MIN_STANDARD_SEPARATION {
                return Err(Error::Singular {
                    freq_hz: g.point(k),
                    message: format!("standard definitions not distinct (separation {sep:e})"),
                });
            }
        }
        Ok(())
    }

    fn pairs_at(&self, k: usize) -> [(Complex64, Complex64); 3] {
        [
            (self.defined_short.values()[k], self.measured_short.values()[k]),
            (self.defined_open.values()[k], self.measured_open.values()[k]),
            (self.defined_load.values()[k], self.measured_load.values()[k]),
        ]
    }
}

/// Per-frequency three-term error coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorModelOnePort {
    grid: FrequencyGrid,
    pub e00: Vec<Complex64>,
    pub e11: Vec<Complex64>,
    pub delta_e: Vec<Complex64>,
}

impl ErrorModelOnePort {
    pub fn new(grid: FrequencyGrid, e00: Vec<Complex64>, e11: Vec<Complex64>, delta_e: Vec<Complex64>) -> Result<Self> {
        let n = grid.count();
        if e00.len() != n || e11.len() != n || delta_e.len() != n {
            return Err(Error::invalid(format!("error-model sequences must all have {n} points")));
        }
        for k in 0..n {
            let tracking = e00[k] * e11[k] - delta_e[k];
            let finite = [e00[k], e11[k], delta_e[k]].iter().all(|v| v.re.is_finite() && v.im.is_finite());
            if !finite || tracking.norm() == 0.0 {
                return Err(Error::Singular {
                    freq_hz: grid.point(k),
                    message: "reflection tracking e01·e10 vanishes or is non-finite".into(),
                });
            }
        }
        Ok(Self { grid, e00, e11, delta_e })
    }

    /// Same error box at every grid point.
    pub fn constant(grid: FrequencyGrid, e00: Complex64, e11: Complex64, delta_e: Complex64) -> Result<Self> {
        let n = grid.count();
        Self::new(grid, vec![e00; n], vec![e11; n], vec![delta_e; n])
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    /// `e01·e10 = e00·e11 − Δe` per point.
    pub fn reflection_tracking(&self) -> Vec<Complex64> {
        (0..self.grid.count()).map(|k| self.e00[k] * self.e11[k] - self.delta_e[k]).collect()
    }

    /// CSV: `freq_hz,e00_re,e00_im,e11_re,e11_im,delta_e_re,delta_e_im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("freq_hz,e00_re,e00_im,e11_re,e11_im,delta_e_re,delta_e_im\n");
        for (k, f) in self.grid.points().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                fmt_num(f),
                fmt_num(self.e00[k].re),
                fmt_num(self.e00[k].im),
                fmt_num(self.e11[k].re),
                fmt_num(self.e11[k].im),
                fmt_num(self.delta_e[k].re),
                fmt_num(self.delta_e[k].im),
            );
        }
        out
    }
}

/// Solve `A·x = b` for a 3×3 complex system with partial pivoting.
#[allow(clippy::needless_range_loop)]
fn solve3(mut a: [[Complex64; 3]; 3], mut b: [Complex64; 3]) -> Option<[Complex64; 3]> {
    let scale = a.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))?;
        if a[piv][col].norm() <= 1e-14 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let factor = a[row][col] / a[col][col];
            for c in col..3 {
                let sub = factor * a[col][c];
                a[row][c] -= sub;
            }
            let sub = factor * b[col];
            b[row] -= sub;
        }
    }
    let mut x = [Complex64::new(0.0, 0.0); 3];
    for row in (0..3).rev() {
        let mut acc = b[row];
        for c in row + 1..3 {
            acc -= a[row][c] * x[c];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// Solve the three-term error model at every frequency.
pub fn solve_error_model(standards: &StandardsSet) -> Result<ErrorModelOnePort> {
    standards.validate()?;
    let grid = *standards.grid();
    let n = grid.count();
    let (mut e00, mut e11, mut delta_e) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for k in 0..n {
        let pairs = standards.pairs_at(k);
        // unknowns ordered (e00, Δe, e11)
        let a = pairs.map(|(gamma, m)| [Complex64::new(1.0, 0.0), -gamma, gamma * m]);
        let b = pairs.map(|(_, m)| m);
        let [x00, xde, x11] = solve3(a, b)
            .ok_or_else(|| Error::Singular { freq_hz: grid.point(k), message: "SOL system is singular".into() })?;
        e00.push(x00);
        delta_e.push(xde);
        e11.push(x11);
    }
    ErrorModelOnePort::new(grid, e00, e11, delta_e)
}

/// Corrected reflection `Γ = (m − e00) / (m·e11 − Δe)` per frequency.
pub fn apply_correction(model: &ErrorModelOnePort, raw_dut: &ComplexTrace) -> Result<ComplexTrace> {
    require_same_grid(model.grid(), raw_dut.grid(), "error model vs DUT")?;
    let values = raw_dut
        .values()
        .iter()
        .enumerate()
        .map(|(k, &m)| {
            let den = m * model.e11[k] - model.delta_e[k];
            if den.norm() < SINGULAR_EPS {
                Err(Error::Singular {
                    freq_hz: model.grid().point(k),
                    message: "correction denominator m·e11 − Δe vanishes".into(),
                })
            } else {
                Ok((m - model.e00[k]) / den)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    ComplexTrace::new(*model.grid(), values)
}

/// Raw measurement produced by the error box for an actual reflection `Γ`.
pub fn forward_model(model: &ErrorModelOnePort, true_gamma: &ComplexTrace) -> Result<ComplexTrace> {
    require_same_grid(model.grid(), true_gamma.grid(), "error model vs reflection")?;
    let values = true_gamma
        .values()
        .iter()
        .enumerate()
        .map(|(k, &g)| {
            let den = Complex64::new(1.0, 0.0) - model.e11[k] * g;
            if den.norm() < SINGULAR_EPS {
                Err(Error::Singular {
                    freq_hz: model.grid().point(k),
                    message: "forward denominator 1 − e11·Γ vanishes".into(),
                })
            } else {
                let tracking = model.e00[k] * model.e11[k] - model.delta_e[k];
                Ok(model.e00[k] + tracking * g / den)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    ComplexTrace::new(*model.grid(), values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn grid() -> FrequencyGrid {
        FrequencyGrid::new(1e9, 1e8, 4).unwrap()
    }

    fn flat(v: Complex64) -> ComplexTrace {
        ComplexTrace::from_fn(grid(), |_| v).unwrap()
    }

    fn ideal_standards_through(model: &ErrorModelOnePort) -> StandardsSet {
        let (s, o, l) = (flat(c(-1.0, 0.0)), flat(c(1.0, 0.0)), flat(c(0.0, 0.0)));
        StandardsSet {
            measured_short: forward_model(model, &s).unwrap(),
            measured_open: forward_model(model, &o).unwrap(),
            measured_load: forward_model(model, &l).unwrap(),
            defined_short: s,
            defined_open: o,
            defined_load: l,
        }
    }

    #[test]
    fn identity_error_box() {
        let id = ErrorModelOnePort::constant(grid(), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)).unwrap();
        let solved = solve_error_model(&ideal_standards_through(&id)).unwrap();
        for k in 0..grid().count() {
            assert!(solved.e00[k].norm() < 1e-15);
            assert!(solved.e11[k].norm() < 1e-15);
            assert!((solved.delta_e[k] - c(-1.0, 0.0)).norm() < 1e-15);
        }
        let m = flat(c(0.3, -0.2));
        assert_eq!(apply_correction(&id, &m).unwrap().values(), m.values());
    }

    #[test]
    fn recovers_worked_error_box() {
        let model = ErrorModelOnePort::constant(grid(), c(0.1, 0.0), c(0.2, 0.0), c(-0.79, 0.0)).unwrap();
        let stds = ideal_standards_through(&model);
        // forward-model oracle: 0.1 + 0.81·(−1)/(1 + 0.2)
        assert!((stds.measured_short.values()[0] - c(-0.575, 0.0)).norm() < 1e-15);
        let solved = solve_error_model(&stds).unwrap();
        for k in 0..grid().count() {
            assert!((solved.e00[k] - c(0.1, 0.0)).norm() < 1e-12);
            assert!((solved.e11[k] - c(0.2, 0.0)).norm() < 1e-12);
            assert!((solved.delta_e[k] - c(-0.79, 0.0)).norm() < 1e-12);
        }
        let corrected = apply_correction(&model, &flat(c(-0.575, 0.0))).unwrap();
        assert!((corrected.values()[0] - c(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn directivity_maps_to_perfect_load() {
        let model = ErrorModelOnePort::constant(grid(), c(0.05, 0.02), c(0.1, -0.1), c(-0.7, 0.1)).unwrap();
        let out = apply_correction(&model, &flat(c(0.05, 0.02))).unwrap();
        assert!(out.values().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn coincident_standards_are_singular() {
        let id = ErrorModelOnePort::constant(grid(), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)).unwrap();
        let mut stds = ideal_standards_through(&id);
        stds.defined_load = flat(c(1.0, 0.0));
        let err = solve_error_model(&stds).unwrap_err();
        assert!(matches!(err, Error::Singular { freq_hz, .. } if freq_hz == 1e9), "{err}");
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let id = ErrorModelOnePort::constant(grid(), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)).unwrap();
        let other = ComplexTrace::from_fn(FrequencyGrid::new(1e9, 1e8, 5).unwrap(), |_| c(0.0, 0.0)).unwrap();
        assert!(matches!(apply_correction(&id, &other), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn singular_correction_reported() {
        // m·e11 − Δe = 0 at m = Δe / e11
        let model = ErrorModelOnePort::constant(grid(), c(0.0, 0.0), c(0.5, 0.0), c(-0.5, 0.0)).unwrap();
        assert!(matches!(apply_correction(&model, &flat(c(-1.0, 0.0))), Err(Error::Singular { .. })));
    }
}

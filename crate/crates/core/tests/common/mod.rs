#![allow(dead_code)]

use std::f64::consts::PI;

use drivecal::solcal::{ErrorModelOnePort, StandardsSet};
use drivecal::sparam::{ComplexTrace, FrequencyGrid};
use drivecal::Complex64;

/// Sum of ideal reflectors `(amplitude, delay)`.
pub fn reflectors(grid: FrequencyGrid, taps: &[(f64, f64)]) -> ComplexTrace {
    ComplexTrace::from_fn(grid, |f| taps.iter().map(|&(a, t)| Complex64::from_polar(a, -2.0 * PI * f * t)).sum())
        .unwrap()
}

/// 10 MHz – 26.5 GHz at 2.5 MHz, start aligned to the step.
pub fn cable_grid() -> FrequencyGrid {
    FrequencyGrid::new(10e6, 2.5e6, 10597).unwrap()
}

/// Measurements of `defined` standards seen through `model`.
pub fn synthetic_standards(model: &ErrorModelOnePort, defined: [ComplexTrace; 3]) -> StandardsSet {
    let [s, o, l] = defined;
    let measured = |t: &ComplexTrace| drivecal::solcal::forward_model(model, t).unwrap();
    StandardsSet {
        measured_short: measured(&s),
        measured_open: measured(&o),
        measured_load: measured(&l),
        defined_short: s,
        defined_open: o,
        defined_load: l,
    }
}

pub fn constant(grid: FrequencyGrid, v: Complex64) -> ComplexTrace {
    ComplexTrace::from_fn(grid, |_| v).unwrap()
}

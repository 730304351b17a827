//! Cryogenic drive-line characterization toolkit.
//!
//! The crate covers the full analysis chain for one-port S-parameter
//! measurements of qubit drive-line components and the consequence of the
//! measured mismatch on single-qubit gates:
//!
//! - [`sparam`]: Touchstone v1 I/O, frequency grids and trace containers.
//! - [`solcal`]: data-based short-open-load calibration (three-term model).
//! - [`timegate`]: frequency/time transforms, Kaiser band-pass gating and
//!   shorted-line insertion-loss extraction.
//! - [`uncertainty`]: root-sum-square error budgets and dB error bars.
//! - [`distortion`]: two-reflector (Fabry–Pérot) impulse responses and pulse
//!   distortion.
//! - [`qubitsim`]: closed two-level system driven by distorted pulses, gate
//!   calibration, ALLXY pairs and fidelity sweeps.
//! - [`pipeline`]: config-driven commands behind the `drivecal` binary.
//!
//! Runnable walkthroughs of each capability live in `examples/`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distortion;
pub mod error;
pub mod pipeline;
pub mod qubitsim;
pub mod solcal;
pub mod sparam;
pub mod spectrum;
pub mod timegate;
pub mod uncertainty;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

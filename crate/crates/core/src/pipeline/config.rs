//! JSON run configuration. Relative paths resolve against the config file's directory.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::distortion::MismatchModel;
use crate::qubitsim::{GateKind, QubitParams, SimOptions, HEADLINE_PAIR};
use crate::sparam::DataFormat;
use crate::timegate::GateSpec;
use crate::{Error, Result};

/// Frequencies reported by `uncertainty` when none are configured.
pub const DEFAULT_REPORT_FREQUENCIES_HZ: [f64; 6] = [1e9, 2e9, 4e9, 5e9, 8e9, 16e9];

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub cal: Option<CalConfig>,
    pub gate: Option<GateConfig>,
    pub extract_loss: Option<ExtractLossConfig>,
    pub uncertainty: Option<UncertaintyConfig>,
    pub fidelity: Option<FidelityConfig>,
    pub pulse: Option<PulseConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StandardsPaths {
    pub defined_short: PathBuf,
    pub defined_open: PathBuf,
    pub defined_load: PathBuf,
    pub measured_short: PathBuf,
    pub measured_open: PathBuf,
    pub measured_load: PathBuf,
}

impl StandardsPaths {
    pub fn named(&self) -> [(&'static str, &PathBuf); 6] {
        [
            ("defined_short", &self.defined_short),
            ("defined_open", &self.defined_open),
            ("defined_load", &self.defined_load),
            ("measured_short", &self.measured_short),
            ("measured_open", &self.measured_open),
            ("measured_load", &self.measured_load),
        ]
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
pub enum OutputFormat {
    #[default]
    RI,
    MA,
    DB,
}

impl From<OutputFormat> for DataFormat {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::RI => DataFormat::RI,
            OutputFormat::MA => DataFormat::MA,
            OutputFormat::DB => DataFormat::DB,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalConfig {
    pub standards: StandardsPaths,
    #[serde(default)]
    pub duts: Vec<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateConfig {
    pub inputs: Vec<PathBuf>,
    pub preset: Option<String>,
    pub custom: Option<GateSpec>,
    #[serde(default)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtractLossConfig {
    /// Shorted-line reflections; gated first when a preset or custom gate is set.
    pub inputs: Vec<PathBuf>,
    pub preset: Option<String>,
    pub custom: Option<GateSpec>,
    #[serde(default)]
    pub sigma_ecal: f64,
    #[serde(default)]
    pub sigma_s21_switch: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UncertaintyConfig {
    pub inputs: Vec<PathBuf>,
    pub frequencies_hz: Option<Vec<f64>>,
    /// `s11_db,sigma_lin` table; takes precedence over `sigma_ecal`.
    pub ecal_table: Option<PathBuf>,
    pub sigma_ecal: Option<f64>,
    /// Port traces for the variability term; takes precedence over `sigma_switch_var`.
    #[serde(default)]
    pub switch_port_traces: Vec<PathBuf>,
    pub sigma_switch_var: Option<f64>,
    /// Repeated actuations of one port, initial first.
    #[serde(default)]
    pub switch_repeats: Vec<PathBuf>,
    pub sigma_switch_rep: Option<f64>,
    #[serde(default)]
    pub include_rep: bool,
    #[serde(default)]
    pub include_load: bool,
    #[serde(default)]
    pub sigma_load: f64,
    #[serde(default)]
    pub s21_prefactor: f64,
}

/// Explicit values or an inclusive linear range.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum AxisSpec {
    List(Vec<f64>),
    Range { start: f64, stop: f64, count: usize },
}

impl AxisSpec {
    pub fn values(&self) -> Result<Vec<f64>> {
        match *self {
            AxisSpec::List(ref v) if !v.is_empty() => Ok(v.clone()),
            AxisSpec::List(_) => Err(Error::Config("sweep axis is empty".into())),
            AxisSpec::Range { start, stop, count } => {
                if count < 2 || !(stop > start) {
                    return Err(Error::Config(format!(
                        "axis range needs count ≥ 2 and stop > start, got {start}..{stop} × {count}"
                    )));
                }
                let step = (stop - start) / (count - 1) as f64;
                Ok((0..count).map(|j| start + j as f64 * step).collect())
            }
        }
    }
}

/// `"headline"`, `"all"` or a list of `[first, second]` gate labels.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum PairSpec {
    Named(String),
    List(Vec<(String, String)>),
}

impl Default for PairSpec {
    fn default() -> Self {
        PairSpec::Named("headline".into())
    }
}

impl PairSpec {
    pub fn pairs(&self) -> Result<Vec<(GateKind, GateKind)>> {
        match self {
            PairSpec::Named(n) if n == "headline" => Ok(vec![HEADLINE_PAIR]),
            PairSpec::Named(n) if n == "all" => Ok(crate::qubitsim::allxy_pairs()),
            PairSpec::Named(n) => Err(Error::Config(format!("unknown pair set `{n}` (expected headline or all)"))),
            PairSpec::List(l) if l.is_empty() => Err(Error::Config("pair list is empty".into())),
            PairSpec::List(l) => {
                l.iter().map(|(a, b)| Ok((GateKind::from_label(a)?, GateKind::from_label(b)?))).collect()
            }
        }
    }
}

fn default_durations() -> Vec<f64> {
    vec![5e-9]
}
fn default_thresholds() -> Vec<f64> {
    vec![1e-3, 1e-4]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FidelityConfig {
    #[serde(default)]
    pub qubit: QubitParams,
    pub model: MismatchModel,
    #[serde(default = "default_durations")]
    pub durations_s: Vec<f64>,
    #[serde(default)]
    pub pairs: PairSpec,
    pub lengths_m: Option<AxisSpec>,
    pub rls_db: Option<AxisSpec>,
    #[serde(default)]
    pub options: SimOptions,
    #[serde(default = "default_thresholds")]
    pub thresholds: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    pub gate: String,
    pub duration_s: f64,
    #[serde(default)]
    pub qubit: QubitParams,
    /// When present, the line-distorted drive is written as well.
    pub model: Option<MismatchModel>,
    #[serde(default)]
    pub options: SimOptions,
}

impl PipelineConfig {
    /// Parse JSON text; syntax and schema errors carry line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid config JSON: {e}")))
    }

    /// Read, parse, and resolve paths relative to the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text).map_err(|e| e.context(path.display().to_string()))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.resolve_paths(&base);
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(c) = &mut self.cal {
            let s = &mut c.standards;
            for p in [
                &mut s.defined_short,
                &mut s.defined_open,
                &mut s.defined_load,
                &mut s.measured_short,
                &mut s.measured_open,
                &mut s.measured_load,
            ] {
                fix(p);
            }
            c.duts.iter_mut().for_each(fix);
        }
        if let Some(g) = &mut self.gate {
            g.inputs.iter_mut().for_each(fix);
        }
        if let Some(x) = &mut self.extract_loss {
            x.inputs.iter_mut().for_each(fix);
        }
        if let Some(u) = &mut self.uncertainty {
            u.inputs.iter_mut().for_each(fix);
            u.switch_port_traces.iter_mut().for_each(fix);
            u.switch_repeats.iter_mut().for_each(fix);
            if let Some(t) = &mut u.ecal_table {
                fix(t);
            }
        }
    }
}

/// Resolve the gate from a command-line preset, a config preset or a custom spec, in that order.
pub fn resolve_gate(
    cli_preset: Option<&str>,
    preset: Option<&str>,
    custom: Option<&GateSpec>,
) -> Result<Option<GateSpec>> {
    if let Some(p) = cli_preset.or(preset) {
        return GateSpec::preset(p).map(Some);
    }
    match custom {
        Some(g) => {
            g.validate().map_err(|e| Error::Config(format!("custom gate: {e}")))?;
            Ok(Some(*g))
        }
        None => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_specs() {
        let r: AxisSpec = serde_json::from_str(r#"{"start": 5, "stop": 30, "count": 26}"#).unwrap();
        let v = r.values().unwrap();
        assert_eq!(v.len(), 26);
        assert_eq!((v[0], v[25]), (5.0, 30.0));
        let l: AxisSpec = serde_json::from_str("[0.2, 0.3]").unwrap();
        assert_eq!(l.values().unwrap(), vec![0.2, 0.3]);
        let bad: AxisSpec = serde_json::from_str(r#"{"start": 5, "stop": 5, "count": 3}"#).unwrap();
        assert!(bad.values().is_err());
    }

    #[test]
    fn pair_specs() {
        assert_eq!(PairSpec::default().pairs().unwrap(), vec![HEADLINE_PAIR]);
        let all: PairSpec = serde_json::from_str(r#""all""#).unwrap();
        assert_eq!(all.pairs().unwrap().len(), 25);
        let l: PairSpec = serde_json::from_str(r#"[["Xpi2", "I"]]"#).unwrap();
        assert_eq!(l.pairs().unwrap(), vec![(GateKind::XPi2, GateKind::I)]);
        let bad: PairSpec = serde_json::from_str(r#"[["Zpi", "I"]]"#).unwrap();
        assert!(matches!(bad.pairs(), Err(Error::Config(_))));
    }

    #[test]
    fn malformed_json_reports_location() {
        let e = PipelineConfig::from_json("{\n  \"fidelity\": {,\n}").unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("line 2"), "{e}");
        let e = PipelineConfig::from_json(r#"{"fidelty": {}}"#).unwrap_err();
        assert!(e.to_string().contains("fidelty"));
    }

    #[test]
    fn gate_resolution_order() {
        let custom = GateSpec::new(1e-9, 2e-9).unwrap();
        assert_eq!(
            resolve_gate(Some("atten"), Some("connector"), Some(&custom)).unwrap(),
            Some(GateSpec::attenuator())
        );
        assert_eq!(resolve_gate(None, Some("connector"), Some(&custom)).unwrap(), Some(GateSpec::connector()));
        assert_eq!(resolve_gate(None, None, Some(&custom)).unwrap(), Some(custom));
        assert_eq!(resolve_gate(None, None, None).unwrap(), None);
        assert!(matches!(resolve_gate(Some("bogus"), None, None), Err(Error::Config(_))));
    }

    #[test]
    fn model_defaults_from_json() {
        let m: MismatchModel = serde_json::from_str(r#"{"rl1_db": 15, "rl2_db": 15, "length_m": 0.276}"#).unwrap();
        assert_eq!(m, MismatchModel::symmetric(15.0, 0.276).unwrap());
    }
}

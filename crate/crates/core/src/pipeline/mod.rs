//! Config-driven commands: calibrate, gate, extract loss, tabulate return
//! loss with error bars, sweep gate fidelity and synthesize pulses. Every
//! run writes its outputs plus a `manifest.json` listing SHA-256 digests of
//! all inputs and outputs.

pub mod config;

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::distortion::{distort, distort_fourier, impulse_response_taps};
use crate::qubitsim::{
    self, calibrate_amplitude, synth_sequence, threshold_crossings, FidelitySweepResult, GateKind, GateOp, GatePulse,
    LineCompensation, ResponseRoute,
};
use crate::solcal::{apply_correction, solve_error_model, StandardsSet};
use crate::sparam::{fmt_num, parse_trace_csv, read_touchstone, require_same_grid, write_touchstone, ComplexTrace};
use crate::timegate::{apply_gate, extract_insertion_loss};
use crate::uncertainty::{
    combine_rss, interp_ecal_sigma, s21_uncertainty, switch_repeatability, switch_variability, to_return_loss,
    ErrorBudget, UncertaintyTable, RL_CSV_HEADER,
};
use crate::{Error, Result};
pub use config::{PipelineConfig, DEFAULT_REPORT_FREQUENCIES_HZ};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Cal,
    Gate,
    ExtractLoss,
    Uncertainty,
    FidelitySweepLength,
    FidelitySweepRl,
    PulseSynth,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Cal => "cal",
            Command::Gate => "gate",
            Command::ExtractLoss => "extract-loss",
            Command::Uncertainty => "uncertainty",
            Command::FidelitySweepLength => "fidelity sweep-length",
            Command::FidelitySweepRl => "fidelity sweep-rl",
            Command::PulseSynth => "pulse synth",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub config: PathBuf,
    pub out: PathBuf,
    pub preset: Option<String>,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: FileDigest,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

/// Files written by a run, manifest last.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub outputs: Vec<PathBuf>,
    pub manifest: Manifest,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

struct Run<'a> {
    out: &'a Path,
    inputs: Vec<FileDigest>,
    outputs: Vec<(PathBuf, String)>,
}

impl<'a> Run<'a> {
    fn new(out: &'a Path) -> Self {
        Self { out, inputs: Vec::new(), outputs: Vec::new() }
    }

    fn read(&mut self, path: &Path) -> Result<String> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let digest = sha256_hex(&bytes);
        if !self.inputs.iter().any(|d| d.path == path.display().to_string()) {
            self.inputs.push(FileDigest { path: path.display().to_string(), sha256: digest });
        }
        String::from_utf8(bytes).map_err(|_| Error::invalid(format!("{} is not UTF-8 text", path.display())))
    }

    /// One-port trace from `.s1p` (or `.csv` with `freq_hz,real,imag`).
    fn trace(&mut self, path: &Path) -> Result<ComplexTrace> {
        let text = self.read(path)?;
        let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
        let parsed = if is_csv { parse_trace_csv(&text) } else { read_touchstone(path).and_then(|t| t.one_port()) };
        parsed.map_err(|e| e.context(path.display().to_string()))
    }

    fn write(&mut self, name: &str, contents: String) {
        self.outputs.push((self.out.join(name), contents));
    }

    fn finish(self, command: Command, config_path: &Path, config_text: &str) -> Result<RunReport> {
        std::fs::create_dir_all(self.out).map_err(|e| Error::io(self.out.display().to_string(), e))?;
        let mut outputs = Vec::new();
        let mut digests = Vec::new();
        for (path, contents) in &self.outputs {
            std::fs::write(path, contents).map_err(|e| Error::io(path.display().to_string(), e))?;
            digests.push(FileDigest {
                path: path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
                sha256: sha256_hex(contents.as_bytes()),
            });
            outputs.push(path.clone());
        }
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.name().to_string(),
            config: FileDigest { path: config_path.display().to_string(), sha256: sha256_hex(config_text.as_bytes()) },
            inputs: self.inputs,
            outputs: digests,
        };
        let path = self.out.join("manifest.json");
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
        std::fs::write(&path, text).map_err(|e| Error::io(path.display().to_string(), e))?;
        outputs.push(path);
        Ok(RunReport { outputs, manifest })
    }
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "trace".into())
}

fn require_files<'p>(paths: impl IntoIterator<Item = (&'p str, &'p PathBuf)>) -> Result<()> {
    for (what, p) in paths {
        if !p.is_file() {
            return Err(Error::Config(format!("{what} file not found: {}", p.display())));
        }
    }
    Ok(())
}

fn missing(section: &str) -> Error {
    Error::Config(format!("config has no `{section}` section"))
}

/// Execute one command; sweeps run on a pool of `threads` workers when set.
pub fn run(command: Command, opts: &RunOptions) -> Result<RunReport> {
    let config_text = std::fs::read_to_string(&opts.config)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", opts.config.display())))?;
    let cfg = PipelineConfig::load(&opts.config)?;
    let body = || -> Result<RunReport> {
        let mut run = Run::new(&opts.out);
        match command {
            Command::Cal => cmd_cal(&cfg, &mut run)?,
            Command::Gate => cmd_gate(&cfg, opts.preset.as_deref(), &mut run)?,
            Command::ExtractLoss => cmd_extract_loss(&cfg, opts.preset.as_deref(), &mut run)?,
            Command::Uncertainty => cmd_uncertainty(&cfg, &mut run)?,
            Command::FidelitySweepLength | Command::FidelitySweepRl => cmd_fidelity(&cfg, command, &mut run)?,
            Command::PulseSynth => cmd_pulse_synth(&cfg, &mut run)?,
        }
        run.finish(command, &opts.config, &config_text)
    };
    match opts.threads {
        Some(0) => Err(Error::Config("--threads must be ≥ 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {n} worker threads: {e}")))?
            .install(body),
        None => body(),
    }
}

fn cmd_cal(cfg: &PipelineConfig, run: &mut Run) -> Result<()> {
    let c = cfg.cal.as_ref().ok_or_else(|| missing("cal"))?;
    require_files(c.standards.named())?;
    require_files(c.duts.iter().map(|p| ("DUT", p)))?;
    let mut traces = Vec::new();
    for (name, p) in c.standards.named() {
        traces.push((name, p, run.trace(p)?));
    }
    let (_, p0, t0) = &traces[0];
    for (_, p, t) in &traces[1..] {
        require_same_grid(t0.grid(), t.grid(), &format!("{} vs {}", p0.display(), p.display()))?;
    }
    let mut it = traces.into_iter().map(|t| t.2);
    let mut next = || it.next().expect("six standards");
    let standards = StandardsSet {
        defined_short: next(),
        defined_open: next(),
        defined_load: next(),
        measured_short: next(),
        measured_open: next(),
        measured_load: next(),
    };
    let model = solve_error_model(&standards)?;
    run.write("error_model.csv", model.to_csv());
    for dut in &c.duts {
        let raw = run.trace(dut)?;
        let corrected = apply_correction(&model, &raw).map_err(|e| e.context(dut.display().to_string()))?;
        run.write(&format!("{}_corrected.s1p", stem(dut)), write_touchstone(&corrected, c.format.into())?);
    }
    Ok(())
}

fn gated_csv(trace: &ComplexTrace) -> String {
    let mut out = String::from("freq_hz,real,imag,rl_db\n");
    for (f, v) in trace.iter() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_num(f),
            fmt_num(v.re),
            fmt_num(v.im),
            fmt_num(-20.0 * v.norm().log10())
        ));
    }
    out
}

fn cmd_gate(cfg: &PipelineConfig, cli_preset: Option<&str>, run: &mut Run) -> Result<()> {
    let g = cfg.gate.as_ref().ok_or_else(|| missing("gate"))?;
    let spec = config::resolve_gate(cli_preset, g.preset.as_deref(), g.custom.as_ref())?
        .ok_or_else(|| Error::Config("gate needs --preset, `preset` or `custom`".into()))?;
    if g.inputs.is_empty() {
        return Err(Error::Config("gate has no inputs".into()));
    }
    require_files(g.inputs.iter().map(|p| ("gate input", p)))?;
    for p in &g.inputs {
        let trace = run.trace(p)?;
        let gated = apply_gate(&trace, &spec).map_err(|e| e.context(p.display().to_string()))?;
        run.write(&format!("{}_gated.s1p", stem(p)), write_touchstone(&gated, g.format.into())?);
        run.write(&format!("{}_gated_rl.csv", stem(p)), gated_csv(&gated));
    }
    Ok(())
}

fn cmd_extract_loss(cfg: &PipelineConfig, cli_preset: Option<&str>, run: &mut Run) -> Result<()> {
    let x = cfg.extract_loss.as_ref().ok_or_else(|| missing("extract_loss"))?;
    let spec = config::resolve_gate(cli_preset, x.preset.as_deref(), x.custom.as_ref())?;
    if x.inputs.is_empty() {
        return Err(Error::Config("extract_loss has no inputs".into()));
    }
    require_files(x.inputs.iter().map(|p| ("extract_loss input", p)))?;
    for p in &x.inputs {
        let trace = run.trace(p)?;
        let ctx = |e: Error| e.context(p.display().to_string());
        let gated = match &spec {
            Some(g) => apply_gate(&trace, g).map_err(ctx)?,
            None => trace,
        };
        let il = extract_insertion_loss(&gated).map_err(ctx)?;
        let mut out = String::from("freq_hz,s21_linear,loss_db,upper_db,lower_db\n");
        for (k, f) in gated.grid().points().enumerate() {
            let bars = s21_uncertainty(il.s21[k], x.sigma_ecal, x.sigma_s21_switch);
            let (up, lo) = bars.map_or((f64::NAN, f64::NAN), |b| (b.upper_db, b.lower_db));
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                fmt_num(f),
                fmt_num(il.s21[k]),
                fmt_num(il.loss_db[k]),
                fmt_num(up),
                fmt_num(lo)
            ));
        }
        run.write(&format!("{}_loss.csv", stem(p)), out);
    }
    Ok(())
}

fn cmd_uncertainty(cfg: &PipelineConfig, run: &mut Run) -> Result<()> {
    let u = cfg.uncertainty.as_ref().ok_or_else(|| missing("uncertainty"))?;
    let freqs = u.frequencies_hz.clone().unwrap_or_else(|| DEFAULT_REPORT_FREQUENCIES_HZ.to_vec());
    if freqs.is_empty() {
        return Err(Error::Config("uncertainty frequency list is empty".into()));
    }
    if u.inputs.is_empty() {
        return Err(Error::Config("uncertainty has no inputs".into()));
    }
    require_files(u.inputs.iter().map(|p| ("uncertainty input", p)))?;
    require_files(u.switch_port_traces.iter().map(|p| ("switch port trace", p)))?;
    require_files(u.switch_repeats.iter().map(|p| ("switch repeat trace", p)))?;
    if let Some(t) = &u.ecal_table {
        require_files([("ECal table", t)])?;
    }
    let table = match &u.ecal_table {
        Some(p) => {
            let text = run.read(p)?;
            Some(UncertaintyTable::from_csv(&text).map_err(|e| e.context(p.display().to_string()))?)
        }
        None => None,
    };
    let ports = u.switch_port_traces.iter().map(|p| run.trace(p)).collect::<Result<Vec<_>>>()?;
    let repeats = u.switch_repeats.iter().map(|p| run.trace(p)).collect::<Result<Vec<_>>>()?;
    let sigma_var = if ports.is_empty() { None } else { Some(switch_variability(&ports)?) };
    let sigma_rep = if repeats.is_empty() { None } else { Some(switch_repeatability(&repeats)?) };
    for p in &u.inputs {
        let dut = run.trace(p)?;
        let ctx = |e: Error| e.context(p.display().to_string());
        if let Some(t) = ports.first().or(repeats.first()) {
            require_same_grid(dut.grid(), t.grid(), "DUT vs switch traces").map_err(ctx)?;
        }
        let grid = *dut.grid();
        let mut out = String::from(RL_CSV_HEADER);
        out.push('\n');
        for &f in &freqs {
            let k = grid
                .nearest_index(f)
                .filter(|&k| (grid.point(k) - f).abs() <= 0.5 * grid.step_hz())
                .ok_or_else(|| ctx(Error::invalid(format!("report frequency {f} Hz outside the measured grid"))))?;
            let s11 = dut.values()[k].norm();
            let sigma_ecal = match &table {
                Some(t) => interp_ecal_sigma(t, 20.0 * s11.log10()).map_err(ctx)?,
                None => u.sigma_ecal.unwrap_or(0.0),
            };
            let budget = ErrorBudget {
                sigma_ecal,
                sigma_switch_var: sigma_var.as_ref().map_or(u.sigma_switch_var.unwrap_or(0.0), |v| v[k]),
                sigma_switch_rep: sigma_rep.as_ref().map_or(u.sigma_switch_rep.unwrap_or(0.0), |v| v[k]),
                sigma_load: u.sigma_load,
                s21_prefactor: u.s21_prefactor,
            };
            budget.validate().map_err(|e| Error::Config(e.to_string()))?;
            let sigma = combine_rss(&budget, u.include_rep, u.include_load);
            let rl = to_return_loss(s11, sigma).map_err(ctx)?;
            out.push_str(&rl.csv_row(grid.point(k)));
            out.push('\n');
        }
        run.write(&format!("{}_return_loss.csv", stem(p)), out);
    }
    Ok(())
}

fn duration_tag(duration_s: f64) -> String {
    let ns = duration_s * 1e9;
    let s = format!("{ns:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    format!("{}ns", s.replace('.', "p"))
}

fn cmd_fidelity(cfg: &PipelineConfig, command: Command, run: &mut Run) -> Result<()> {
    let fc = cfg.fidelity.as_ref().ok_or_else(|| missing("fidelity"))?;
    fc.model.validate().map_err(|e| Error::Config(format!("fidelity model: {e}")))?;
    fc.qubit.validate().map_err(|e| Error::Config(format!("fidelity qubit: {e}")))?;
    let pairs = fc.pairs.pairs()?;
    if fc.durations_s.is_empty() {
        return Err(Error::Config("fidelity durations list is empty".into()));
    }
    let (axis_name, axis) = match command {
        Command::FidelitySweepLength => (
            "length",
            fc.lengths_m.as_ref().ok_or_else(|| Error::Config("fidelity needs `lengths_m` for sweep-length".into()))?,
        ),
        _ => ("rl", fc.rls_db.as_ref().ok_or_else(|| Error::Config("fidelity needs `rls_db` for sweep-rl".into()))?),
    };
    let axis = axis.values()?;
    let mut summary = String::from("duration_s,pair,threshold,axis_value\n");
    for &d in &fc.durations_s {
        let result: FidelitySweepResult = match command {
            Command::FidelitySweepLength => {
                qubitsim::sweep_length(&fc.model, &axis, d, &fc.qubit, &pairs, &fc.options)?
            }
            _ => qubitsim::sweep_return_loss(&fc.model, &axis, d, &fc.qubit, &pairs, &fc.options)?,
        };
        run.write(&format!("fidelity_{axis_name}_{}.csv", duration_tag(d)), result.to_csv());
        for &pair in &pairs {
            let series = result.series(pair).expect("pair in result");
            for &th in &fc.thresholds {
                let hits = threshold_crossings(&result.axis, &series, th);
                if hits.is_empty() {
                    summary.push_str(&format!("{},{}-{},{},\n", fmt_num(d), pair.0, pair.1, fmt_num(th)));
                }
                for x in hits {
                    summary.push_str(&format!("{},{}-{},{},{}\n", fmt_num(d), pair.0, pair.1, fmt_num(th), fmt_num(x)));
                }
            }
        }
    }
    run.write(&format!("fidelity_{axis_name}_crossings.csv"), summary);
    Ok(())
}

fn cmd_pulse_synth(cfg: &PipelineConfig, run: &mut Run) -> Result<()> {
    let pc = cfg.pulse.as_ref().ok_or_else(|| missing("pulse"))?;
    let kind = GateKind::from_label(&pc.gate)?;
    pc.qubit.validate().map_err(|e| Error::Config(format!("pulse qubit: {e}")))?;
    let op = GateOp::new(kind);
    let amplitude = if kind == GateKind::I { 0.0 } else { calibrate_amplitude(&op, pc.duration_s, &pc.qubit)? };
    let ideal = synth_sequence(&[GatePulse { amplitude, phase_rad: op.phase_rad }], pc.duration_s, &pc.qubit, 0)?;
    let tag = format!("pulse_{}_{}", kind, duration_tag(pc.duration_s));
    run.write(&format!("{tag}.csv"), ideal.to_csv());
    if let Some(model) = &pc.model {
        model.validate().map_err(|e| Error::Config(format!("pulse model: {e}")))?;
        let taps = impulse_response_taps(model).relative_to_direct();
        let h = match pc.options.route {
            ResponseRoute::Taps => taps.transfer_at(pc.qubit.freq_hz()),
            ResponseRoute::Fourier => {
                model.s21_at(pc.qubit.freq_hz())
                    * num_complex::Complex64::from_polar(1.0, pc.qubit.omega_q * model.transit_s())
            }
        };
        let drive = match pc.options.compensation {
            LineCompensation::None => ideal,
            LineCompensation::CarrierTransfer => synth_sequence(
                &[GatePulse { amplitude: amplitude / h.norm(), phase_rad: op.phase_rad - h.arg() }],
                pc.duration_s,
                &pc.qubit,
                0,
            )?,
        };
        let distorted = match pc.options.route {
            ResponseRoute::Taps => distort(&drive, &taps),
            ResponseRoute::Fourier => distort_fourier(&drive, model, true)?,
        };
        run.write(&format!("{tag}_distorted.csv"), distorted.to_csv());
    }
    Ok(())
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use drivecal::pipeline::{run, Command, RunOptions};

#[derive(Parser)]
#[command(name = "drivecal", version, about = "Drive-line calibration, gating, uncertainty and gate-fidelity analysis")]
struct Cli {
    /// Worker threads for parallel sweeps.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Top,
}

#[derive(Args)]
struct Io {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GateIo {
    #[command(flatten)]
    io: Io,
    /// Gate preset: atten, connector or through-short.
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Subcommand)]
enum Top {
    /// Solve the SOL error model and correct DUT traces.
    Cal(Io),
    /// Time-gate reflection traces.
    Gate(GateIo),
    /// Insertion loss from gated shorted-line reflections.
    ExtractLoss(GateIo),
    /// Return loss with error bars at report frequencies.
    Uncertainty(Io),
    /// Gate-fidelity deviation sweeps.
    #[command(subcommand)]
    Fidelity(FidelityCmd),
    /// Drive pulse synthesis.
    #[command(subcommand)]
    Pulse(PulseCmd),
}

#[derive(Subcommand)]
enum FidelityCmd {
    SweepLength(Io),
    SweepRl(Io),
}

#[derive(Subcommand)]
enum PulseCmd {
    Synth(Io),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, io, preset) = match cli.command {
        Top::Cal(io) => (Command::Cal, io, None),
        Top::Gate(g) => (Command::Gate, g.io, g.preset),
        Top::ExtractLoss(g) => (Command::ExtractLoss, g.io, g.preset),
        Top::Uncertainty(io) => (Command::Uncertainty, io, None),
        Top::Fidelity(FidelityCmd::SweepLength(io)) => (Command::FidelitySweepLength, io, None),
        Top::Fidelity(FidelityCmd::SweepRl(io)) => (Command::FidelitySweepRl, io, None),
        Top::Pulse(PulseCmd::Synth(io)) => (Command::PulseSynth, io, None),
    };
    let opts = RunOptions { config: io.config, out: io.out, preset, threads: cli.threads };
    match run(command, &opts) {
        Ok(report) => {
            for p in &report.outputs {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

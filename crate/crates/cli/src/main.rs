//! `musca`: run random-access experiments and emit CSV.
//!
//! Exit status: 0 on success, 1 on a runtime failure, 2 on a configuration
//! or usage error.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::Failure;
use config::{Defaults, ExperimentConfig, Overrides};

#[derive(Parser)]
#[command(name = "musca", version, about = "Slotted random-access simulator with successive interference cancellation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate PLR and throughput at one load and SNR.
    Simulate(RunArgs),
    /// Throughput over a grid of loads.
    SweepLoad(RunArgs),
    /// Throughput over a grid of SNRs and loads.
    SweepSnr(RunArgs),
    /// Rank degree distributions by peak throughput.
    Optimize(OptimizeArgs),
    /// Decode the four-user, three-slot example and print its trace.
    Example(ExampleArgs),
    /// Write the anchor-extended PER table as CSV.
    GenPerTable(OutArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Frames per load point.
    #[arg(long)]
    trials: Option<u64>,
    /// Slots per frame.
    #[arg(long)]
    slots: Option<usize>,
    /// PER table file or builtin:{anchors,extended,collision,ideal}; repeat to merge.
    #[arg(long = "per-table")]
    per_table: Vec<String>,
    /// Write CSV here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// SNR in dB: a value, "a,b,c" or "start:stop:step".
    #[arg(long, allow_hyphen_values = true)]
    snr: Option<String>,
    /// Normalized load: a value, "a,b,c" or "start:stop:step".
    #[arg(long)]
    g: Option<String>,
    /// Degree distribution, e.g. "1:0.1,2:0.3,3:0.6".
    #[arg(long)]
    dist: Option<String>,
    /// musca, crdsa, irsa or sa.
    #[arg(long)]
    mode: Option<String>,
}

#[derive(Args)]
struct OptimizeArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Degrees to search over, e.g. "1,2,3".
    #[arg(long)]
    degrees: Option<String>,
    /// Probability grid step.
    #[arg(long)]
    step: Option<f64>,
}

#[derive(Args)]
struct ExampleArgs {
    /// Seed for the run with random decoding outcomes.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OutArgs {
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn overrides(self) -> Overrides {
        Overrides {
            config: self.config,
            seed: self.seed,
            trials: self.trials,
            slots: self.slots,
            mode: self.mode,
            dist: self.dist,
            snr: self.snr,
            g: self.g,
            per_tables: self.per_table,
            out: self.out,
            degrees: None,
            step: None,
        }
    }
}

const SIMULATE: Defaults = Defaults {
    trials: 10_000,
    snr: "8",
    g: "1",
};
const SWEEP_LOAD: Defaults = Defaults {
    trials: 10_000,
    snr: "8",
    g: "0.1:2.0:0.1",
};
const SWEEP_SNR: Defaults = Defaults {
    trials: 2_000,
    snr: "0:10:1",
    g: "0.5:1.8:0.05",
};
const OPTIMIZE: Defaults = Defaults {
    trials: 1_000,
    snr: "8",
    g: "0.5:1.8:0.05",
};

fn run(cli: Cli) -> Result<bool, Failure> {
    match cli.command {
        Command::Simulate(a) => {
            commands::simulate(&ExperimentConfig::resolve(&a.overrides(), &SIMULATE)?)?
        }
        Command::SweepLoad(a) => {
            commands::sweep_load_cmd(&ExperimentConfig::resolve(&a.overrides(), &SWEEP_LOAD)?)?
        }
        Command::SweepSnr(a) => {
            commands::sweep_snr_cmd(&ExperimentConfig::resolve(&a.overrides(), &SWEEP_SNR)?)?
        }
        Command::Optimize(a) => {
            let mut o = a.run.overrides();
            o.degrees = a.degrees;
            o.step = a.step;
            commands::optimize_cmd(&ExperimentConfig::resolve(&o, &OPTIMIZE)?)?
        }
        Command::Example(a) => return commands::example(a.seed, a.out.as_deref()),
        Command::GenPerTable(a) => commands::gen_per_table(a.out.as_deref())?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Config(e)) => {
            eprintln!("musca: configuration error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("musca: {e:#}");
            ExitCode::from(1)
        }
    }
}

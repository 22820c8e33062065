//! Command-line front end for the PMP Monte-Carlo experiments.

use clap::{Parser, Subcommand};
use pmp_core::experiment::{
    antenna_sweep, par_ccdf, ser_sweep, solve, tradeoff, with_threads, CommandOutput, ExperimentConfig,
    SolveInstance,
};
use pmp_core::Error;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const DEFAULT_OUT: &str = "results";

#[derive(Debug, Parser)]
#[command(name = "pmp", version, about = "PAR-aware massive MU-MIMO-OFDM precoding experiments")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// JSON experiment config (or solve instance); defaults apply without it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory, overriding the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for frame-level parallelism.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Write solver diagnostics next to the results.
    #[arg(long, global = true)]
    trace: bool,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Cmd {
    /// PAR CCDF and PAR* per precoder.
    ParCcdf,
    /// SER versus SNR and the 1% SER operating points.
    SerSweep,
    /// PMP over a lambda grid and LS+clip over target PARs.
    Tradeoff,
    /// PAR* versus the number of antennas for several tap counts.
    AntennaSweep,
    /// One PMP solve on a serialized instance.
    Solve,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            report("usage", "", e.render().to_string().trim());
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let kind = e.kind();
            let field = match &e {
                Error::Config { field, .. } => field.clone(),
                _ => String::new(),
            };
            report(kind, &field, &e.to_string());
            ExitCode::FAILURE
        }
    }
}

/// One JSON object on stderr.
fn report(kind: &str, field: &str, message: &str) {
    let mut line = serde_json::json!({"error": kind, "message": message});
    if !field.is_empty() {
        line["field"] = field.into();
    }
    eprintln!("{line}");
}

fn run(cli: &Cli) -> pmp_core::Result<Vec<PathBuf>> {
    if let Cmd::Solve = cli.command {
        let mut instance = match &cli.config {
            Some(path) => SolveInstance::from_json(&std::fs::read_to_string(path)?)?,
            None => SolveInstance::from_json("{}")?,
        };
        if let Some(seed) = cli.seed {
            instance.seed = seed;
        }
        let out = solve(&instance, cli.trace)?.output()?;
        return out.write(cli.out.as_deref().unwrap_or(Path::new(DEFAULT_OUT)));
    }

    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let dir = cli
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let trace = cli.trace;
    let output: CommandOutput = with_threads(cli.threads, || match cli.command {
        Cmd::ParCcdf => par_ccdf(&cfg, trace)?.output(),
        Cmd::SerSweep => ser_sweep(&cfg, trace)?.output(),
        Cmd::Tradeoff => tradeoff(&cfg, trace)?.output(),
        Cmd::AntennaSweep => antenna_sweep(&cfg, trace)?.output(),
        Cmd::Solve => unreachable!("handled above"),
    })?;
    output.write(&dir)
}

//! Seeded Monte-Carlo experiments: declarative configuration, a
//! frame-parallel runner and the commands behind the command-line tool.
//!
//! Every frame draws its channel from `derive(seed, [0, cell, frame])`, its
//! payloads from `derive(seed, [1, cell, frame])` and the noise of SNR point
//! `i` from `derive(seed, [2, cell, frame, i])`. Precoders share all three.

mod commands;
mod config;
mod output;
mod runner;

pub use commands::{
    antenna_sweep, par_ccdf, ser_sweep, solve, tradeoff, with_threads, AntennaCell, AntennaSweepReport, ParCcdfReport,
    SerSweepReport, SeriesReport, SolveInstance, SolveReport, TradeoffReport, SER_TARGET,
};
pub use config::{
    default_clip_targets, default_lambdas, Command, ExperimentConfig, TonePlanChoice, TonePreset, DEFAULT_CCDF_FRAMES,
    DEFAULT_ITERATIONS, DEFAULT_LAMBDA, DEFAULT_MAX_BLOCK_ERRORS, DEFAULT_SER_FRAMES,
};
pub use output::{to_csv, CommandOutput, Row};
pub use runner::{
    run_jobs, CheckpointStats, FrameDiagnostics, Job, JobStats, RunSpec, Scenario, STREAM_CHANNEL, STREAM_NOISE,
    STREAM_PAYLOAD,
};

//! Command-line front end for the `msdhmm` gesture recognizer.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error,
//! 3 internal invariant violation.

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub mod bench;
pub mod config;
pub mod data;
pub mod eval;
pub mod export;
pub mod online;
pub mod train;

/// A bad flag, config key or argument value.
#[derive(Debug, Clone)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "msdhmm",
    version,
    about = "Double-stage multiple-stream HMM gesture recognition"
)]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a model on a dataset directory.
    Train(train::TrainArgs),
    /// Train and test over a dataset split.
    EvalOffline(eval::EvalArgs),
    /// Segment a merged stream and score it against ground truth.
    EvalOnline(online::OnlineArgs),
    /// Time classification and online segmentation.
    Bench(bench::BenchArgs),
    /// Merge dataset instances into one stream plus a ground-truth sidecar.
    ExportStream(export::ExportArgs),
    /// Write a synthetic dataset in the skeleton file layout.
    Synth(export::SynthArgs),
}

/// Maps an error to its exit code by the first recognised cause.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return EXIT_USAGE;
        }
        if let Some(e) = cause.downcast_ref::<msdhmm::Error>() {
            return match e {
                msdhmm::Error::Model(_) | msdhmm::Error::SymbolRange { .. } => EXIT_INTERNAL,
                _ => EXIT_DATA,
            };
        }
        if cause.is::<std::io::Error>() {
            return EXIT_DATA;
        }
    }
    EXIT_INTERNAL
}

pub fn execute(cli: &Cli) -> anyhow::Result<String> {
    let settings = match &cli.config {
        Some(path) => config::Config::load(path)?.resolve()?,
        None => config::Settings::default(),
    };
    match &cli.command {
        Command::Train(a) => train::run(a, settings),
        Command::EvalOffline(a) => eval::run(a, settings),
        Command::EvalOnline(a) => online::run(a, settings),
        Command::Bench(a) => bench::run(a),
        Command::ExportStream(a) => export::run_export(a, settings),
        Command::Synth(a) => export::run_synth(a),
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(text) => {
            print!("{text}");
            0
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}

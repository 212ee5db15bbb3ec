//! Command-line front end: argument parsing, run configuration and the
//! exit-code contract (0 ok, 1 numerical or internal failure, 2 bad input).

mod commands;
mod config;
mod error;
mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::commands::Run;
use crate::config::RunConfig;
use crate::error::{input, CliError, CliResult, EXIT_INPUT};

#[derive(Debug, Parser)]
#[command(name = "tohm", version, about = "Euler-characteristic global p-values for random-field searches")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Worker threads; defaults to the number of cores. Results do not
    /// depend on it.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Output file; overrides the config.
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Euler characteristic and hypercube counts of a field's excursion set.
    Ec {
        field: Option<PathBuf>,
        #[arg(allow_negative_numbers = true)]
        threshold: Option<f64>,
    },
    /// Estimates LKCs from simulated fields and writes an LKC record.
    Calibrate,
    /// Global p-value and significance of a statistic from an LKC record.
    Pvalue {
        lkc: Option<PathBuf>,
        #[arg(allow_negative_numbers = true)]
        c: Option<f64>,
    },
    /// Compares the EC approximation with the empirical tail of the maximum.
    Validate,
    /// Profile-likelihood bump hunt over a planar search region.
    Bumphunt { events: Option<PathBuf> },
    /// Writes one simulated field replicate.
    SimulateField {
        #[arg(long)]
        replicate: Option<usize>,
    },
}

fn execute(cli: Cli) -> CliResult<String> {
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let threads = cli.threads.or(cfg.threads);
    if threads == Some(0) {
        return Err(input("threads must be at least 1"));
    }
    let run = Run { seed: cli.seed.or(cfg.seed).unwrap_or(0), output: cli.output.or_else(|| cfg.output.clone()), cfg };

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Failure(format!("thread pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Ec { field, threshold } => commands::ec(&run, field, threshold),
        Command::Calibrate => commands::calibrate(&run),
        Command::Pvalue { lkc, c } => commands::pvalue(&run, lkc, c),
        Command::Validate => commands::validate(&run),
        Command::Bumphunt { events } => commands::bumphunt(&run, events),
        Command::SimulateField { replicate } => commands::simulate_field(&run, replicate),
    })
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit status. Command output goes to `stdout`; diagnostics go to
/// stderr.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli).and_then(|text| stdout.write_all(text.as_bytes()).and_then(|()| stdout.flush()).map_err(|e| CliError::Failure(format!("writing output: {e}")))) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("tohm: {e}");
            e.exit_code()
        }
    }
}

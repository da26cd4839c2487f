use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use super::config::ExperimentConfig;
use super::output::{table, TableKind};
use super::run::{oracle_agreement, run_experiment};
use crate::error::Error;

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "ROBUST_STOPPING_WORKERS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAP: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "robust-stopping", version, about = "Robust optimal stopping with random maturity on path trees")]
struct Cli {
    /// Worker threads (default: $ROBUST_STOPPING_WORKERS, else all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run an experiment and write its results directory.
    Run {
        config: PathBuf,
        /// Overrides the output directory of the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a CSV table from a results directory.
    Table { dir: PathBuf, which: TableKind },
    /// Cross-check the envelope against brute-force enumeration.
    Oracle { config: PathBuf },
}

/// Exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::CapExceeded { .. } => EXIT_CAP,
        Error::Io { .. } => EXIT_IO,
        Error::Config(_) | Error::BadSpec(_) | Error::BadControl(_) | Error::Json(_) | Error::BadDelta(_) | Error::BadWindow(_) => {
            EXIT_USAGE
        }
        Error::HypothesisFailed { .. } | Error::OptimalityGap { .. } => EXIT_CHECK_FAILED,
    }
}

fn configure_workers(flag: Option<usize>) -> Result<(), Error> {
    let from_env = match std::env::var(WORKERS_ENV) {
        Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| Error::Config(format!("{WORKERS_ENV} must be a positive integer, got `{v}`")))?),
        Err(_) => None,
    };
    if let Some(n) = flag.or(from_env) {
        if n == 0 {
            return Err(Error::Config("worker count must be ≥ 1".into()));
        }
        // A pool may already exist when called twice in one process; the first one wins.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<i32, Error> {
    configure_workers(cli.workers)?;
    match cli.command {
        Command::Run { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let out_dir = out.unwrap_or_else(|| cfg.output_dir.clone());
            let summary = run_experiment(&cfg, &out_dir)?;
            for c in &summary.checks {
                let tag = if c.pass { "pass" } else if c.fails_run() { "FAIL" } else { "note" };
                println!("{tag:>4}  {}  {}", c.name, c.detail);
            }
            println!("value {}", summary.value);
            println!("results in {}", out_dir.display());
            Ok(if summary.all_pass() { EXIT_OK } else { EXIT_CHECK_FAILED })
        }
        Command::Table { dir, which } => {
            print!("{}", table(&dir, which)?);
            Ok(EXIT_OK)
        }
        Command::Oracle { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let prepared = cfg.prepare()?;
            let a = oracle_agreement(&prepared, cfg.caps.oracle_set)?;
            println!("{}", serde_json::to_string(&a)?);
            Ok(if a.pass { EXIT_OK } else { EXIT_CHECK_FAILED })
        }
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

//! Experiment configuration, orchestration and result files, plus the command line.

mod cli;
mod config;
mod output;
mod run;

pub use cli::{exit_code, main_with_args, EXIT_CAP, EXIT_CHECK_FAILED, EXIT_IO, EXIT_OK, EXIT_USAGE, WORKERS_ENV};
pub use config::{CapsConfig, CascadeSizes, ChecksConfig, ControlsConfig, ExperimentConfig, GridConfig, Prepared, RhoHatMode};
pub use output::{
    table, write_all, TableKind, BOUNDARY_FILE, ENVELOPE_FILE, GAMMA_FILE, LEDGER_FILE, POLICY_FILE, REPORT_FILE,
    VALUES_FILE,
};
pub use run::{oracle_agreement, run_experiment, CheckKind, CheckOutcome, RunSummary};

// Runs a bundled experiment configuration end to end and prints the report.
//
// Pass a config path to run another one; results go to a temporary directory.

use std::path::PathBuf;

use robust_stopping::error::Result;
use robust_stopping::expcli::{run_experiment, table, ExperimentConfig, TableKind, REPORT_FILE};

fn bundled() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/configs/oracle_tiny.json")
}

fn run_example() -> Result<bool> {
    run_config(&bundled())
}

fn run_config(path: &std::path::Path) -> Result<bool> {
    let config = ExperimentConfig::load(path)?;
    let out = std::env::temp_dir().join(format!("robust-stopping-{}-{}", config.name, std::process::id()));
    let summary = run_experiment(&config, &out)?;
    println!("{}", std::fs::read_to_string(out.join(REPORT_FILE)).unwrap_or_default());
    print!("{}", table(&out, TableKind::Convergence)?);
    let _ = std::fs::remove_dir_all(&out);
    Ok(summary.all_pass())
}

fn main() -> Result<()> {
    match std::env::args().nth(1) {
        Some(path) => run_config(std::path::Path::new(&path)).map(|_| ()),
        None => run_example().map(|_| ()),
    }
}

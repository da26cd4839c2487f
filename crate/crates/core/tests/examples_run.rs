//! Runs every cargo example through its `run_example` entry point.

macro_rules! example {
    ($name:ident, $file:literal) => {
        #[allow(dead_code)]
        mod $name {
            include!($file);

            pub fn run() -> robust_stopping::error::Result<()> {
                run_example().map(|_| ())
            }
        }
    };
}

example!(tree_expectation, "../examples/tree_expectation.rs");
example!(snell_envelope, "../examples/snell_envelope.rs");
example!(stopping_times, "../examples/stopping_times.rs");
example!(approximating_sequence, "../examples/approximating_sequence.rs");
example!(cascade_ledger, "../examples/cascade_ledger.rs");
example!(robust_solution, "../examples/robust_solution.rs");
example!(oracle_check, "../examples/oracle_check.rs");
example!(modulus_companion, "../examples/modulus_companion.rs");
example!(run_config, "../examples/run_config.rs");

#[test]
fn tree_expectation_runs() {
    tree_expectation::run().unwrap();
}

#[test]
fn snell_envelope_runs() {
    snell_envelope::run().unwrap();
}

#[test]
fn stopping_times_runs() {
    stopping_times::run().unwrap();
}

#[test]
fn approximating_sequence_runs() {
    approximating_sequence::run().unwrap();
}

#[test]
fn cascade_ledger_runs() {
    cascade_ledger::run().unwrap();
}

#[test]
fn robust_solution_runs() {
    robust_solution::run().unwrap();
}

#[test]
fn oracle_check_runs() {
    oracle_check::run().unwrap();
}

#[test]
fn modulus_companion_runs() {
    modulus_companion::run().unwrap();
}

#[test]
fn run_config_runs() {
    run_config::run().unwrap();
}

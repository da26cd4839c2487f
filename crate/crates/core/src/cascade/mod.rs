//! Double approximation of the robust value with random maturity.
//!
//! The maturity `τ₀` is approached from below by Lipschitz times `℘ₙ`, and the
//! jump from `L` to `U` at `℘ₙ` is smoothed over a window of length `2^{1−k}`.
//! Each `Z^{n,k}` is a Snell envelope of a uniformly continuous payoff; the
//! ledger records how far the computed fields are from the stated error bounds.

mod build;
mod ledger;
mod solve;

pub use build::{build_cascade, CascadeConfig, CascadeDiagnostics, CascadeResult, CellSummary};
pub use ledger::{tail_sums, ErrorLedgerEntry, LedgerStatus, TailSum, LEDGER_TOL};
pub use solve::{solve_robust_stopping, RobustSolution, ValueCertificate};

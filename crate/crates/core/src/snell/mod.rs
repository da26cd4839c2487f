//! Snell envelope under the worst-case expectation and the checks that
//! characterize it.

mod checks;
mod envelope;
mod optimal;

pub use checks::{
    continuity_estimate_check, dpp_check, martingale_check, policy_supermartingale_check, standard_family,
    truncated_value, ContinuityEstimateReport, MartingaleEntry, MartingaleReport, NodeCheck, CHECK_TOL,
};
pub use envelope::{snell_envelope, EnvelopeExport, EnvelopeField};
pub use optimal::{argmax_policy, optimal_pair, pair_certificate, OptimalPair, PairCertificate, OPTIMALITY_TOL};

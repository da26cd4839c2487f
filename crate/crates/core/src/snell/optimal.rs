use serde::{Deserialize, Serialize};

use super::EnvelopeField;
use crate::error::{Error, Result};
use crate::lattice::{one_step_argmax, ControlPolicy, TreeModel};
use crate::stoptimes::{approach_time, Compose, StoppingTime};

/// Gap used to detect the meeting of envelope and payoff, and the tolerance of value certificates.
pub const OPTIMALITY_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct OptimalPair {
    pub stop: StoppingTime,
    pub policy: ControlPolicy,
    /// `E_P[Ŷ]` at the stopping time under the extracted policy.
    pub value: f64,
}

/// Control attaining the one-step worst case of `values` at every non-terminal node (lowest index on ties).
pub fn argmax_policy(tree: &TreeModel, values: &[f64]) -> ControlPolicy {
    let first_leaf = tree.level(tree.depth()).start;
    let mut choice = vec![0; tree.num_nodes()];
    for (node, c) in choice.iter_mut().enumerate().take(first_leaf) {
        *c = one_step_argmax(tree, node, values).1;
    }
    ControlPolicy::from_choices(choice)
}

/// First meeting of envelope and payoff, with the policy that attains the
/// envelope's one-step recursion; fails if they do not reproduce the root value.
pub fn optimal_pair(tree: &TreeModel, env: &EnvelopeField) -> Result<OptimalPair> {
    let stop = approach_time(tree, &env.values, &env.payoff, OPTIMALITY_TOL);
    let policy = argmax_policy(tree, &env.values);
    let value = policy.stopped_expectation(tree, |v| stop.stops_at(tree, v), &env.payoff);
    let gap = (env.root() - value).abs();
    if gap > OPTIMALITY_TOL {
        return Err(Error::OptimalityGap { envelope: env.root(), policy: value, gap });
    }
    Ok(OptimalPair { stop, policy, value })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairCertificate {
    /// Largest `|Z₀ − E_P[Z_{ν∧ζ}]|` over the family.
    pub max_gap: f64,
    pub worst: Option<String>,
    pub pass: bool,
}

/// Checks `Z₀ = E_P[Z_{ν∧ζ}]` for every `ζ` in `family`.
pub fn pair_certificate(
    tree: &TreeModel,
    env: &EnvelopeField,
    pair: &OptimalPair,
    family: &[(String, StoppingTime)],
) -> PairCertificate {
    let mut max_gap: f64 = 0.0;
    let mut worst = None;
    for (label, zeta) in family {
        let rho = pair.stop.compose(tree, zeta, Compose::Min);
        let v = pair.policy.stopped_expectation(tree, |n| rho.stops_at(tree, n), &env.values);
        let gap = (env.root() - v).abs();
        if gap > max_gap {
            max_gap = gap;
            worst = Some(label.clone());
        }
    }
    PairCertificate { max_gap, worst, pass: max_gap <= OPTIMALITY_TOL }
}

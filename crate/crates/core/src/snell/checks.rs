use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::EnvelopeField;
use crate::lattice::{backward_induction, conditional_sup, tree_dist, ControlPolicy, ModulusHat, TreeModel};
use crate::processes::path_modulus_values;
use crate::stoptimes::{Compose, StoppingTime};

/// Tolerance of the exact fixpoint checks.
pub const CHECK_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeCheck {
    pub max_error: f64,
    pub worst_node: Option<usize>,
    pub pass: bool,
}

impl NodeCheck {
    fn from_errors(errors: impl Iterator<Item = (usize, f64)>, tol: f64) -> Self {
        let mut worst = None;
        let mut max_error: f64 = 0.0;
        for (node, e) in errors {
            if e > max_error {
                max_error = e;
                worst = Some(node);
            }
        }
        Self { max_error, worst_node: worst, pass: max_error <= tol }
    }
}

/// Value of stopping `Ŷ` strictly before `ν`, collecting `Z` at `ν`.
pub fn truncated_value(tree: &TreeModel, env: &EnvelopeField, nu: &StoppingTime) -> Vec<f64> {
    backward_induction(tree, |node, cont| {
        if nu.stopped_by(node) {
            env.values[node]
        } else {
            env.payoff[node].max(cont())
        }
    })
}

/// Dynamic programming principle: the value of stopping before `ν` with
/// reward `Z` at `ν` reproduces `Z` at every node.
///
/// At nodes where `ν` has already occurred the stopping time is read as `ν ∨ t`,
/// so the right-hand side is `Z` itself.
pub fn dpp_check(tree: &TreeModel, env: &EnvelopeField, nu: &StoppingTime) -> NodeCheck {
    let rhs = truncated_value(tree, env, nu);
    NodeCheck::from_errors((0..tree.num_nodes()).map(|v| (v, (rhs[v] - env.values[v]).abs())), CHECK_TOL)
}

/// Per stopping time outcome of [`martingale_check`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MartingaleEntry {
    pub label: String,
    /// Largest `𝔈̄_t[Z_ζ] − Z_{ζ∧t}`.
    pub super_violation: f64,
    /// Largest `Z_{ν∧ζ∧t} − 𝔈̄_t[Z_{ν∧ζ}]`, when `ν` is given.
    pub sub_violation: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MartingaleReport {
    pub entries: Vec<MartingaleEntry>,
    pub pass: bool,
}

/// `Z` frozen at `ζ`: `Z_{ζ∧t}` at every node.
fn frozen_at(tree: &TreeModel, z: &[f64], zeta: &StoppingTime) -> Vec<f64> {
    (0..tree.num_nodes()).map(|v| z[zeta.stop_ancestor(tree, v).unwrap_or(v)]).collect()
}

/// Largest excess of `sign·(Z_{ζ∧t} − 𝔈̄_t[Z_ζ])` below zero, over all nodes.
fn excess(tree: &TreeModel, z: &[f64], zeta: &StoppingTime, super_side: bool) -> f64 {
    let stopped = frozen_at(tree, z, zeta);
    let cond = conditional_sup(tree, |v| zeta.stopped_by(v).then(|| stopped[v]));
    (0..tree.num_nodes())
        .map(|v| if super_side { cond[v] - stopped[v] } else { stopped[v] - cond[v] })
        .fold(0.0, f64::max)
}

/// Supermartingale inequality for every `ζ` in `family`, and the
/// submartingale inequality up to `nu` when given.
pub fn martingale_check(
    tree: &TreeModel,
    env: &EnvelopeField,
    nu: Option<&StoppingTime>,
    family: &[(String, StoppingTime)],
) -> MartingaleReport {
    let entries: Vec<MartingaleEntry> = family
        .par_iter()
        .map(|(label, zeta)| {
            let super_violation = excess(tree, &env.values, zeta, true);
            let sub_violation = nu.map(|nu| excess(tree, &env.values, &nu.compose(tree, zeta, Compose::Min), false));
            let pass = super_violation <= CHECK_TOL && sub_violation.is_none_or(|s| s <= CHECK_TOL);
            MartingaleEntry { label: label.clone(), super_violation, sub_violation, pass }
        })
        .collect();
    let pass = entries.iter().all(|e| e.pass);
    MartingaleReport { entries, pass }
}

/// Deterministic times, the given extra times and `random` seeded node rules.
pub fn standard_family(
    tree: &TreeModel,
    extra: &[(String, StoppingTime)],
    random: usize,
    seed: u64,
) -> Vec<(String, StoppingTime)> {
    let mut family: Vec<(String, StoppingTime)> =
        (0..=tree.depth()).map(|m| (format!("t{m}"), StoppingTime::deterministic(tree, m))).collect();
    family.extend(extra.iter().cloned());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..random {
        let decide: Vec<bool> = (0..tree.num_nodes()).map(|_| rng.gen_bool(0.3)).collect();
        family.push((format!("random{i}"), StoppingTime::from_decisions(tree, |v| decide[v])));
    }
    family
}

/// Largest `E_P[Z_γ] − E_P[Z_τ]` over ordered pairs `τ ≤ γ` of the family, under a fixed policy.
pub fn policy_supermartingale_check(
    tree: &TreeModel,
    env: &EnvelopeField,
    policy: &ControlPolicy,
    family: &[(String, StoppingTime)],
) -> f64 {
    let values: Vec<f64> =
        family.iter().map(|(_, s)| policy.stopped_expectation(tree, |v| s.stops_at(tree, v), &env.values)).collect();
    let mut worst: f64 = 0.0;
    for (i, (_, a)) in family.iter().enumerate() {
        for (j, (_, b)) in family.iter().enumerate() {
            if i != j && a.le(b) {
                worst = worst.max(values[j] - values[i]);
            }
        }
    }
    worst
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuityEstimateReport {
    pub pairs_checked: usize,
    pub max_violation: f64,
    pub worst_pair: Option<(usize, usize)>,
    pub pass: bool,
}

/// Checks `|Z_t(ω) − Z_t(ω′)| ≤ 2ρ̂((1+κ)d + φ^ω_t(κd) + dt)` with `d = ‖ω − ω′‖_{0,t}`
/// over ordered pairs of distinct nodes at a common time, up to `max_pairs` pairs.
pub fn continuity_estimate_check(
    tree: &TreeModel,
    env: &EnvelopeField,
    rho_hat: &ModulusHat,
    kappa: f64,
    max_pairs: usize,
) -> ContinuityEstimateReport {
    let g = tree.grid();
    let dt = g.dt();
    let mut pairs = Vec::new();
    'outer: for m in 0..=tree.depth() {
        for u in tree.level(m) {
            for v in tree.level(m) {
                if u != v {
                    if pairs.len() >= max_pairs {
                        break 'outer;
                    }
                    pairs.push((u, v));
                }
            }
        }
    }
    let worst = pairs
        .par_iter()
        .map(|&(u, v)| {
            let s = tree.step(u);
            let hu = tree.history(u);
            let hv = tree.history(v);
            let d = (0..=s).map(|r| tree_dist(tree.pos(hu[r]), tree.pos(hv[r]))).fold(0.0, f64::max);
            let vals: Vec<&[f64]> = hu.iter().map(|&n| tree.pos(n)).collect();
            let phi = path_modulus_values(&vals, dt, s, kappa * d);
            let bound = 2.0 * rho_hat.eval((1.0 + kappa) * d + phi + dt);
            ((env.values[u] - env.values[v]).abs() - bound, Some((u, v)))
        })
        .reduce(|| (f64::NEG_INFINITY, None), |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a });
    let max_violation = worst.0.max(0.0);
    ContinuityEstimateReport {
        pairs_checked: pairs.len(),
        max_violation,
        worst_pair: worst.1.filter(|_| worst.0 > 0.0),
        pass: max_violation <= 1e-12,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{ControlSet, Modulus, TimeGrid};
    use crate::snell::snell_envelope;
    use crate::stoptimes::approach_time;
    use std::sync::Arc;

    fn tree(n: usize) -> TreeModel {
        TreeModel::build(TimeGrid::new(1.0, n).unwrap(), ControlSet::scalar(&[(0.0, 1.0), (0.4, 0.6)], 1.0).unwrap())
            .unwrap()
    }

    fn payoff(t: &TreeModel) -> Vec<f64> {
        (0..t.num_nodes()).map(|v| (t.pos(v)[0] - 0.2).abs().min(1.0) - 0.1 * t.step(v) as f64).collect()
    }

    #[test]
    fn dpp_holds_for_several_times() {
        let t = tree(3);
        let z = snell_envelope(&t, &payoff(&t));
        for m in 0..=3 {
            assert!(dpp_check(&t, &z, &StoppingTime::deterministic(&t, m)).pass);
        }
        let nu = approach_time(&t, &z.values, &z.payoff, 0.5);
        assert!(dpp_check(&t, &z, &nu).pass);
    }

    #[test]
    fn martingale_properties() {
        let t = tree(3);
        let z = snell_envelope(&t, &payoff(&t));
        let fam = standard_family(&t, &[], 5, 7);
        assert_eq!(fam.len(), 4 + 5);
        for n in [1.0, 2.0, 4.0, 8.0] {
            let nu = approach_time(&t, &z.values, &z.payoff, 1.0 / n);
            assert!(martingale_check(&t, &z, Some(&nu), &fam).pass);
        }
        // Beyond the approach time the submartingale side can fail.
        let late = StoppingTime::deterministic(&t, 3);
        let r = martingale_check(&t, &z, Some(&late), &fam);
        assert!(r.entries.iter().all(|e| e.super_violation <= CHECK_TOL));
    }

    #[test]
    fn fixed_policy_supermartingale() {
        let t = tree(3);
        let z = snell_envelope(&t, &payoff(&t));
        let fam = standard_family(&t, &[], 6, 3);
        for c in 0..2 {
            assert!(policy_supermartingale_check(&t, &z, &ControlPolicy::constant(&t, c), &fam) <= CHECK_TOL);
        }
    }

    #[test]
    fn continuity_estimate_with_exact_companion() {
        let t = Arc::new(tree(2));
        let base = Modulus::lipschitz(1.0);
        let y: Vec<f64> = (0..t.num_nodes()).map(|v| t.pos(v)[0].abs().min(1.0)).collect();
        let z = snell_envelope(&t, &y);
        let hat = ModulusHat::exact(t.clone(), base).unwrap();
        assert!(continuity_estimate_check(&t, &z, &hat, 0.0, 10_000).pass);
        let constant = snell_envelope(&t, &vec![1.0; t.num_nodes()]);
        assert_eq!(continuity_estimate_check(&t, &constant, &hat, 0.0, 10_000).max_violation, 0.0);
    }
}

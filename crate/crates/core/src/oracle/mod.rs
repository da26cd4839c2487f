//! Brute-force ground truth on small trees.
//!
//! The functions here never use the backward maximum of the lattice module.
//! They enumerate the set of expected rewards of all strategies and take the
//! maximum of that set at the end.

mod enumeration;
mod sets;

use rayon::prelude::*;
use serde::Serialize;

pub use enumeration::{PolicyEnumeration, DEFAULT_ENUMERATION_CAP};
pub use sets::DEFAULT_SET_CAP;

use crate::error::{Error, Result};
use crate::lattice::{ControlPolicy, Modulus, TreeModel};
use crate::stoptimes::StoppingTime;

/// Optimal value found by enumeration, with one strategy attaining it.
#[derive(Clone, Debug)]
pub struct BruteForce {
    pub value: f64,
    pub stop: StoppingTime,
    pub policy: ControlPolicy,
    /// Number of distinct strategy values at the root.
    pub distinct_values: usize,
}

/// Summary of an oracle cross-check, as printed by the command line.
#[derive(Clone, Debug, Serialize)]
pub struct OracleAgreement {
    pub envelope: f64,
    pub oracle: f64,
    pub abs_diff: f64,
    pub pass: bool,
}

fn reconstruct(tree: &TreeModel, payoff: &[f64], best: &[f64], allowed: &dyn Fn(usize) -> Vec<usize>) -> (StoppingTime, ControlPolicy) {
    let first_leaf = tree.level(tree.depth()).start;
    let mut choice = vec![0; tree.num_nodes()];
    let mut stop = vec![false; tree.num_nodes()];
    for node in 0..first_leaf {
        let mut cont = f64::NEG_INFINITY;
        for c in allowed(node) {
            let (u, d) = tree.branch_pair(node, c);
            let x = 0.5 * (best[u] + best[d]);
            if x > cont {
                cont = x;
                choice[node] = c;
            }
        }
        stop[node] = payoff[node] >= cont;
    }
    (StoppingTime::from_decisions(tree, |v| stop[v]), ControlPolicy::from_choices(choice))
}

fn solve(tree: &TreeModel, payoff: &[f64], cap: usize, allowed: &(dyn Fn(usize) -> Vec<usize> + Sync)) -> Result<BruteForce> {
    if payoff.len() != tree.num_nodes() {
        return Err(Error::BadSpec("one payoff value per node is required".into()));
    }
    let mut best = vec![f64::NEG_INFINITY; tree.num_nodes()];
    let mut count = 0u128;
    let root = sets::stopping_set(tree, payoff, 0, &|v| allowed(v), cap, &mut best, &mut count)?;
    let value = *root.last().expect("nonempty");
    let (stop, policy) = reconstruct(tree, payoff, &best, allowed);
    Ok(BruteForce { value, stop, policy, distinct_values: root.len() })
}

/// `sup` over stopping rules and control policies of `E_P[Ŷ_γ]`, by enumeration.
pub fn brute_force_value(tree: &TreeModel, payoff: &[f64]) -> Result<BruteForce> {
    brute_force_value_with_cap(tree, payoff, DEFAULT_SET_CAP)
}

pub fn brute_force_value_with_cap(tree: &TreeModel, payoff: &[f64], cap: usize) -> Result<BruteForce> {
    let all: Vec<usize> = (0..tree.num_controls()).collect();
    solve(tree, payoff, cap, &|_| all.clone())
}

/// Optimal stopping value under one fixed control policy, by enumeration of stopping rules.
pub fn brute_force_value_under(tree: &TreeModel, payoff: &[f64], policy: &ControlPolicy) -> Result<BruteForce> {
    solve(tree, payoff, DEFAULT_SET_CAP, &|v| vec![policy.choice(v)])
}

/// `sup_P E_P[ξ]` for a terminal functional (one value per path), by enumeration of control policies.
pub fn brute_force_expectation(tree: &TreeModel, terminal: &[f64]) -> Result<f64> {
    if terminal.len() != tree.num_paths() {
        return Err(Error::BadSpec("one terminal value per path is required".into()));
    }
    let first_leaf = tree.leaf(0);
    let set = sets::control_set(tree, &|leaf| terminal[leaf - first_leaf], 0, DEFAULT_SET_CAP)?;
    Ok(*set.last().expect("nonempty"))
}

/// Exact `sup_{(P,ζ)} E_P[ρ(δ + sup_{r ∈ [ζ, (ζ+δ)∧T]} |B_r − B_ζ|)]` by enumeration.
pub fn brute_force_rho_hat(tree: &TreeModel, rho: &Modulus, delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::BadDelta(delta));
    }
    let window = tree.grid().window_steps(delta);
    let set = sets::window_stopping_set(tree, rho, window, delta, 0, DEFAULT_SET_CAP)?;
    Ok(*set.last().expect("nonempty"))
}

/// Same as [`brute_force_value`] for many payoffs, evaluated in parallel.
pub fn brute_force_values(tree: &TreeModel, payoffs: &[Vec<f64>]) -> Result<Vec<f64>> {
    payoffs.par_iter().map(|p| brute_force_value(tree, p).map(|b| b.value)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{ControlSet, TimeGrid};

    fn tree(n: usize, pairs: &[(f64, f64)]) -> TreeModel {
        TreeModel::build(TimeGrid::new(n as f64, n).unwrap(), ControlSet::scalar(pairs, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn constant_payoff() {
        let t = tree(2, &[(0.0, 1.0), (0.5, 0.5)]);
        assert_eq!(brute_force_value(&t, &vec![3.0; t.num_nodes()]).unwrap().value, 3.0);
    }

    #[test]
    fn one_step_drift_choice() {
        let t = tree(1, &[(-0.5, 1.0), (0.5, 1.0)]);
        let y: Vec<f64> = (0..t.num_nodes()).map(|v| t.pos(v)[0]).collect();
        let b = brute_force_value(&t, &y).unwrap();
        assert_eq!(b.value, 0.5);
        assert_eq!(b.policy.choice(0), 1);
        assert!(b.stop.steps().iter().all(|&s| s == 1));
        let measured = b.policy.stopped_expectation(&t, |v| b.stop.stops_at(&t, v), &y);
        assert_eq!(measured, 0.5);
    }

    #[test]
    fn rho_hat_cases() {
        let t = tree(1, &[(0.0, 1.0)]);
        assert_eq!(brute_force_rho_hat(&t, &Modulus::lipschitz(0.0), 1.0).unwrap(), 0.0);
        // ζ = 0 gives E[δ + |B_1|] = 2; ζ = 1 gives δ = 1.
        assert_eq!(brute_force_rho_hat(&t, &Modulus::lipschitz(1.0), 1.0).unwrap(), 2.0);
        assert!(brute_force_rho_hat(&t, &Modulus::lipschitz(1.0), 0.0).is_err());
    }

    #[test]
    fn explicit_enumeration_counts() {
        let t = tree(2, &[(0.0, 1.0), (0.5, 0.5)]);
        // Increments ±1 and 0.5 ± 0.5 share +1, so the root has three children.
        let internal = 1 + 3;
        let mut e = PolicyEnumeration::controls(&t, 1 << 20).unwrap();
        assert_eq!(e.count(), 2u128.pow(internal));
        let mut n = 0;
        while e.next_policy().is_some() {
            n += 1;
        }
        assert_eq!(n, 16);
        let mut d = PolicyEnumeration::decisions(&t, 1 << 20).unwrap();
        assert_eq!(d.count(), 16);
        let first = d.next_stopping().unwrap();
        assert!(first.steps().iter().all(|&s| s == 2));
        assert!(PolicyEnumeration::controls(&tree(4, &[(0.0, 1.0), (0.5, 0.5), (-0.5, 0.5)]), 1000).is_err());
    }

    #[test]
    fn explicit_double_enumeration_agrees() {
        let t = tree(2, &[(0.0, 1.0), (0.5, 0.5)]);
        let y: Vec<f64> = (0..t.num_nodes()).map(|v| (t.pos(v)[0] - 0.3).abs() - 0.2 * t.step(v) as f64).collect();
        let mut best = f64::NEG_INFINITY;
        let mut pols = PolicyEnumeration::controls(&t, 1 << 20).unwrap();
        while let Some(p) = pols.next_policy() {
            let mut stops = PolicyEnumeration::decisions(&t, 1 << 20).unwrap();
            while let Some(s) = stops.next_stopping() {
                best = best.max(p.stopped_expectation(&t, |v| s.stops_at(&t, v), &y));
            }
        }
        assert!((brute_force_value(&t, &y).unwrap().value - best).abs() < 1e-12);
    }

    #[test]
    fn cap_is_enforced() {
        let t = tree(3, &[(0.0, 1.0), (0.5, 0.5)]);
        let y: Vec<f64> = (0..t.num_nodes()).map(|v| t.pos(v)[0] * (1.0 + v as f64 * 1e-3)).collect();
        assert!(matches!(brute_force_value_with_cap(&t, &y, 10), Err(Error::CapExceeded { .. })));
    }
}

//! Exhaustive enumeration of the values reachable by strategies on a subtree.
//!
//! A strategy at a node either stops or picks a control and continues with
//! independent strategies in the two children of that control. The set of
//! expected rewards of all strategies is built bottom-up by taking every
//! pairing of the children's sets, so no maximization is involved until the
//! final set is scanned.

use crate::error::{Error, Result};
use crate::lattice::{tree_dist, Modulus, TreeModel};

/// Default bound on the size of any intermediate value set.
pub const DEFAULT_SET_CAP: usize = 20_000_000;

pub(crate) fn normalize(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_unstable_by(f64::total_cmp);
    v.dedup_by(|a, b| a.to_bits() == b.to_bits());
    v
}

/// Every `½(a + b)` with `a ∈ left`, `b ∈ right`, appended to `out`.
pub(crate) fn pair_averages(left: &[f64], right: &[f64], out: &mut Vec<f64>, cap: usize) -> Result<()> {
    let needed = out.len() as u128 + left.len() as u128 * right.len() as u128;
    if needed > cap as u128 {
        return Err(Error::CapExceeded { what: "oracle strategy set".into(), needed, cap: cap as u128 });
    }
    for &a in left {
        for &b in right {
            out.push(0.5 * (a + b));
        }
    }
    Ok(())
}

/// Values of all stop-or-continue strategies started at `node`.
///
/// `controls(node)` lists the controls allowed at `node`; `best` receives the
/// largest value of each visited node's set.
pub(crate) fn stopping_set<C>(
    tree: &TreeModel,
    payoff: &[f64],
    node: usize,
    controls: &C,
    cap: usize,
    best: &mut [f64],
    count: &mut u128,
) -> Result<Vec<f64>>
where
    C: Fn(usize) -> Vec<usize>,
{
    let mut out = vec![payoff[node]];
    if !tree.is_terminal(node) {
        let children: Vec<usize> = tree.children(node).collect();
        let mut sets = Vec::with_capacity(children.len());
        for &c in &children {
            sets.push(stopping_set(tree, payoff, c, controls, cap, best, count)?);
        }
        let first = children[0];
        for c in controls(node) {
            let (u, d) = tree.branch_pair(node, c);
            pair_averages(&sets[u - first], &sets[d - first], &mut out, cap)?;
        }
    }
    *count += out.len() as u128;
    let out = normalize(out);
    best[node] = *out.last().expect("nonempty");
    Ok(out)
}

/// Values of all control strategies for a terminal functional (one value per leaf node).
pub(crate) fn control_set(tree: &TreeModel, leaf_value: &dyn Fn(usize) -> f64, node: usize, cap: usize) -> Result<Vec<f64>> {
    if tree.is_terminal(node) {
        return Ok(vec![leaf_value(node)]);
    }
    let first = tree.children(node).start;
    let sets: Vec<Vec<f64>> =
        tree.children(node).map(|c| control_set(tree, leaf_value, c, cap)).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for c in 0..tree.num_controls() {
        let (u, d) = tree.branch_pair(node, c);
        pair_averages(&sets[u - first], &sets[d - first], &mut out, cap)?;
    }
    Ok(normalize(out))
}

/// Values of all control strategies inside a window of `left` steps after the origin.
#[allow(clippy::too_many_arguments)]
pub(crate) fn window_set(
    tree: &TreeModel,
    base: &Modulus,
    node: usize,
    origin: &[f64],
    left: usize,
    running: f64,
    arg: f64,
    cap: usize,
) -> Result<Vec<f64>> {
    if left == 0 || tree.is_terminal(node) {
        return Ok(vec![base.eval(arg + running)]);
    }
    let first = tree.children(node).start;
    let sets: Vec<Vec<f64>> = tree
        .children(node)
        .map(|c| window_set(tree, base, c, origin, left - 1, running.max(tree_dist(tree.pos(c), origin)), arg, cap))
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for c in 0..tree.num_controls() {
        let (u, d) = tree.branch_pair(node, c);
        pair_averages(&sets[u - first], &sets[d - first], &mut out, cap)?;
    }
    Ok(normalize(out))
}

/// Values of all (stopping rule, control strategy) pairs for the window functional.
pub(crate) fn window_stopping_set(
    tree: &TreeModel,
    base: &Modulus,
    window: usize,
    arg: f64,
    node: usize,
    cap: usize,
) -> Result<Vec<f64>> {
    let mut out = window_set(tree, base, node, tree.pos(node), window, 0.0, arg, cap)?;
    if !tree.is_terminal(node) {
        let first = tree.children(node).start;
        let sets: Vec<Vec<f64>> = tree
            .children(node)
            .map(|c| window_stopping_set(tree, base, window, arg, c, cap))
            .collect::<Result<_>>()?;
        for c in 0..tree.num_controls() {
            let (u, d) = tree.branch_pair(node, c);
            pair_averages(&sets[u - first], &sets[d - first], &mut out, cap)?;
        }
    }
    Ok(normalize(out))
}

use rayon::prelude::*;

use super::TreeModel;

/// Levels at least this wide are processed in parallel.
pub(crate) const PAR_LEVEL: usize = 2048;

/// `max_c ½(v(up_c) + v(down_c))` over the children of `node`.
///
/// `values` is indexed by node id and only read at the children of `node`.
pub fn one_step_sup(tree: &TreeModel, node: usize, values: &[f64]) -> f64 {
    one_step_argmax(tree, node, values).0
}

/// Maximal two-point average and the lowest control index attaining it.
pub fn one_step_argmax(tree: &TreeModel, node: usize, values: &[f64]) -> (f64, usize) {
    let mut best = f64::NEG_INFINITY;
    let mut arg = 0;
    for c in 0..tree.num_controls() {
        let (u, d) = tree.branch_pair(node, c);
        let v = 0.5 * (values[u] + values[d]);
        if v > best {
            best = v;
            arg = c;
        }
    }
    (best, arg)
}

/// Generic backward induction.
///
/// `step(node, cont)` returns the value of `node` given `cont`, the one-step
/// worst-case expectation of the children's values (`None` at terminal nodes).
/// The continuation is computed lazily, only when `step` asks for it.
pub fn backward_induction<F>(tree: &TreeModel, step: F) -> Vec<f64>
where
    F: Fn(usize, &dyn Fn() -> f64) -> f64 + Sync,
{
    let n = tree.depth();
    let mut v = vec![0.0; tree.num_nodes()];
    let terminal_cont = || -> f64 { panic!("terminal nodes have no continuation") };
    for node in tree.level(n) {
        v[node] = step(node, &terminal_cont);
    }
    for m in (0..n).rev() {
        let range = tree.level(m);
        let (lo, hi) = v.split_at_mut(range.end);
        let hi = &*hi;
        let offset = range.end;
        let read = |node: usize| -> f64 {
            let cont = || -> f64 {
                let mut best = f64::NEG_INFINITY;
                for c in 0..tree.num_controls() {
                    let (u, d) = tree.branch_pair(node, c);
                    let x = 0.5 * (hi[u - offset] + hi[d - offset]);
                    if x > best {
                        best = x;
                    }
                }
                best
            };
            step(node, &cont)
        };
        let slot = &mut lo[range.clone()];
        if slot.len() >= PAR_LEVEL {
            slot.par_iter_mut().enumerate().for_each(|(i, x)| *x = read(range.start + i));
        } else {
            for (i, x) in slot.iter_mut().enumerate() {
                *x = read(range.start + i);
            }
        }
    }
    v
}

/// Backward induction with frozen values.
///
/// Returns, for every node, the worst-case conditional expectation of the
/// value reached by running forward until a node where `frozen` returns a
/// value. Terminal nodes must be frozen.
pub fn conditional_sup<F>(tree: &TreeModel, frozen: F) -> Vec<f64>
where
    F: Fn(usize) -> Option<f64> + Sync,
{
    backward_induction(tree, |node, cont| match frozen(node) {
        Some(x) => x,
        None if tree.is_terminal(node) => panic!("terminal nodes must carry a frozen value"),
        None => cont(),
    })
}

/// Worst-case expectation of a terminal functional, conditional on `from_node`.
///
/// `terminal` is indexed by path (leaf order).
pub fn nonlinear_expectation(tree: &TreeModel, terminal: &[f64], from_node: usize) -> f64 {
    assert_eq!(terminal.len(), tree.num_paths(), "one terminal value per path");
    let first_leaf = tree.leaf(0);
    let v = conditional_sup(tree, |node| (node >= first_leaf).then(|| terminal[node - first_leaf]));
    v[from_node]
}

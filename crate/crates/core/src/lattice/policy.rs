use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::TreeModel;

/// A control index for every non-terminal node.
///
/// Under the induced measure, each visited node moves to the two children of
/// its chosen control with probability ½ each.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlPolicy {
    choice: Vec<usize>,
}

impl ControlPolicy {
    /// Uses control `c` everywhere.
    pub fn constant(tree: &TreeModel, c: usize) -> Self {
        Self { choice: vec![c; tree.num_nodes()] }
    }

    /// Wraps an explicit choice vector indexed by node id.
    pub fn from_choices(choice: Vec<usize>) -> Self {
        Self { choice }
    }

    pub fn choice(&self, node: usize) -> usize {
        self.choice[node]
    }

    pub fn set(&mut self, node: usize, c: usize) {
        self.choice[node] = c;
    }

    pub fn choices(&self) -> &[usize] {
        &self.choice
    }

    /// Probability of reaching each node.
    pub fn node_probabilities(&self, tree: &TreeModel) -> Vec<f64> {
        let mut prob = vec![0.0; tree.num_nodes()];
        prob[0] = 1.0;
        for m in 0..tree.depth() {
            for node in tree.level(m) {
                let p = prob[node];
                if p == 0.0 {
                    continue;
                }
                let (u, d) = tree.branch_pair(node, self.choice[node]);
                prob[u] += 0.5 * p;
                prob[d] += 0.5 * p;
            }
        }
        prob
    }

    /// Probability of each full path (leaf order).
    pub fn path_measure(&self, tree: &TreeModel) -> Vec<f64> {
        let prob = self.node_probabilities(tree);
        tree.level(tree.depth()).map(|leaf| prob[leaf]).collect()
    }

    /// `E_P[field at the first node where stop holds]`; terminal nodes always stop.
    pub fn stopped_expectation<S>(&self, tree: &TreeModel, stop: S, field: &[f64]) -> f64
    where
        S: Fn(usize) -> bool,
    {
        self.stopped_expectation_from(tree, 0, stop, field)
    }

    /// Same as [`Self::stopped_expectation`] but started at `start`.
    pub fn stopped_expectation_from<S>(&self, tree: &TreeModel, start: usize, stop: S, field: &[f64]) -> f64
    where
        S: Fn(usize) -> bool,
    {
        let mut total = 0.0;
        let mut stack = vec![(start, 1.0f64)];
        while let Some((node, p)) = stack.pop() {
            if tree.is_terminal(node) || stop(node) {
                total += p * field[node];
                continue;
            }
            let (u, d) = tree.branch_pair(node, self.choice[node]);
            if u == d {
                stack.push((u, p));
            } else {
                stack.push((d, 0.5 * p));
                stack.push((u, 0.5 * p));
            }
        }
        total
    }

    /// Map from non-terminal node id to control index.
    pub fn to_map(&self, tree: &TreeModel) -> BTreeMap<usize, usize> {
        (0..tree.level(tree.depth()).start).map(|n| (n, self.choice[n])).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{ControlSet, TimeGrid};

    #[test]
    fn measures_sum_to_one() {
        let t = TreeModel::build(
            TimeGrid::new(1.0, 3).unwrap(),
            ControlSet::scalar(&[(0.2, 1.0), (-0.2, 0.5)], 1.0).unwrap(),
        )
        .unwrap();
        let mut pol = ControlPolicy::constant(&t, 0);
        pol.set(0, 1);
        let m = pol.path_measure(&t);
        assert!((m.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert_eq!(m.iter().filter(|&&x| x > 0.0).count(), 8);
        assert!(m.iter().all(|&x| x == 0.0 || x == 0.125));
    }
}

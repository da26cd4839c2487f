use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::TimeGrid;
use crate::error::{Error, Result};

/// Absolute tolerance under which two increments are treated as the same child.
pub const INCREMENT_TOL: f64 = 1e-12;

/// Default budget on the number of stored nodes.
pub const DEFAULT_NODE_CAP: u128 = 4_000_000;

/// One control: a drift vector and a diagonal volatility vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Control {
    pub drift: Vec<f64>,
    pub vol: Vec<f64>,
}

impl Control {
    pub fn new(drift: Vec<f64>, vol: Vec<f64>) -> Self {
        Self { drift, vol }
    }

    /// Scalar control for one-dimensional trees.
    pub fn scalar(drift: f64, vol: f64) -> Self {
        Self { drift: vec![drift], vol: vec![vol] }
    }
}

/// Finite set of controls with a common bound `ell` on drift and volatility.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlSet {
    pub dim: usize,
    pub controls: Vec<Control>,
    pub ell: f64,
}

impl ControlSet {
    pub fn new(dim: usize, controls: Vec<Control>, ell: f64) -> Result<Self> {
        let set = Self { dim, controls, ell };
        set.validate()?;
        Ok(set)
    }

    /// One-dimensional control set from `(drift, vol)` pairs.
    pub fn scalar(pairs: &[(f64, f64)], ell: f64) -> Result<Self> {
        Self::new(1, pairs.iter().map(|&(b, s)| Control::scalar(b, s)).collect(), ell)
    }

    pub fn len(&self) -> usize {
        self.controls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.controls.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.dim) {
            return Err(Error::BadControl(format!("dimension must be 1 or 2, got {}", self.dim)));
        }
        if self.controls.is_empty() {
            return Err(Error::BadControl("control set is empty".into()));
        }
        if !(self.ell.is_finite() && self.ell > 0.0) {
            return Err(Error::BadControl(format!("ell must be finite and > 0, got {}", self.ell)));
        }
        for (i, c) in self.controls.iter().enumerate() {
            if c.drift.len() != self.dim || c.vol.len() != self.dim {
                return Err(Error::BadControl(format!(
                    "control {i}: drift and vol must both have length {}",
                    self.dim
                )));
            }
            if let Some(b) = c.drift.iter().find(|b| !b.is_finite() || b.abs() > self.ell + 1e-15) {
                return Err(Error::BadControl(format!("control {i}: |drift| {b} exceeds ell {}", self.ell)));
            }
            if let Some(s) = c.vol.iter().find(|s| !s.is_finite() || **s <= 0.0) {
                return Err(Error::BadControl(format!("control {i}: volatility {s} must be > 0")));
            }
            let trace: f64 = c.vol.iter().map(|s| s * s).sum();
            if trace > 2.0 * self.ell + 1e-12 {
                return Err(Error::BadControl(format!(
                    "control {i}: volatility trace {trace} exceeds 2·ell = {}",
                    2.0 * self.ell
                )));
            }
        }
        Ok(())
    }
}

/// Summary exported alongside results.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeStats {
    pub nodes: usize,
    pub depth: usize,
    pub controls: usize,
    pub branching: usize,
    pub paths: usize,
    pub dim: usize,
}

/// Non-recombining tree of all increment histories.
///
/// Nodes are numbered level by level. With `K` distinct increments, the
/// `a`-th node of level `m` has children `a·K .. a·K + K` on level `m + 1`,
/// so parents, children and the node of a path at a given step are all
/// index arithmetic. Paths are identified with leaves.
#[derive(Clone, Debug)]
pub struct TreeModel {
    grid: TimeGrid,
    controls: ControlSet,
    increments: Vec<Vec<f64>>,
    branches: Vec<(usize, usize)>,
    level_start: Vec<usize>,
    powers: Vec<usize>,
    positions: Vec<f64>,
}

impl TreeModel {
    /// Builds the tree with the default node cap.
    pub fn build(grid: TimeGrid, controls: ControlSet) -> Result<Self> {
        Self::build_with_cap(grid, controls, DEFAULT_NODE_CAP)
    }

    pub fn build_with_cap(grid: TimeGrid, controls: ControlSet, cap: u128) -> Result<Self> {
        controls.validate()?;
        let dim = controls.dim;
        let dt = grid.dt();
        let sq = dt.sqrt();

        let mut increments: Vec<Vec<f64>> = Vec::new();
        let mut intern = |inc: Vec<f64>| -> usize {
            if let Some(i) = increments
                .iter()
                .position(|e| e.iter().zip(&inc).all(|(a, b)| (a - b).abs() <= INCREMENT_TOL))
            {
                return i;
            }
            increments.push(inc);
            increments.len() - 1
        };
        let mut branches = Vec::with_capacity(controls.len());
        for c in &controls.controls {
            let up: Vec<f64> = (0..dim).map(|j| c.drift[j] * dt + c.vol[j] * sq).collect();
            let down: Vec<f64> = (0..dim).map(|j| c.drift[j] * dt - c.vol[j] * sq).collect();
            let u = intern(up);
            let d = intern(down);
            branches.push((u, d));
        }
        let k = increments.len();
        let n = grid.steps();

        let mut total: u128 = 0;
        let mut level: u128 = 1;
        for _ in 0..=n {
            total = total.saturating_add(level);
            level = level.saturating_mul(k as u128);
        }
        if total > cap {
            return Err(Error::CapExceeded { what: "tree nodes".into(), needed: total, cap });
        }
        let total = total as usize;

        let mut powers = Vec::with_capacity(n + 1);
        let mut p = 1usize;
        for _ in 0..=n {
            powers.push(p);
            p = p.saturating_mul(k);
        }
        let mut level_start = Vec::with_capacity(n + 2);
        let mut acc = 0usize;
        for m in 0..=n {
            level_start.push(acc);
            acc += powers[m];
        }
        level_start.push(acc);

        let mut positions = vec![0.0; total * dim];
        for m in 0..n {
            for a in 0..powers[m] {
                let parent = level_start[m] + a;
                for (i, inc) in increments.iter().enumerate() {
                    let child = level_start[m + 1] + a * k + i;
                    for j in 0..dim {
                        positions[child * dim + j] = positions[parent * dim + j] + inc[j];
                    }
                }
            }
        }

        Ok(Self { grid, controls, increments, branches, level_start, powers, positions })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn controls(&self) -> &ControlSet {
        &self.controls
    }

    pub fn dim(&self) -> usize {
        self.controls.dim
    }

    pub fn depth(&self) -> usize {
        self.grid.steps()
    }

    /// Number of distinct increments, i.e. children per non-terminal node.
    pub fn branching(&self) -> usize {
        self.increments.len()
    }

    pub fn increments(&self) -> &[Vec<f64>] {
        &self.increments
    }

    pub fn num_controls(&self) -> usize {
        self.branches.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.level_start[self.depth() + 1]
    }

    pub fn num_paths(&self) -> usize {
        self.powers[self.depth()]
    }

    pub fn root(&self) -> usize {
        0
    }

    /// Node ids of level `m`.
    pub fn level(&self, m: usize) -> Range<usize> {
        self.level_start[m]..self.level_start[m + 1]
    }

    pub fn step(&self, node: usize) -> usize {
        self.level_start.partition_point(|&s| s <= node) - 1
    }

    pub fn is_terminal(&self, node: usize) -> bool {
        node >= self.level_start[self.depth()]
    }

    /// Position `B_t` of the node.
    pub fn pos(&self, node: usize) -> &[f64] {
        let d = self.dim();
        &self.positions[node * d..node * d + d]
    }

    pub fn parent(&self, node: usize) -> Option<usize> {
        if node == 0 {
            return None;
        }
        let m = self.step(node);
        let a = node - self.level_start[m];
        Some(self.level_start[m - 1] + a / self.branching())
    }

    /// Children of a non-terminal node, ordered by increment index.
    pub fn children(&self, node: usize) -> Range<usize> {
        let m = self.step(node);
        debug_assert!(m < self.depth());
        let k = self.branching();
        let a = node - self.level_start[m];
        let first = self.level_start[m + 1] + a * k;
        first..first + k
    }

    /// `(up, down)` children of `node` under control `c`.
    pub fn branch_pair(&self, node: usize, c: usize) -> (usize, usize) {
        let first = self.children(node).start;
        let (u, d) = self.branches[c];
        (first + u, first + d)
    }

    /// Increment indices `(up, down)` of control `c`.
    pub fn branch_increments(&self, c: usize) -> (usize, usize) {
        self.branches[c]
    }

    /// Node visited by path `p` at step `m`.
    pub fn path_node(&self, p: usize, m: usize) -> usize {
        self.level_start[m] + p / self.powers[self.depth() - m]
    }

    /// Ancestor of `node` at step `m ≤ step(node)`.
    pub fn ancestor(&self, node: usize, m: usize) -> usize {
        let s = self.step(node);
        let a = node - self.level_start[s];
        self.level_start[m] + a / self.powers[s - m]
    }

    /// Paths (leaf indices) passing through `node`.
    pub fn paths_through(&self, node: usize) -> Range<usize> {
        let m = self.step(node);
        let a = node - self.level_start[m];
        let w = self.powers[self.depth() - m];
        a * w..(a + 1) * w
    }

    /// Leaf node id of path `p`.
    pub fn leaf(&self, p: usize) -> usize {
        self.level_start[self.depth()] + p
    }

    /// Path position at step `m`.
    pub fn path_pos(&self, p: usize, m: usize) -> &[f64] {
        self.pos(self.path_node(p, m))
    }

    /// Node ids from the root down to `node`.
    pub fn history(&self, node: usize) -> Vec<usize> {
        let s = self.step(node);
        (0..=s).map(|m| self.ancestor(node, m)).collect()
    }

    /// Increment indices leading from the root to `node`.
    pub fn increment_string(&self, node: usize) -> Vec<usize> {
        let h = self.history(node);
        h.windows(2).map(|w| w[1] - self.children(w[0]).start).collect()
    }

    /// Rebuilds a position from an increment string.
    pub fn replay(&self, incs: &[usize]) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        for &i in incs {
            for (xj, dj) in x.iter_mut().zip(&self.increments[i]) {
                *xj += dj;
            }
        }
        x
    }

    pub fn stats(&self) -> TreeStats {
        TreeStats {
            nodes: self.num_nodes(),
            depth: self.depth(),
            controls: self.num_controls(),
            branching: self.branching(),
            paths: self.num_paths(),
            dim: self.dim(),
        }
    }
}

/// Euclidean distance between two points.
pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    if a.len() == 1 {
        return (a[0] - b[0]).abs();
    }
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Euclidean norm.
pub(crate) fn norm(a: &[f64]) -> f64 {
    if a.len() == 1 {
        return a[0].abs();
    }
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::TreeModel;

/// Which form of the Lipschitz statement a certificate covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LipschitzScope {
    /// `|τ(ω₁) − τ(ω₂)| ≤ κ‖ω₁ − ω₂‖_{0,T}` for all pairs.
    GlobalT,
    /// The statement restricted to times `t₀ ≥ a + κ‖ω₁ − ω₂‖_{0,t₀}`.
    Conditional,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipschitzCert {
    pub kappa: f64,
    pub scope: LipschitzScope,
}

/// Min or max of two stopping times.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Compose {
    Min,
    Max,
}

/// An adapted stop/continue rule on the tree.
///
/// Decisions are stored in canonical form: `stopped_by(node)` is true iff the
/// rule has stopped at or before `node`. Rules built in continuous time also
/// keep the exact real-valued time of every path; the grid time of a path is
/// then the first grid time at which the event "already stopped" is decided
/// by the node, which is the smallest adapted grid time not below the real one.
#[derive(Clone, Debug, PartialEq)]
pub struct StoppingTime {
    stopped: Vec<bool>,
    times: Vec<usize>,
    real: Option<Vec<f64>>,
    cert: Option<LipschitzCert>,
}

/// JSON form of a stopping time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoppingTimeExport {
    /// Nodes at which the rule stops (first stop along each path).
    pub stop_nodes: Vec<usize>,
    /// Grid step of every path, in leaf order.
    pub path_steps: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub real_times: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<LipschitzCert>,
}

impl StoppingTime {
    fn from_times_unchecked(tree: &TreeModel, times: Vec<usize>) -> Self {
        let mut stopped = vec![false; tree.num_nodes()];
        for (node, flag) in stopped.iter_mut().enumerate() {
            let p = tree.paths_through(node).start;
            *flag = times[p] <= tree.step(node);
        }
        Self { stopped, times, real: None, cert: None }
    }

    /// Induced time of an arbitrary decision map (terminal nodes always stop).
    pub fn from_decisions<F: Fn(usize) -> bool>(tree: &TreeModel, decide: F) -> Self {
        let n = tree.depth();
        let mut first = vec![usize::MAX; tree.num_nodes()];
        for m in 0..=n {
            for node in tree.level(m) {
                let inherited = if m == 0 { usize::MAX } else { first[tree.parent(node).unwrap()] };
                first[node] = if inherited != usize::MAX {
                    inherited
                } else if m == n || decide(node) {
                    m
                } else {
                    usize::MAX
                };
            }
        }
        let times = tree.level(n).map(|leaf| first[leaf]).collect();
        Self::from_times_unchecked(tree, times)
    }

    /// Stops at step `m` on every path.
    pub fn deterministic(tree: &TreeModel, m: usize) -> Self {
        let m = m.min(tree.depth());
        let mut st = Self::from_times_unchecked(tree, vec![m; tree.num_paths()]);
        st.real = Some(vec![tree.grid().time(m); tree.num_paths()]);
        st
    }

    /// Builds a rule from per-path grid steps, rejecting non-adapted assignments.
    pub fn from_path_steps(tree: &TreeModel, times: Vec<usize>) -> Result<Self> {
        if times.len() != tree.num_paths() {
            return Err(Error::BadSpec("one step per path is required".into()));
        }
        if let Some(t) = times.iter().find(|&&t| t > tree.depth()) {
            return Err(Error::BadSpec(format!("step {t} beyond the horizon")));
        }
        for node in 0..tree.num_nodes() {
            let s = tree.step(node);
            let mut r = tree.paths_through(node);
            let first = times[r.next().unwrap()] <= s;
            if r.any(|p| (times[p] <= s) != first) {
                return Err(Error::BadSpec(format!("assignment is not adapted at node {node}")));
            }
        }
        Ok(Self::from_times_unchecked(tree, times))
    }

    /// Grid rule induced by real-valued stopping times.
    ///
    /// A node stops once every path through it has a real time at or before
    /// the node's time.
    pub fn from_real_times(tree: &TreeModel, real: Vec<f64>) -> Self {
        assert_eq!(real.len(), tree.num_paths());
        let g = tree.grid();
        let tol = g.time_tol();
        let n = tree.depth();
        let mut sub_max = vec![f64::NEG_INFINITY; tree.num_nodes()];
        for (p, &r) in real.iter().enumerate() {
            sub_max[tree.leaf(p)] = r;
        }
        for m in (0..n).rev() {
            for node in tree.level(m) {
                sub_max[node] = tree.children(node).map(|c| sub_max[c]).fold(f64::NEG_INFINITY, f64::max);
            }
        }
        let mut st = Self::from_decisions(tree, |node| sub_max[node] <= g.time(tree.step(node)) + tol);
        st.real = Some(real);
        st
    }

    /// First node where `field ≤ level`, with the real time of the first
    /// crossing of the linear interpolation of the field between grid times.
    pub fn hitting(tree: &TreeModel, field: &[f64], level: f64) -> Self {
        let g = tree.grid();
        let n = tree.depth();
        let mut times = Vec::with_capacity(tree.num_paths());
        let mut real = Vec::with_capacity(tree.num_paths());
        for p in 0..tree.num_paths() {
            let mut hit = None;
            for m in 0..=n {
                if field[tree.path_node(p, m)] <= level {
                    hit = Some(m);
                    break;
                }
            }
            match hit {
                None => {
                    times.push(n);
                    real.push(g.horizon());
                }
                Some(0) => {
                    times.push(0);
                    real.push(0.0);
                }
                Some(m) => {
                    let a = field[tree.path_node(p, m - 1)];
                    let b = field[tree.path_node(p, m)];
                    let frac = ((a - level) / (a - b)).clamp(0.0, 1.0);
                    let r = g.time(m - 1) + frac * g.dt();
                    times.push(m);
                    real.push(if frac >= 1.0 { g.time(m) } else { r });
                }
            }
        }
        let mut st = Self::from_times_unchecked(tree, times);
        st.real = Some(real);
        st
    }

    /// Grid step of path `p`.
    pub fn step(&self, p: usize) -> usize {
        self.times[p]
    }

    pub fn steps(&self) -> &[usize] {
        &self.times
    }

    /// Real-valued time of path `p`; equals the grid time when no real companion is kept.
    pub fn real_time(&self, tree: &TreeModel, p: usize) -> f64 {
        match &self.real {
            Some(r) => r[p],
            None => tree.grid().time(self.times[p]),
        }
    }

    pub fn real_times(&self) -> Option<&[f64]> {
        self.real.as_deref()
    }

    /// Real times of all paths (grid times when no companion is kept).
    pub fn real_or_grid(&self, tree: &TreeModel) -> Vec<f64> {
        (0..tree.num_paths()).map(|p| self.real_time(tree, p)).collect()
    }

    /// True iff the rule has stopped at or before `node`.
    pub fn stopped_by(&self, node: usize) -> bool {
        self.stopped[node]
    }

    /// Node where the rule stopped, if it stopped at or before `node`.
    pub fn stop_ancestor(&self, tree: &TreeModel, node: usize) -> Option<usize> {
        if !self.stopped[node] {
            return None;
        }
        let p = tree.paths_through(node).start;
        Some(tree.ancestor(node, self.times[p]))
    }

    /// True iff `node` is the first stop node on its paths.
    pub fn stops_at(&self, tree: &TreeModel, node: usize) -> bool {
        self.stopped[node] && tree.parent(node).is_none_or(|p| !self.stopped[p])
    }

    /// Grid step of the rule on paths through `node`, if already decided there.
    pub fn step_at(&self, tree: &TreeModel, node: usize) -> Option<usize> {
        self.stopped[node].then(|| self.times[tree.paths_through(node).start])
    }

    pub fn certificate(&self) -> Option<LipschitzCert> {
        self.cert
    }

    pub fn with_certificate(mut self, cert: LipschitzCert) -> Self {
        self.cert = Some(cert);
        self
    }

    /// Pointwise min or max.
    pub fn compose(&self, tree: &TreeModel, other: &StoppingTime, op: Compose) -> StoppingTime {
        let f = |a: usize, b: usize| if op == Compose::Min { a.min(b) } else { a.max(b) };
        let times = self.times.iter().zip(&other.times).map(|(&a, &b)| f(a, b)).collect();
        let mut st = Self::from_times_unchecked(tree, times);
        if self.real.is_some() || other.real.is_some() {
            let fr = |a: f64, b: f64| if op == Compose::Min { a.min(b) } else { a.max(b) };
            let real = (0..tree.num_paths())
                .map(|p| fr(self.real_time(tree, p), other.real_time(tree, p)))
                .collect();
            st.real = Some(real);
        }
        st
    }

    /// Pathwise comparison of grid times.
    pub fn le(&self, other: &StoppingTime) -> bool {
        self.times.iter().zip(&other.times).all(|(a, b)| a <= b)
    }

    pub fn export(&self, tree: &TreeModel) -> StoppingTimeExport {
        StoppingTimeExport {
            stop_nodes: (0..tree.num_nodes()).filter(|&n| self.stops_at(tree, n)).collect(),
            path_steps: self.times.clone(),
            real_times: self.real.clone(),
            certificate: self.cert,
        }
    }
}

/// Stops at the first node where `a − b ≤ gap`.
pub fn approach_time(tree: &TreeModel, a: &[f64], b: &[f64], gap: f64) -> StoppingTime {
    StoppingTime::from_decisions(tree, |node| a[node] - b[node] <= gap)
}

/// Min or max of two stopping times.
pub fn stop_compose(tree: &TreeModel, a: &StoppingTime, b: &StoppingTime, op: Compose) -> StoppingTime {
    a.compose(tree, b, op)
}

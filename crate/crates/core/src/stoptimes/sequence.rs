use serde::Serialize;

use super::sandwich::{check_path_cap, sandwich_stopping_time};
use super::{LipschitzCert, LipschitzScope, StoppingTime};
use crate::error::Result;
use crate::lattice::TreeModel;
use crate::processes::{ceil_log2, Index};

/// One member of the nondecreasing Lipschitz sequence approximating `τ₀` from below.
#[derive(Clone, Debug)]
pub struct WpTerm {
    pub n: usize,
    /// Dyadic level `⌈log₂(n+2)⌉`.
    pub level: usize,
    /// Position `n + 2 − 2^{level−1}` inside the level.
    pub offset: usize,
    pub kappa: f64,
    pub wp: StoppingTime,
}

/// Everything produced while building the sequence.
#[derive(Clone, Debug)]
pub struct WpSequence {
    /// `1 + ⌊1/X₀⌋`.
    pub n0: usize,
    /// `levels[k] = 1/(k + n0)`.
    pub levels: Vec<f64>,
    /// Hitting time of `levels[k]`.
    pub hitting: Vec<StoppingTime>,
    /// `deltas[k-1]` is the closeness radius used at stage `k ≥ 1`.
    pub deltas: Vec<f64>,
    /// `stages[k-1]` is the sandwich time between hitting times `k-1` and `k+1`.
    pub stages: Vec<StoppingTime>,
    /// `running_max[l-1]` is the maximum of stages `1..=l`.
    pub running_max: Vec<StoppingTime>,
    pub terms: Vec<WpTerm>,
}

/// Compact summary of one term for reports.
#[derive(Clone, Debug, Serialize)]
pub struct WpSummary {
    pub n: usize,
    pub level: usize,
    pub offset: usize,
    pub kappa: f64,
}

impl WpSequence {
    /// Term `n ≥ 1`.
    pub fn wp(&self, n: usize) -> &StoppingTime {
        &self.terms[n - 1].wp
    }

    pub fn kappa(&self, n: usize) -> f64 {
        self.terms[n - 1].kappa
    }

    /// Hitting time that bounds term `n` from below (level `⌈log₂(n+2)⌉ − 2`).
    pub fn lower_hitting(&self, n: usize) -> &StoppingTime {
        &self.hitting[self.terms[n - 1].level - 2]
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn summaries(&self) -> Vec<WpSummary> {
        self.terms.iter().map(|t| WpSummary { n: t.n, level: t.level, offset: t.offset, kappa: t.kappa }).collect()
    }
}

/// Builds `℘₁ ≤ … ≤ ℘_{n_max}` between the level-hitting times of the index and `τ₀`.
///
/// Stage `k` sandwiches a Lipschitz time between the hitting times of
/// `1/(k−1+n0)` and `1/(k+1+n0)`, with radius `δ_k` chosen as the largest
/// argument keeping the index modulus below `1/((k+n0)(k+n0+1))`. Term `n`
/// interpolates between the running maxima of levels `ℓ−1` and `ℓ`.
pub fn build_wp_sequence(tree: &TreeModel, index: &Index, n_max: usize) -> Result<WpSequence> {
    check_path_cap(tree)?;
    let g = tree.grid();
    let horizon = g.horizon();
    let n0 = 1 + (1.0 / index.x0).floor() as usize;
    let top = ceil_log2(n_max.max(1) + 2);
    let levels: Vec<f64> = (0..=top + 1).map(|k| 1.0 / (k + n0) as f64).collect();
    let hitting: Vec<StoppingTime> = levels.iter().map(|&l| StoppingTime::hitting(tree, &index.field, l)).collect();

    // Any radius above the widest pair distance selects every pair.
    let spread = tree.level(tree.depth()).map(|v| crate::lattice::tree_norm(tree.pos(v))).fold(0.0, f64::max);
    let cap = 2.0 * spread + 2.0 * g.horizon() + 1.0;
    let mut deltas = Vec::with_capacity(top);
    let mut stages = Vec::with_capacity(top);
    let mut running_max: Vec<StoppingTime> = Vec::with_capacity(top);
    for k in 1..=top {
        let bound = 1.0 / (((k + n0) * (k + n0 + 1)) as f64);
        let delta = index.rho.largest_arg_below(bound).min(cap);
        let kappa = 2.0 * horizon / delta;
        let stage = sandwich_stopping_time(tree, [&hitting[k - 1], &hitting[k], &hitting[k + 1]], delta, kappa)?;
        let rm = match running_max.last() {
            None => stage.clone(),
            Some(prev) => prev.compose(tree, &stage, super::Compose::Max),
        }
        .with_certificate(LipschitzCert { kappa, scope: LipschitzScope::Conditional });
        deltas.push(delta);
        stages.push(stage);
        running_max.push(rm);
    }

    let mut terms = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let level = ceil_log2(n + 2);
        let offset = n + 2 - (1 << (level - 1));
        let width = offset as f64 * 2.0f64.powi(1 - level as i32) * horizon;
        let (lo, hi) = (&running_max[level - 2], &running_max[level - 1]);
        let real: Vec<f64> = (0..tree.num_paths())
            .map(|p| (lo.real_time(tree, p) + width).min(hi.real_time(tree, p)))
            .collect();
        let kappa = 2.0 * horizon / deltas[level - 1];
        let wp = StoppingTime::from_real_times(tree, real)
            .with_certificate(LipschitzCert { kappa, scope: LipschitzScope::Conditional });
        terms.push(WpTerm { n, level, offset, kappa, wp });
    }
    Ok(WpSequence { n0, levels, hitting, deltas, stages, running_max, terms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{ControlSet, TimeGrid};
    use crate::processes::{tau0, tau_n, Expr, IndexSpec, ModulusSpec};

    fn tree(n: usize, controls: &[(f64, f64)]) -> TreeModel {
        TreeModel::build(TimeGrid::new(1.0, n).unwrap(), ControlSet::scalar(controls, 1.0).unwrap()).unwrap()
    }

    fn index(t: &TreeModel, expr: Expr) -> Index {
        IndexSpec { expr, modulus: ModulusSpec::Lipschitz }.resolve(t).unwrap()
    }

    #[test]
    fn constant_index_gives_horizon() {
        let t = tree(3, &[(0.0, 1.0), (0.5, 0.5)]);
        let seq = build_wp_sequence(&t, &index(&t, Expr::constant(1.0)), 6).unwrap();
        for n in 1..=6 {
            assert!(seq.wp(n).steps().iter().all(|&s| s == 3));
            assert!(seq.wp(n).real_times().unwrap().iter().all(|&r| r == 1.0));
        }
    }

    #[test]
    fn sequence_properties() {
        let t = tree(4, &[(0.0, 1.0), (-0.6, 0.8)]);
        let idx = index(&t, Expr::sum(vec![Expr::constant(0.7), Expr::coord(0)]));
        let n_max = 8;
        let seq = build_wp_sequence(&t, &idx, n_max + 1).unwrap();
        let t0 = tau0(&t, &idx);
        let dt = t.grid().dt();
        let mut strict_paths = 0;
        for n in 1..=n_max {
            let (a, b) = (seq.wp(n), seq.wp(n + 1));
            let tn = tau_n(&t, &idx, n);
            assert_eq!(tn.steps(), seq.lower_hitting(n).steps());
            for p in 0..t.num_paths() {
                let (ra, rb) = (a.real_time(&t, p), b.real_time(&t, p));
                assert!(tn.real_time(&t, p) <= ra + 1e-12);
                assert!(ra <= t0.real_time(&t, p) + 1e-12);
                assert!(ra <= rb + 1e-12 && rb - ra <= 2.0 / (n as f64 + 3.0) + 1e-12);
                assert!(tn.step(p) <= a.step(p) && a.step(p) <= t0.step(p));
                assert!(a.step(p) <= b.step(p));
                assert!(t.grid().time(b.step(p)) - t.grid().time(a.step(p)) <= 2.0 / (n as f64 + 3.0) + dt + 1e-12);
                assert!(t.grid().ceil_step(ra) <= a.step(p) && t.grid().time(a.step(p)) <= ra + dt + 1e-12);
                if t0.step(p) < 4 || idx.field[t.leaf(p)] <= 0.0 {
                    assert!(ra < t0.real_time(&t, p));
                    strict_paths += 1;
                }
            }
        }
        assert!(strict_paths > 0);
    }
}

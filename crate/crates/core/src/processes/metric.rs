use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::lattice::{Modulus, TreeModel};

/// `|t₁ − t₂| + max_r |ω₁(r∧t₁) − ω₂(r∧t₂)|` for two tree paths and two grid steps.
pub fn metric_dinf(tree: &TreeModel, p1: usize, s1: usize, p2: usize, s2: usize) -> f64 {
    let g = tree.grid();
    let mut sup: f64 = 0.0;
    for r in 0..=tree.depth() {
        let a = tree.path_pos(p1, r.min(s1));
        let b = tree.path_pos(p2, r.min(s2));
        sup = sup.max(crate::lattice::tree_dist(a, b));
    }
    (g.time(s1) - g.time(s2)).abs() + sup
}

/// Same metric between two nodes (the stopped path is determined by the node).
pub fn node_dinf(tree: &TreeModel, u: usize, v: usize) -> f64 {
    let (su, sv) = (tree.step(u), tree.step(v));
    let g = tree.grid();
    let mut sup: f64 = 0.0;
    for r in 0..=su.max(sv) {
        let a = tree.pos(tree.ancestor(u, r.min(su)));
        let b = tree.pos(tree.ancestor(v, r.min(sv)));
        sup = sup.max(crate::lattice::tree_dist(a, b));
    }
    (g.time(su) - g.time(sv)).abs() + sup
}

/// `max_{r ≤ step} |ω₁(r) − ω₂(r)|` for two tree paths.
pub fn path_distance(tree: &TreeModel, p1: usize, p2: usize, step: usize) -> f64 {
    (0..=step)
        .map(|r| crate::lattice::tree_dist(tree.path_pos(p1, r), tree.path_pos(p2, r)))
        .fold(0.0, f64::max)
}

/// Discrete oscillation `sup{|ω(r′) − ω(r)| : r, r′ ≤ t, |r′ − r| ≤ x}` of a path given by its grid values.
pub fn path_modulus_values(values: &[&[f64]], dt: f64, step: usize, x: f64) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    let gap = ((x / dt) + 1e-9).floor() as usize;
    let mut best: f64 = 0.0;
    for i in 0..=step {
        for j in i..=step.min(i + gap) {
            best = best.max(crate::lattice::tree_dist(values[i], values[j]));
        }
    }
    best
}

/// Discrete oscillation of tree path `p` on `[0, t_step]` over gaps at most `x`.
pub fn path_modulus(tree: &TreeModel, p: usize, step: usize, x: f64) -> f64 {
    let vals: Vec<&[f64]> = (0..=tree.depth()).map(|m| tree.path_pos(p, m)).collect();
    path_modulus_values(&vals, tree.grid().dt(), step, x)
}

/// Result of a modulus check over node pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuityReport {
    pub pairs_checked: usize,
    pub exhaustive: bool,
    pub max_violation: f64,
    pub worst_pair: Option<(usize, usize)>,
    pub pass: bool,
}

fn scan<F>(tree: &TreeModel, budget: usize, seed: u64, same_time: bool, violation: F) -> ContinuityReport
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    let nodes = tree.num_nodes();
    let pairs: Vec<(usize, usize)> = if same_time {
        let total: usize = (0..=tree.depth()).map(|m| tree.level(m).len().pow(2)).sum();
        if total <= budget {
            (0..=tree.depth())
                .flat_map(|m| {
                    let r = tree.level(m);
                    r.clone().flat_map(move |u| r.clone().filter(move |&v| v > u).map(move |v| (u, v)))
                })
                .collect()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..budget)
                .map(|_| {
                    let m = rng.gen_range(0..=tree.depth());
                    let r = tree.level(m);
                    (rng.gen_range(r.clone()), rng.gen_range(r))
                })
                .collect()
        }
    } else if nodes * nodes <= budget {
        (0..nodes).flat_map(|u| (u + 1..nodes).map(move |v| (u, v))).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..budget).map(|_| (rng.gen_range(0..nodes), rng.gen_range(0..nodes))).collect()
    };
    let exhaustive = if same_time {
        (0..=tree.depth()).map(|m| tree.level(m).len().pow(2)).sum::<usize>() <= budget
    } else {
        nodes * nodes <= budget
    };
    let (max_violation, worst_pair) = pairs
        .par_iter()
        .map(|&(u, v)| (violation(u, v), Some((u, v))))
        .reduce(|| (f64::NEG_INFINITY, None), |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a });
    let max_violation = if pairs.is_empty() { 0.0 } else { max_violation.max(0.0) };
    ContinuityReport { pairs_checked: pairs.len(), exhaustive, max_violation, worst_pair, pass: max_violation <= 1e-12 }
}

/// Checks `|X(t₁,ω₁) − X(t₂,ω₂)| ≤ ρ(d_∞)` over node pairs.
///
/// All pairs are scanned when their number is within `budget`; otherwise
/// `budget` pairs are drawn with a seeded generator.
pub fn verify_uniform_continuity(tree: &TreeModel, field: &[f64], rho: &Modulus, budget: usize, seed: u64) -> ContinuityReport {
    scan(tree, budget, seed, false, |u, v| (field[u] - field[v]).abs() - rho.eval(node_dinf(tree, u, v)))
}

/// Checks `|X_t(ω) − X_t(ω′)| ≤ ρ(‖ω − ω′‖_{0,t})` over pairs of nodes at a common time.
pub fn verify_path_modulus(tree: &TreeModel, field: &[f64], rho: &Modulus, budget: usize, seed: u64) -> ContinuityReport {
    scan(tree, budget, seed, true, |u, v| {
        let s = tree.step(u);
        let d = (0..=s)
            .map(|r| crate::lattice::tree_dist(tree.pos(tree.ancestor(u, r)), tree.pos(tree.ancestor(v, r))))
            .fold(0.0, f64::max);
        (field[u] - field[v]).abs() - rho.eval(d)
    })
}

/// Smallest constant `c` such that `c·(d^{p₁} ∨ d^{p₂})` bounds the field's oscillation over node pairs.
///
/// `same_time` selects the common-time path distance instead of `d_∞`.
pub fn calibrate_constant(tree: &TreeModel, field: &[f64], p1: f64, p2: f64, same_time: bool) -> f64 {
    let unit = Modulus { c: 1.0, p1, p2 };
    let ratio = |u: usize, v: usize, d: f64| {
        let diff = (field[u] - field[v]).abs();
        if diff == 0.0 {
            0.0
        } else if d == 0.0 {
            f64::INFINITY
        } else {
            diff / unit.eval(d)
        }
    };
    let nodes = tree.num_nodes();
    (0..nodes)
        .into_par_iter()
        .map(|u| {
            let mut best: f64 = 0.0;
            if same_time {
                for v in tree.level(tree.step(u)) {
                    if v <= u {
                        continue;
                    }
                    let s = tree.step(u);
                    let d = (0..=s)
                        .map(|r| crate::lattice::tree_dist(tree.pos(tree.ancestor(u, r)), tree.pos(tree.ancestor(v, r))))
                        .fold(0.0, f64::max);
                    best = best.max(ratio(u, v, d));
                }
            } else {
                for v in u + 1..nodes {
                    best = best.max(ratio(u, v, node_dinf(tree, u, v)));
                }
            }
            best
        })
        .reduce(|| 0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{ControlSet, TimeGrid};
    use crate::processes::Expr;

    fn tree(n: usize) -> TreeModel {
        TreeModel::build(TimeGrid::new(1.0, n).unwrap(), ControlSet::scalar(&[(0.3, 1.0), (-0.3, 0.6)], 1.0).unwrap())
            .unwrap()
    }

    #[test]
    fn metric_basics() {
        let t = tree(3);
        for p in 0..t.num_paths() {
            assert_eq!(metric_dinf(&t, p, 2, p, 2), 0.0);
            for q in 0..t.num_paths() {
                assert_eq!(metric_dinf(&t, p, 1, q, 3), metric_dinf(&t, q, 3, p, 1));
            }
        }
    }

    #[test]
    fn metric_matches_direct_double_loop() {
        let t = tree(3);
        let (p, q, s1, s2) = (5, 30, 3, 1);
        let mut sup: f64 = 0.0;
        for r in 0..=3usize {
            let a = t.path_pos(p, r.min(s1))[0];
            let b = t.path_pos(q, r.min(s2))[0];
            sup = sup.max((a - b).abs());
        }
        assert!((metric_dinf(&t, p, s1, q, s2) - (sup + 2.0 / 3.0)).abs() < 1e-12);
        let u = t.path_node(p, s1);
        let v = t.path_node(q, s2);
        assert!((node_dinf(&t, u, v) - metric_dinf(&t, p, s1, q, s2)).abs() < 1e-15);
    }

    #[test]
    fn path_modulus_cases() {
        let pts = [[0.0], [1.0], [0.0]];
        let v: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        assert_eq!(path_modulus_values(&v, 0.5, 2, 0.5), 1.0);
        assert_eq!(path_modulus_values(&v, 0.5, 2, 0.0), 0.0);
        let t = tree(3);
        for p in 0..t.num_paths() {
            let vals: Vec<f64> = (0..=3).map(|m| t.path_pos(p, m)[0]).collect();
            let osc = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - vals.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!((path_modulus(&t, p, 3, 1.0) - osc).abs() < 1e-12);
        }
    }

    #[test]
    fn capped_norm_is_one_lipschitz() {
        let t = tree(3);
        let f = Expr::min(vec![Expr::constant(1.2), Expr::Norm]).field(&t);
        assert!(verify_uniform_continuity(&t, &f, &Modulus::lipschitz(1.0), 1 << 20, 1).pass);
    }

    #[test]
    fn sign_is_not_continuous() {
        let t = TreeModel::build(TimeGrid::new(1.0, 2).unwrap(), ControlSet::scalar(&[(0.0, 1.0)], 1.0).unwrap()).unwrap();
        let f = Expr::Sign { arg: Box::new(Expr::coord(0)) }.field(&t);
        let r = verify_uniform_continuity(&t, &f, &Modulus::lipschitz(0.5), 1 << 20, 1);
        assert!(!r.pass);
        let (u, v) = r.worst_pair.unwrap();
        assert_ne!(f[u], f[v]);
    }

    #[test]
    fn calibrated_constant_passes_and_is_tight() {
        let t = tree(3);
        let f = Expr::abs(Expr::coord(0)).field(&t);
        let c = calibrate_constant(&t, &f, 2.0, 2.0, false);
        let rho = Modulus::new(c, 2.0, 2.0).unwrap();
        assert!(verify_uniform_continuity(&t, &f, &rho, 1 << 20, 1).pass);
        let smaller = Modulus::new(c * 0.99, 2.0, 2.0).unwrap();
        assert!(!verify_uniform_continuity(&t, &f, &smaller, 1 << 20, 1).pass);
    }
}

//! Payoff processes built from `L`, `U` and stopping times: the jump payoff,
//! stopped fields and the blended family that interpolates between `L` and `U`.

use super::Payoff;
use crate::lattice::TreeModel;
use crate::stoptimes::StoppingTime;

/// `L` strictly before `τ₀`, `U` from `τ₀` on.
pub fn script_y(tree: &TreeModel, payoff: &Payoff, tau0: &StoppingTime) -> Vec<f64> {
    (0..tree.num_nodes())
        .map(|node| if tau0.stopped_by(node) { payoff.upper[node] } else { payoff.lower[node] })
        .collect()
}

/// The field frozen at `τ`: `X_{τ∧t}`.
pub fn stopped(tree: &TreeModel, field: &[f64], tau: &StoppingTime) -> Vec<f64> {
    (0..tree.num_nodes()).map(|node| field[tau.stop_ancestor(tree, node).unwrap_or(node)]).collect()
}

/// Blend weight `1 ∧ (2^k (t − s) − 1)^+`, exactly 0 up to `s + 2^{-k}` and exactly 1 from `s + 2^{1-k}`.
pub fn blend_weight(t: f64, s: f64, k: u32) -> f64 {
    let h = 0.5f64.powi(k as i32);
    let gap = t - s;
    if gap <= h {
        0.0
    } else if gap >= 2.0 * h {
        1.0
    } else {
        gap / h - 1.0
    }
}

/// `L + w(U − L)` where `w` is the blend weight relative to `wp`.
pub fn y_nk(tree: &TreeModel, payoff: &Payoff, wp: &StoppingTime, k: u32) -> Vec<f64> {
    let g = tree.grid();
    (0..tree.num_nodes())
        .map(|node| {
            let (l, u) = (payoff.lower[node], payoff.upper[node]);
            match wp.step_at(tree, node) {
                None => l,
                Some(s) => {
                    let w = blend_weight(g.time(tree.step(node)), g.time(s), k);
                    l + w * (u - l)
                }
            }
        })
        .collect()
}

/// Grid step of `(wp + 2^{1-k}) ∧ T` rounded down, given the step of `wp`.
pub fn blend_end_step(tree: &TreeModel, wp_step: usize, k: u32) -> usize {
    let g = tree.grid();
    let end = (g.time(wp_step) + 2.0 * 0.5f64.powi(k as i32)).min(g.horizon());
    g.floor_step(end).max(wp_step)
}

/// The blended payoff stopped once the blend reaches `U`.
///
/// Before `(wp + 2^{1-k}) ∧ T` it equals [`y_nk`]; from there on it is `U`
/// read at the last grid time not after that instant.
pub fn hat_y_nk(tree: &TreeModel, payoff: &Payoff, wp: &StoppingTime, k: u32) -> Vec<f64> {
    let g = tree.grid();
    let y = y_nk(tree, payoff, wp, k);
    (0..tree.num_nodes())
        .map(|node| {
            let Some(s) = wp.step_at(tree, node) else { return y[node] };
            let end = (g.time(s) + 2.0 * 0.5f64.powi(k as i32)).min(g.horizon());
            let t = g.time(tree.step(node));
            if t + g.time_tol() < end {
                y[node]
            } else {
                payoff.upper[tree.ancestor(node, blend_end_step(tree, s, k))]
            }
        })
        .collect()
}

/// `L` up to and including `wp`, then `U` frozen at `wp`.
pub fn script_y_n(tree: &TreeModel, payoff: &Payoff, wp: &StoppingTime) -> Vec<f64> {
    (0..tree.num_nodes())
        .map(|node| match wp.step_at(tree, node) {
            Some(s) if s < tree.step(node) => payoff.upper[tree.ancestor(node, s)],
            _ => payoff.lower[node],
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{ControlSet, Modulus, TimeGrid};

    fn setup() -> (TreeModel, Payoff) {
        let t = TreeModel::build(TimeGrid::new(1.0, 4).unwrap(), ControlSet::scalar(&[(0.0, 1.0), (0.3, 0.5)], 1.0).unwrap())
            .unwrap();
        let n = t.num_nodes();
        let lower: Vec<f64> = (0..n).map(|v| if t.is_terminal(v) { 1.0 + t.pos(v)[0] } else { t.pos(v)[0] }).collect();
        let upper: Vec<f64> = (0..n).map(|v| 1.0 + t.pos(v)[0]).collect();
        (t, Payoff { lower, upper, bound: 10.0, rho: Modulus::lipschitz(1.0) })
    }

    #[test]
    fn weights_at_the_boundaries() {
        assert_eq!(blend_weight(0.25 + 0.125, 0.25, 3), 0.0);
        assert_eq!(blend_weight(0.25 + 0.25, 0.25, 3), 1.0);
        assert!((blend_weight(0.25 + 1.5 * 0.125, 0.25, 3) - 0.5).abs() < 1e-15);
        for k in 1..8 {
            assert!(blend_weight(0.9, 0.5, k) <= blend_weight(0.9, 0.5, k + 1) || 0.4 < 0.5f64.powi(k as i32));
        }
    }

    #[test]
    fn jump_payoff_switches_at_tau0() {
        let (t, p) = setup();
        let tau = StoppingTime::deterministic(&t, 2);
        let y = script_y(&t, &p, &tau);
        for v in 0..t.num_nodes() {
            let want = if t.step(v) >= 2 { p.upper[v] } else { p.lower[v] };
            assert_eq!(y[v], want);
        }
    }

    #[test]
    fn blended_payoff_is_sandwiched() {
        let (t, p) = setup();
        let wp = StoppingTime::from_decisions(&t, |v| t.pos(v)[0] > 0.2);
        for k in 1..6 {
            let y = y_nk(&t, &p, &wp, k);
            for v in 0..t.num_nodes() {
                assert!(p.lower[v] <= y[v] + 1e-15 && y[v] <= p.upper[v] + 1e-15);
            }
        }
    }

    #[test]
    fn large_k_recovers_frozen_payoff() {
        let (t, p) = setup();
        let wp = StoppingTime::from_decisions(&t, |v| t.pos(v)[0] > 0.2);
        assert_eq!(hat_y_nk(&t, &p, &wp, 6), script_y_n(&t, &p, &wp));
        let y = script_y_n(&t, &p, &wp);
        for v in 0..t.num_nodes() {
            match wp.step_at(&t, v) {
                Some(s) if s < t.step(v) => assert_eq!(y[v], p.upper[t.ancestor(v, s)]),
                _ => assert_eq!(y[v], p.lower[v]),
            }
        }
    }

    #[test]
    fn hat_is_constant_after_blend_end() {
        let (t, p) = setup();
        let wp = StoppingTime::deterministic(&t, 1);
        let h = hat_y_nk(&t, &p, &wp, 2);
        // wp = 0.25, blend ends at 0.75 = step 3.
        for leaf in t.level(4) {
            assert_eq!(h[leaf], p.upper[t.ancestor(leaf, 3)]);
            assert_eq!(h[t.ancestor(leaf, 2)], p.lower[t.ancestor(leaf, 2)]);
        }
    }
}

use std::collections::HashMap;

use rayon::prelude::*;

use super::paths::PathTable;
use super::window::WindowParams;
use super::{LipschitzCert, LipschitzScope, StoppingTime};
use crate::error::{Error, Result};
use crate::lattice::TreeModel;

/// Largest path count accepted by the all-pairs constructions.
pub const SANDWICH_PATH_CAP: usize = 4096;

pub(crate) fn check_path_cap(tree: &TreeModel) -> Result<()> {
    if tree.num_paths() > SANDWICH_PATH_CAP {
        return Err(Error::CapExceeded {
            what: "paths for all-pairs stopping-time construction".into(),
            needed: tree.num_paths() as u128,
            cap: SANDWICH_PATH_CAP as u128,
        });
    }
    Ok(())
}

/// Checks the ordering premise of [`sandwich_stopping_time`] on all path pairs.
///
/// For `i ∈ {1, 2}` and paths `ω, ω′` within `delta` of each other up to
/// `θ_{i+1}(ω)`, requires `θ_i(ω′) ≤ θ_{i+1}(ω)`. The first failing pair is
/// returned as [`Error::HypothesisFailed`].
pub fn check_sandwich_premise(
    tree: &TreeModel,
    theta: [&StoppingTime; 3],
    delta: f64,
) -> Result<()> {
    check_path_cap(tree)?;
    let g = tree.grid();
    let table = PathTable::new(tree);
    let real: Vec<Vec<f64>> = theta.iter().map(|t| t.real_or_grid(tree)).collect();
    let tol = g.time_tol();
    for order in 1..=2usize {
        let (early, late) = (&real[order - 1], &real[order]);
        let witness = (0..tree.num_paths()).into_par_iter().find_map_first(|base| {
            let upto = g.ceil_step(late[base]);
            let mut buf = Vec::new();
            for other in 0..tree.num_paths() {
                if early[other] <= late[base] + tol {
                    continue;
                }
                table.profile_into(base, other, upto, &mut buf);
                if buf[upto] <= delta {
                    return Some((base, other));
                }
            }
            None
        });
        if let Some((base, other)) = witness {
            return Err(Error::HypothesisFailed {
                order,
                base,
                other,
                delta,
                time: late[base],
                lhs: early[other],
                rhs: late[base],
            });
        }
    }
    Ok(())
}

/// Lipschitz stopping time squeezed between `θ₁` and `θ₃`.
///
/// After checking the premise, takes the maximum over all tree paths `ω_j`
/// of the tube-exit time around `ω_j` with lead `½·min θ₂`, horizon
/// `θ₂(ω_j)`, inner radius `delta − T/kappa` and outer radius `delta`.
/// Requires `kappa > T/delta` and `θ₂ > 0`.
pub fn sandwich_stopping_time(
    tree: &TreeModel,
    theta: [&StoppingTime; 3],
    delta: f64,
    kappa: f64,
) -> Result<StoppingTime> {
    let g = tree.grid();
    if !(delta > 0.0) {
        return Err(Error::BadDelta(delta));
    }
    if !(kappa * delta > g.horizon()) {
        return Err(Error::BadWindow(format!("kappa {kappa} must exceed T/delta = {}", g.horizon() / delta)));
    }
    check_sandwich_premise(tree, theta, delta)?;
    let mid = theta[1].real_or_grid(tree);
    let lead = 0.5 * mid.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(lead > 0.0) {
        return Err(Error::BadWindow("the middle time must be positive on every path".into()));
    }
    let inner = delta - g.horizon() / kappa;

    // The exit time around ω_j only depends on ω_j up to ⌈θ₂(ω_j)⌉.
    let mut refs: HashMap<(usize, u64), usize> = HashMap::new();
    for (j, &h) in mid.iter().enumerate() {
        let node = tree.path_node(j, g.ceil_step(h));
        refs.entry((node, h.to_bits())).or_insert(j);
    }
    let mut refs: Vec<(usize, WindowParams)> = refs
        .into_values()
        .map(|j| Ok((j, WindowParams::new(lead, mid[j], inner, delta)?)))
        .collect::<Result<_>>()?;
    refs.sort_by_key(|r| r.0);

    let table = PathTable::new(tree);
    let real: Vec<f64> = (0..tree.num_paths())
        .into_par_iter()
        .map(|p| {
            let mut buf = Vec::new();
            let mut best = f64::NEG_INFINITY;
            for (j, w) in &refs {
                table.profile_into(p, *j, w.reach(g), &mut buf);
                best = best.max(w.exit_time(g, &buf));
            }
            best
        })
        .collect();
    Ok(StoppingTime::from_real_times(tree, real).with_certificate(LipschitzCert { kappa, scope: LipschitzScope::Conditional }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{ControlSet, TimeGrid};

    fn tree() -> TreeModel {
        TreeModel::build(TimeGrid::new(1.0, 4).unwrap(), ControlSet::scalar(&[(0.0, 1.0), (0.5, 0.5)], 1.0).unwrap()).unwrap()
    }

    #[test]
    fn all_at_horizon() {
        let t = tree();
        let h = StoppingTime::deterministic(&t, 4);
        let wp = sandwich_stopping_time(&t, [&h, &h, &h], 0.5, 4.0).unwrap();
        assert!(wp.real_times().unwrap().iter().all(|&r| r == 1.0));
    }

    #[test]
    fn sandwich_of_hitting_times() {
        let t = tree();
        let field: Vec<f64> = (0..t.num_nodes()).map(|v| 1.0 - t.pos(v)[0]).collect();
        let th: Vec<StoppingTime> = [0.5, 0.25, 0.0].iter().map(|&l| StoppingTime::hitting(&t, &field, l)).collect();
        let delta = 0.2;
        let wp = sandwich_stopping_time(&t, [&th[0], &th[1], &th[2]], delta, 2.0 / delta).unwrap();
        for p in 0..t.num_paths() {
            let r = wp.real_time(&t, p);
            assert!(th[0].real_time(&t, p) <= r + 1e-12);
            assert!(r <= th[2].real_time(&t, p) + 1e-12);
            assert!(th[0].step(p) <= wp.step(p) && wp.step(p) <= th[2].step(p));
        }
    }

    #[test]
    fn premise_failure_has_witness() {
        let t = tree();
        let early = StoppingTime::deterministic(&t, 3);
        let late = StoppingTime::deterministic(&t, 2);
        let err = check_sandwich_premise(&t, [&early, &late, &late], 0.1).unwrap_err();
        match err {
            Error::HypothesisFailed { order, lhs, rhs, .. } => {
                assert_eq!(order, 1);
                assert!(lhs > rhs);
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn two_path_toy_matches_direct_max() {
        let t = TreeModel::build(TimeGrid::new(1.0, 1).unwrap(), ControlSet::scalar(&[(0.0, 1.0)], 1.0).unwrap()).unwrap();
        let th1 = StoppingTime::deterministic(&t, 0);
        let th2 = StoppingTime::deterministic(&t, 1);
        let (delta, kappa) = (1.0, 4.0);
        let wp = sandwich_stopping_time(&t, [&th1, &th2, &th2], delta, kappa).unwrap();
        // Paths end at ±1. Around the other path the exit is at 0; around itself
        // the distance stays 0 and the exit is the horizon.
        let inner = delta - 1.0 / kappa;
        let w = WindowParams::new(0.5, 1.0, inner, delta).unwrap();
        let g = t.grid();
        for p in 0..2 {
            let direct = (0..2).map(|j| w.exit_time(g, &PathTable::new(&t).profile(p, j))).fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(wp.real_time(&t, p), direct);
            assert_eq!(direct, 1.0);
        }
    }
}

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::paths::PathTable;
use super::{LipschitzScope, StoppingTime};
use crate::lattice::{TimeGrid, TreeModel};

/// Worst violations over the scanned pairs for one time representation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairCheck {
    pub global_violation: f64,
    pub global_worst: Option<(usize, usize)>,
    pub conditional_violation: f64,
    pub conditional_worst: Option<(usize, usize)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LipschitzVerdict {
    Pass,
    ConditionalPassGlobalFail,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipschitzReport {
    pub kappa: f64,
    pub mode: LipschitzScope,
    pub pairs_checked: usize,
    pub exhaustive: bool,
    /// Grid times with one step of slack.
    pub grid: PairCheck,
    /// Real-valued times without slack, when the rule keeps them.
    pub real: Option<PairCheck>,
    pub verdict: LipschitzVerdict,
    /// Verdict for the requested mode on grid times.
    pub pass: bool,
}

/// Smallest distance `‖ω₁ − ω₂‖_{0,t₀}` over the admissible `t₀` of the conditional statement.
///
/// Admissible are `t₀ ∈ [b, T]` and `t₀ ∈ [a, b)` with `t₀ ≥ a + κ‖ω₁ − ω₂‖_{0,t₀}`,
/// where `a ≤ b` are the two stopping values; the distance up to `t₀` is the
/// running maximum read at the grid step `⌈t₀⌉`.
fn conditional_distance(grid: &TimeGrid, profile: &[f64], a: f64, b: f64, kappa: f64) -> f64 {
    let tol = grid.time_tol();
    let at_b = profile[grid.ceil_step(b)];
    if profile[grid.ceil_step(a)] * kappa + a <= a + tol && a < b {
        return profile[grid.ceil_step(a)];
    }
    for m in 1..profile.len() {
        let (lo, hi) = (grid.time(m - 1), grid.time(m));
        if hi < a - tol {
            continue;
        }
        if lo >= b {
            break;
        }
        let start = (a + kappa * profile[m]).max(lo).max(a);
        if start <= hi.min(b) + tol && start < b {
            return profile[m].min(at_b);
        }
    }
    at_b
}

fn scan(tree: &TreeModel, times: &[f64], kappa: f64, slack: f64, pairs: &[(usize, usize)], table: &PathTable) -> PairCheck {
    let g = tree.grid();
    let pick = |a: (f64, Option<(usize, usize)>), b: (f64, Option<(usize, usize)>)| {
        if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
            b
        } else {
            a
        }
    };
    let ((gv, gw), (cv, cw)) = pairs
        .par_iter()
        .map(|&(p, q)| {
            let prof = table.profile(p, q);
            let diff = (times[p] - times[q]).abs();
            let global = diff - kappa * prof[prof.len() - 1] - slack;
            let (a, b) = (times[p].min(times[q]), times[p].max(times[q]));
            let cond = diff - kappa * conditional_distance(g, &prof, a, b, kappa) - slack;
            ((global, Some((p, q))), (cond, Some((p, q))))
        })
        .reduce(
            || ((f64::NEG_INFINITY, None), (f64::NEG_INFINITY, None)),
            |x, y| (pick(x.0, y.0), pick(x.1, y.1)),
        );
    PairCheck {
        global_violation: gv.max(0.0),
        global_worst: gw.filter(|_| gv > 0.0),
        conditional_violation: cv.max(0.0),
        conditional_worst: cw.filter(|_| cv > 0.0),
    }
}

/// Checks `|τ(ω₁) − τ(ω₂)| ≤ κ‖ω₁ − ω₂‖` over path pairs.
///
/// The global form uses the distance over the whole horizon. The conditional
/// form uses the distance up to the earliest admissible `t₀` (see
/// [`LipschitzScope::Conditional`]), which is the weakest right-hand side of
/// that statement. Grid times get one step of slack; real times get none.
/// All pairs are scanned when their number is within `budget`, otherwise a
/// seeded sample of `budget` pairs.
pub fn verify_lipschitz(
    tree: &TreeModel,
    tau: &StoppingTime,
    kappa: f64,
    mode: LipschitzScope,
    budget: usize,
    seed: u64,
) -> LipschitzReport {
    let paths = tree.num_paths();
    let total = paths * (paths - 1) / 2;
    let exhaustive = total <= budget;
    let pairs: Vec<(usize, usize)> = if exhaustive {
        (0..paths).flat_map(|p| (p + 1..paths).map(move |q| (p, q))).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..budget).map(|_| (rng.gen_range(0..paths), rng.gen_range(0..paths))).collect()
    };
    let table = PathTable::new(tree);
    let g = tree.grid();
    let grid_times: Vec<f64> = tau.steps().iter().map(|&s| g.time(s)).collect();
    let grid = scan(tree, &grid_times, kappa, g.dt(), &pairs, &table);
    let real = tau.real_times().map(|r| scan(tree, r, kappa, 0.0, &pairs, &table));
    let tol = 1e-12;
    let verdict = if grid.global_violation <= tol {
        LipschitzVerdict::Pass
    } else if grid.conditional_violation <= tol {
        LipschitzVerdict::ConditionalPassGlobalFail
    } else {
        LipschitzVerdict::Fail
    };
    let pass = match mode {
        LipschitzScope::GlobalT => verdict == LipschitzVerdict::Pass,
        LipschitzScope::Conditional => verdict != LipschitzVerdict::Fail,
    };
    LipschitzReport { kappa, mode, pairs_checked: pairs.len(), exhaustive, grid, real, verdict, pass }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::ControlSet;
    use crate::stoptimes::{lipschitz_window_time, WindowParams};

    fn tree() -> TreeModel {
        TreeModel::build(TimeGrid::new(1.0, 4).unwrap(), ControlSet::scalar(&[(0.0, 1.0), (0.5, 0.5)], 1.0).unwrap()).unwrap()
    }

    #[test]
    fn constant_time_passes_with_zero_kappa() {
        let t = tree();
        let r = verify_lipschitz(&t, &StoppingTime::deterministic(&t, 2), 0.0, LipschitzScope::GlobalT, 1 << 24, 0);
        assert!(r.pass && r.exhaustive);
        assert_eq!(r.verdict, LipschitzVerdict::Pass);
    }

    #[test]
    fn window_time_is_lipschitz_in_real_time() {
        let t = tree();
        let w = WindowParams::new(0.2, 1.0, 0.3, 0.9).unwrap();
        let z = lipschitz_window_time(&t, 5, w).unwrap();
        let r = verify_lipschitz(&t, &z, w.kappa(), LipschitzScope::GlobalT, 1 << 24, 0);
        assert!(r.pass);
        assert!(r.real.unwrap().global_violation <= 1e-12);
    }

    #[test]
    fn hitting_time_between_siblings_fails() {
        let t = TreeModel::build(TimeGrid::new(1.0, 4).unwrap(), ControlSet::scalar(&[(0.0, 0.02)], 1.0).unwrap()).unwrap();
        // Level exactly between the two first-step values: siblings 0.02 apart stop at 1/4 and at 1.
        let field: Vec<f64> = (0..t.num_nodes()).map(|v| if t.step(v) == 1 { t.pos(v)[0] } else { 1.0 }).collect();
        let st = StoppingTime::from_decisions(&t, |v| field[v] <= 0.0);
        let r = verify_lipschitz(&t, &st, 1.0, LipschitzScope::GlobalT, 1 << 24, 0);
        assert!(!r.pass);
        assert!(r.grid.global_worst.is_some());
    }

    #[test]
    fn conditional_distance_cases() {
        let g = TimeGrid::new(1.0, 4).unwrap();
        let prof = [0.0, 0.1, 0.1, 0.4, 0.4];
        // t₀ ≥ 0.25 + 1·0.1 is admissible inside (0.25, 0.5].
        assert_eq!(conditional_distance(&g, &prof, 0.25, 1.0, 1.0), 0.1);
        // With a large coefficient nothing before b qualifies.
        assert_eq!(conditional_distance(&g, &prof, 0.25, 0.6, 100.0), 0.4);
        assert_eq!(conditional_distance(&g, &prof, 0.5, 0.5, 1.0), 0.1);
    }
}

use serde::{Deserialize, Serialize};

use super::paths::PathTable;
use super::{LipschitzCert, LipschitzScope, StoppingTime};
use crate::error::{Error, Result};
use crate::lattice::{TimeGrid, TreeModel};

/// Parameters of the tube-exit time around a reference path.
///
/// The time is the first instant at which the running distance to the
/// reference reaches the line falling from `outer` at `lead` to `inner` at
/// `horizon`, capped at `horizon`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowParams {
    pub lead: f64,
    pub horizon: f64,
    pub inner: f64,
    pub outer: f64,
}

impl WindowParams {
    pub fn new(lead: f64, horizon: f64, inner: f64, outer: f64) -> Result<Self> {
        if !(lead >= 0.0 && lead < horizon) {
            return Err(Error::BadWindow(format!("need 0 ≤ lead < horizon, got lead {lead}, horizon {horizon}")));
        }
        if !(inner > 0.0 && inner < outer) {
            return Err(Error::BadWindow(format!("need 0 < inner < outer radius, got {inner} and {outer}")));
        }
        Ok(Self { lead, horizon, inner, outer })
    }

    /// Lipschitz coefficient `(horizon − lead)/(outer − inner)`.
    pub fn kappa(&self) -> f64 {
        (self.horizon - self.lead) / (self.outer - self.inner)
    }

    /// Exit time given the running distance `profile[m]` at each grid step.
    ///
    /// The distance is read as a left-continuous step function: on
    /// `(t_{m-1}, t_m]` it equals `profile[m]`.
    pub(crate) fn exit_time(&self, grid: &TimeGrid, profile: &[f64]) -> f64 {
        let kappa = self.kappa();
        for m in 1..profile.len() {
            let prev = grid.time(m - 1);
            if prev >= self.horizon {
                break;
            }
            let cross = kappa * (self.outer - profile[m]) + self.lead;
            if cross <= prev {
                return prev;
            }
            if cross <= grid.time(m).min(self.horizon) {
                return cross;
            }
        }
        self.horizon
    }

    /// Last grid step whose distance value can influence [`Self::exit_time`].
    pub(crate) fn reach(&self, grid: &TimeGrid) -> usize {
        grid.ceil_step(self.horizon)
    }
}

/// Exit time of every tree path from the tube around path `reference`.
///
/// Equals `horizon` on paths that stay within `inner` of the reference up to
/// `horizon`, and is at most `lead` on paths that are `outer` away by `lead`.
pub fn lipschitz_window_time(tree: &TreeModel, reference: usize, params: WindowParams) -> Result<StoppingTime> {
    let g = tree.grid();
    if params.horizon > g.horizon() + g.time_tol() {
        return Err(Error::BadWindow(format!("horizon {} beyond the grid horizon {}", params.horizon, g.horizon())));
    }
    if reference >= tree.num_paths() {
        return Err(Error::BadWindow(format!("reference path {reference} does not exist")));
    }
    let table = PathTable::new(tree);
    let reach = params.reach(g);
    let mut buf = Vec::new();
    let real = (0..tree.num_paths())
        .map(|p| {
            table.profile_into(p, reference, reach, &mut buf);
            params.exit_time(g, &buf)
        })
        .collect();
    Ok(StoppingTime::from_real_times(tree, real)
        .with_certificate(LipschitzCert { kappa: params.kappa(), scope: LipschitzScope::GlobalT }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::ControlSet;

    fn tree() -> TreeModel {
        TreeModel::build(TimeGrid::new(1.0, 4).unwrap(), ControlSet::scalar(&[(0.0, 0.5), (0.5, 1.0)], 1.0).unwrap()).unwrap()
    }

    #[test]
    fn bad_parameters() {
        assert!(WindowParams::new(0.5, 0.5, 0.1, 0.2).is_err());
        assert!(WindowParams::new(0.1, 0.5, 0.2, 0.2).is_err());
        assert!(WindowParams::new(0.0, 0.5, 0.1, 0.2).is_ok());
    }

    #[test]
    fn tube_guarantees_hold_on_every_path() {
        let t = tree();
        let table = PathTable::new(&t);
        for (lead, horizon, inner, outer) in [(0.25, 1.0, 0.3, 0.8), (0.1, 0.75, 0.2, 0.5), (0.0, 0.5, 0.1, 1.5)] {
            let w = WindowParams::new(lead, horizon, inner, outer).unwrap();
            for reference in [0, 17, t.num_paths() - 1] {
                let z = lipschitz_window_time(&t, reference, w).unwrap();
                for p in 0..t.num_paths() {
                    let prof = table.profile(p, reference);
                    let r = z.real_time(&t, p);
                    assert!((0.0..=horizon).contains(&r));
                    if prof[t.grid().ceil_step(horizon)] <= inner {
                        assert!((r - horizon).abs() < 1e-12);
                    }
                    if lead > 0.0 && prof[t.grid().ceil_step(lead)] >= outer {
                        assert!(r <= lead + 1e-12);
                    }
                }
                assert_eq!(z.real_time(&t, reference), horizon);
            }
        }
    }

    #[test]
    fn grid_rule_lags_by_at_most_one_step() {
        let t = tree();
        let g = t.grid();
        let z = lipschitz_window_time(&t, 3, WindowParams::new(0.2, 0.9, 0.2, 0.6).unwrap()).unwrap();
        for p in 0..t.num_paths() {
            let r = z.real_time(&t, p);
            assert!(g.ceil_step(r) <= z.step(p));
            assert!(g.time(z.step(p)) <= r + g.dt() + 1e-12);
        }
    }

    #[test]
    fn hand_computed_crossing() {
        let g = TimeGrid::new(1.0, 2).unwrap();
        let w = WindowParams::new(0.0, 1.0, 0.5, 1.0).unwrap();
        // kappa = 2; crossing solves t = 2(1 − d).
        assert!((w.exit_time(&g, &[0.0, 0.8, 0.8]) - 0.4).abs() < 1e-12);
        assert!((w.exit_time(&g, &[0.0, 0.0, 0.6]) - 0.8).abs() < 1e-12);
        assert_eq!(w.exit_time(&g, &[0.0, 0.0, 0.9]), 0.5);
        assert_eq!(w.exit_time(&g, &[0.0, 0.1, 0.3]), 1.0);
    }
}

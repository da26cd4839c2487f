use serde::{Deserialize, Serialize};

use crate::lattice::{ModulusHat, TreeModel};

/// Outcome of one bound check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LedgerStatus {
    /// Within the stated bounds.
    Pass,
    /// Within the stated bounds widened by the grid slack.
    PassWithSlack,
    Fail,
    /// Reported only; never fails a run.
    Diagnostic,
}

impl LedgerStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            LedgerStatus::Pass => "pass",
            LedgerStatus::PassWithSlack => "pass_with_slack",
            LedgerStatus::Fail => "fail",
            LedgerStatus::Diagnostic => "diagnostic",
        }
    }

    pub fn is_failure(&self) -> bool {
        *self == LedgerStatus::Fail
    }
}

/// Worst case over all nodes of a two-sided bound `lower ≤ D(node) ≤ upper`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorLedgerEntry {
    pub inequality: String,
    pub n: usize,
    pub k: Option<usize>,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub min_value: f64,
    pub max_value: f64,
    /// `max(D − upper, lower − D)` over nodes; nonpositive when the bound holds.
    pub excess: f64,
    pub grid_slack: f64,
    pub worst_node: Option<usize>,
    pub status: LedgerStatus,
}

/// Tolerance for floating-point noise in ledger comparisons.
pub const LEDGER_TOL: f64 = 1e-12;

impl ErrorLedgerEntry {
    /// Evaluates `D` at every node and grades it against `[lower, upper]`.
    #[allow(clippy::too_many_arguments)]
    pub fn evaluate(
        inequality: &str,
        n: usize,
        k: Option<usize>,
        lower: f64,
        upper: f64,
        grid_slack: f64,
        values: impl Iterator<Item = f64>,
        diagnostic: bool,
    ) -> Self {
        let mut min_value = f64::INFINITY;
        let mut max_value = f64::NEG_INFINITY;
        let mut excess = f64::NEG_INFINITY;
        let mut worst_node = None;
        for (node, d) in values.enumerate() {
            min_value = min_value.min(d);
            max_value = max_value.max(d);
            let e = (d - upper).max(lower - d);
            if e > excess {
                excess = e;
                worst_node = Some(node);
            }
        }
        let status = if diagnostic {
            LedgerStatus::Diagnostic
        } else if excess <= LEDGER_TOL {
            LedgerStatus::Pass
        } else if excess <= grid_slack + LEDGER_TOL {
            LedgerStatus::PassWithSlack
        } else {
            LedgerStatus::Fail
        };
        Self {
            inequality: inequality.to_string(),
            n,
            k,
            lower_bound: lower,
            upper_bound: upper,
            min_value,
            max_value,
            excess,
            grid_slack,
            worst_node,
            status,
        }
    }
}

/// Tail sum `ε_n = Σ_{i ≥ n} ρ̂(2T/(i+3))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailSum {
    pub n: usize,
    pub value: f64,
    /// Terms summed exactly (indices `n..=last_exact`).
    pub last_exact: usize,
    /// Integral bound used for the remaining terms.
    pub tail_bound: f64,
}

/// Computes `ε_n` for `n = 1..=n_max`.
///
/// Terms are summed exactly up to `i = max(10·n_max, first i with 2T/(i+3)`
/// below the small-argument threshold of `ρ̂`). Beyond it `ρ̂(x) = a·x^p`,
/// and the remainder is bounded by `a(2T)^p (I+3)^{1−p}/(p−1)`; when `p ≤ 1`
/// the series diverges and `ε_n = ∞`.
pub fn tail_sums(tree: &TreeModel, rho_hat: &ModulusHat, n_max: usize) -> Vec<TailSum> {
    let horizon = tree.grid().horizon();
    let (coef, power, threshold) = rho_hat.small_delta_law();
    let arg = |i: usize| 2.0 * horizon / (i as f64 + 3.0);
    let mut last = 10 * n_max.max(1);
    while arg(last) >= threshold {
        last += 1;
    }
    let tail = if coef == 0.0 {
        0.0
    } else if power <= 1.0 {
        f64::INFINITY
    } else {
        coef * (2.0 * horizon).powf(power) * (last as f64 + 3.0).powf(1.0 - power) / (power - 1.0)
    };
    // Suffix sums over the exact range, accumulated from the far end.
    let terms: Vec<f64> = (1..=last).map(|i| rho_hat.eval(arg(i))).collect();
    let mut suffix = vec![0.0; last + 2];
    for i in (1..=last).rev() {
        suffix[i] = suffix[i + 1] + terms[i - 1];
    }
    (1..=n_max).map(|n| TailSum { n, value: suffix[n] + tail, last_exact: last, tail_bound: tail }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{ControlSet, Modulus, TimeGrid};

    #[test]
    fn grading() {
        let e = ErrorLedgerEntry::evaluate("x", 1, None, -1.0, 1.0, 0.5, [0.0, 0.5, -0.9].into_iter(), false);
        assert_eq!(e.status, LedgerStatus::Pass);
        let e = ErrorLedgerEntry::evaluate("x", 1, None, -1.0, 1.0, 0.5, [1.2].into_iter(), false);
        assert_eq!(e.status, LedgerStatus::PassWithSlack);
        let e = ErrorLedgerEntry::evaluate("x", 1, None, -1.0, 1.0, 0.5, [0.0, -2.0].into_iter(), false);
        assert_eq!(e.status, LedgerStatus::Fail);
        assert_eq!(e.worst_node, Some(1));
    }

    #[test]
    fn tail_sums_decrease_and_diverge_for_small_power() {
        let t = TreeModel::build(TimeGrid::new(1.0, 2).unwrap(), ControlSet::scalar(&[(0.0, 1.0)], 1.0).unwrap()).unwrap();
        let hat = ModulusHat::analytic(Modulus::new(1.0, 6.0, 6.0).unwrap(), 1.0, 1);
        let eps = tail_sums(&t, &hat, 5);
        for w in eps.windows(2) {
            assert!(w[0].value > w[1].value && w[1].value > 0.0);
        }
        // Compare with a long direct sum.
        let direct: f64 = (1..200_000).map(|i| hat.eval(2.0 / (i as f64 + 3.0))).sum();
        let last_term = hat.eval(2.0 / (eps[0].last_exact as f64 + 3.0));
        assert!(eps[0].value >= direct && eps[0].value - direct <= last_term);
        let flat = ModulusHat::analytic(Modulus::lipschitz(1.0), 1.0, 1);
        assert!(tail_sums(&t, &flat, 2)[0].value.is_infinite());
    }
}

use serde::{Deserialize, Serialize};

use super::metric::calibrate_constant;
use super::Expr;
use crate::error::{Error, Result};
use crate::lattice::{Modulus, TreeModel};
use crate::stoptimes::StoppingTime;

/// Node budget for fitting a modulus constant by an all-pairs scan.
const CALIBRATION_NODE_CAP: usize = 20_000;

/// How the modulus of a functional is obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModulusSpec {
    /// Given explicitly.
    Explicit { c: f64, p1: f64, p2: f64 },
    /// `c·x` with `c` derived from the expression.
    #[default]
    Lipschitz,
    /// Exponents given; the smallest valid constant is fitted on the tree.
    Calibrated { p1: f64, p2: f64 },
}

/// Lower and upper payoff expressions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PayoffSpec {
    pub lower: Expr,
    pub upper: Expr,
    /// Uniform bound; computed from the tree when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    #[serde(default)]
    pub modulus: ModulusSpec,
}

/// Index expression whose first hitting of zero is the random maturity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexSpec {
    pub expr: Expr,
    #[serde(default)]
    pub modulus: ModulusSpec,
}

/// Payoff evaluated on a tree.
#[derive(Clone, Debug)]
pub struct Payoff {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub bound: f64,
    pub rho: Modulus,
}

/// Index evaluated on a tree.
#[derive(Clone, Debug)]
pub struct Index {
    pub field: Vec<f64>,
    pub x0: f64,
    pub rho: Modulus,
}

fn resolve_modulus(spec: &ModulusSpec, tree: &TreeModel, exprs: &[&Expr], fields: &[&[f64]], same_time: bool) -> Result<Modulus> {
    match spec {
        ModulusSpec::Explicit { c, p1, p2 } => Modulus::new(*c, *p1, *p2),
        ModulusSpec::Lipschitz => {
            let mut c: f64 = 0.0;
            for e in exprs {
                let l = if same_time { e.lipschitz_path() } else { e.lipschitz_time_path() };
                c = c.max(l.ok_or_else(|| {
                    Error::BadSpec("expression has no Lipschitz constant; use an explicit or calibrated modulus".into())
                })?);
            }
            Ok(Modulus::lipschitz(c))
        }
        ModulusSpec::Calibrated { p1, p2 } => {
            Modulus::new(1.0, *p1, *p2)?;
            if tree.num_nodes() > CALIBRATION_NODE_CAP {
                return Err(Error::CapExceeded {
                    what: "modulus calibration nodes".into(),
                    needed: tree.num_nodes() as u128,
                    cap: CALIBRATION_NODE_CAP as u128,
                });
            }
            let c = fields.iter().map(|f| calibrate_constant(tree, f, *p1, *p2, same_time)).fold(0.0, f64::max);
            if !c.is_finite() {
                return Err(Error::BadSpec("functional separates nodes at distance zero; no modulus exists".into()));
            }
            Modulus::new(c, *p1, *p2)
        }
    }
}

impl PayoffSpec {
    /// Evaluates the payoff and checks boundedness and the ordering `L ≤ U`, `L_T = U_T`.
    pub fn resolve(&self, tree: &TreeModel) -> Result<Payoff> {
        self.lower.validate(tree.dim())?;
        self.upper.validate(tree.dim())?;
        let lower = self.lower.field(tree);
        let upper = self.upper.field(tree);
        let observed = lower.iter().chain(&upper).fold(0.0f64, |a, x| a.max(x.abs()));
        let bound = match self.bound {
            Some(b) => {
                if !(b > 0.0) {
                    return Err(Error::BadSpec(format!("payoff bound must be > 0, got {b}")));
                }
                if observed > b + 1e-12 {
                    return Err(Error::BadSpec(format!("payoff reaches {observed}, above the declared bound {b}")));
                }
                b
            }
            None => observed.max(f64::MIN_POSITIVE),
        };
        for node in 0..tree.num_nodes() {
            if tree.is_terminal(node) {
                if (lower[node] - upper[node]).abs() > 1e-12 {
                    return Err(Error::BadSpec(format!(
                        "lower and upper payoffs differ at the horizon (node {node}: {} vs {})",
                        lower[node], upper[node]
                    )));
                }
            } else if lower[node] > upper[node] + 1e-12 {
                return Err(Error::BadSpec(format!(
                    "lower payoff exceeds upper payoff at node {node}: {} > {}",
                    lower[node], upper[node]
                )));
            }
        }
        let rho = resolve_modulus(&self.modulus, tree, &[&self.lower, &self.upper], &[&lower, &upper], false)?;
        Ok(Payoff { lower, upper, bound, rho })
    }
}

impl IndexSpec {
    pub fn resolve(&self, tree: &TreeModel) -> Result<Index> {
        self.expr.validate(tree.dim())?;
        let field = self.expr.field(tree);
        let x0 = field[0];
        if !(x0 > 0.0) {
            return Err(Error::BadSpec(format!("index must start positive, got {x0}")));
        }
        let rho = resolve_modulus(&self.modulus, tree, &[&self.expr], &[&field], true)?;
        Ok(Index { field, x0, rho })
    }
}

/// First grid step with index `≤ 0`, else the horizon.
pub fn tau0(tree: &TreeModel, index: &Index) -> StoppingTime {
    StoppingTime::hitting(tree, &index.field, 0.0)
}

/// `⌈log₂ m⌉` for `m ≥ 1`.
pub(crate) fn ceil_log2(m: usize) -> usize {
    let mut l = 0;
    while (1usize << l) < m {
        l += 1;
    }
    l
}

/// Level `(⌈log₂(n+2)⌉ + ⌊1/X₀⌋ − 1)^{-1}` used by [`tau_n`].
pub fn tau_n_level(x0: f64, n: usize) -> f64 {
    let l = ceil_log2(n + 2);
    1.0 / (l as f64 + (1.0 / x0).floor() - 1.0)
}

/// First grid step at which the index is at or below [`tau_n_level`].
pub fn tau_n(tree: &TreeModel, index: &Index, n: usize) -> StoppingTime {
    StoppingTime::hitting(tree, &index.field, tau_n_level(index.x0, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{ControlSet, TimeGrid};

    fn tree(t: f64, n: usize) -> TreeModel {
        TreeModel::build(TimeGrid::new(t, n).unwrap(), ControlSet::scalar(&[(0.0, 1.0), (0.4, 0.5)], 1.0).unwrap()).unwrap()
    }

    fn index(expr: Expr, t: &TreeModel) -> Index {
        IndexSpec { expr, modulus: ModulusSpec::Lipschitz }.resolve(t).unwrap()
    }

    #[test]
    fn constant_index_never_hits() {
        let t = tree(1.0, 3);
        let idx = index(Expr::constant(1.0), &t);
        assert!(tau0(&t, &idx).steps().iter().all(|&s| s == 3));
        assert_eq!(idx.rho.c, 0.0);
    }

    #[test]
    fn decreasing_index_hits_on_schedule() {
        let t = tree(1.0, 4);
        let idx = index(Expr::sum(vec![Expr::constant(0.5), Expr::neg(Expr::Time)]), &t);
        assert!(tau0(&t, &idx).steps().iter().all(|&s| s == 2));
    }

    #[test]
    fn level_formula() {
        assert_eq!(tau_n_level(1.0, 1), 0.5);
        assert_eq!(tau_n_level(1.0, 2), 0.5);
        assert_eq!(tau_n_level(1.0, 3), 1.0 / 3.0);
        assert_eq!(tau_n_level(0.3, 1), 1.0 / 4.0);
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(5), 3);
        assert_eq!(ceil_log2(8), 3);
    }

    #[test]
    fn tau_n_is_monotone_and_below_tau0() {
        let t = tree(1.0, 4);
        let idx = index(Expr::sum(vec![Expr::constant(1.0), Expr::coord(0)]), &t);
        let t0 = tau0(&t, &idx);
        let mut prev = tau_n(&t, &idx, 1);
        for n in 2..12 {
            let cur = tau_n(&t, &idx, n);
            assert!(prev.le(&cur));
            assert!(cur.le(&t0));
            prev = cur;
        }
    }

    #[test]
    fn payoff_ordering_is_enforced() {
        let t = tree(1.0, 2);
        let bad = PayoffSpec { lower: Expr::constant(1.0), upper: Expr::constant(0.0), bound: None, modulus: ModulusSpec::Lipschitz };
        assert!(bad.resolve(&t).is_err());
        let patched = PayoffSpec {
            lower: Expr::at_horizon(Expr::constant(1.0), Expr::constant(0.0)),
            upper: Expr::constant(1.0),
            bound: Some(1.0),
            modulus: ModulusSpec::Calibrated { p1: 1.0, p2: 1.0 },
        };
        let p = patched.resolve(&t).unwrap();
        assert!(p.rho.c > 0.0);
        let lip = PayoffSpec { modulus: ModulusSpec::Lipschitz, ..patched };
        assert!(lip.resolve(&t).is_err());
    }

    #[test]
    fn negative_start_is_rejected() {
        let t = tree(1.0, 2);
        let spec = IndexSpec { expr: Expr::constant(-1.0), modulus: ModulusSpec::Lipschitz };
        assert!(spec.resolve(&t).is_err());
    }
}

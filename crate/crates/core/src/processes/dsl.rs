//! Expression language for path functionals.
//!
//! Every expression is a JSON object `{"kind": ..., "params": {...}}` and is
//! evaluated at a node, i.e. at a grid time together with the path history up
//! to that time. See `docs/dsl.md` at the repository root for the grammar.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::TreeModel;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum Expr {
    /// A constant.
    Const { value: f64 },
    /// Current real time `t`.
    Time,
    /// Coordinate `index` of the current position.
    Coord { index: usize },
    /// Euclidean norm of the current position.
    Norm,
    /// Running maximum of one coordinate over `[0, t]`.
    RunMax { index: usize },
    /// Running minimum of one coordinate over `[0, t]`.
    RunMin { index: usize },
    /// `max_{r ≤ t} |B_r − (offset + slope·r)|`, the running sup-norm distance to a straight reference path.
    SupDist { offset: Vec<f64>, slope: Vec<f64> },
    /// Euclidean distance from the current position to a circular arc (two dimensions only).
    ArcDist {
        #[serde(default = "one")]
        radius: f64,
        #[serde(default)]
        start: f64,
        end: f64,
    },
    Abs { arg: Box<Expr> },
    Neg { arg: Box<Expr> },
    Scale { factor: f64, arg: Box<Expr> },
    Sum { args: Vec<Expr> },
    Min { args: Vec<Expr> },
    Max { args: Vec<Expr> },
    /// `+1`, `0` or `−1`; not continuous.
    Sign { arg: Box<Expr> },
    /// `at` on the last grid time and `before` elsewhere.
    AtHorizon { at: Box<Expr>, before: Box<Expr> },
}

fn one() -> f64 {
    1.0
}

/// Evaluation context: the history `B_0, …, B_t` and the grid spacing.
pub struct PathView<'a> {
    pub history: &'a [&'a [f64]],
    pub dt: f64,
    pub last_step: usize,
}

impl PathView<'_> {
    fn step(&self) -> usize {
        self.history.len() - 1
    }

    fn now(&self) -> &[f64] {
        self.history[self.step()]
    }

    fn time(&self) -> f64 {
        self.step() as f64 * self.dt
    }
}

impl Expr {
    pub fn constant(value: f64) -> Self {
        Expr::Const { value }
    }

    pub fn coord(index: usize) -> Self {
        Expr::Coord { index }
    }

    pub fn abs(arg: Expr) -> Self {
        Expr::Abs { arg: Box::new(arg) }
    }

    pub fn neg(arg: Expr) -> Self {
        Expr::Neg { arg: Box::new(arg) }
    }

    pub fn scale(factor: f64, arg: Expr) -> Self {
        Expr::Scale { factor, arg: Box::new(arg) }
    }

    pub fn sum(args: Vec<Expr>) -> Self {
        Expr::Sum { args }
    }

    pub fn min(args: Vec<Expr>) -> Self {
        Expr::Min { args }
    }

    pub fn max(args: Vec<Expr>) -> Self {
        Expr::Max { args }
    }

    pub fn at_horizon(at: Expr, before: Expr) -> Self {
        Expr::AtHorizon { at: Box::new(at), before: Box::new(before) }
    }

    /// `1 + B² + |B¹|` in zero-based coordinates: `1 + B[1] + |B[0]|`.
    pub fn wedge_index() -> Self {
        Expr::sum(vec![Expr::constant(1.0), Expr::coord(1), Expr::abs(Expr::coord(0))])
    }

    /// `½ − dist(B, Γ)` with Γ the unit-circle arc from angle 0 to 3π/2.
    pub fn three_quarter_circle_index() -> Self {
        Expr::sum(vec![
            Expr::constant(0.5),
            Expr::neg(Expr::ArcDist { radius: 1.0, start: 0.0, end: 1.5 * PI }),
        ])
    }

    /// Rejects expressions that reference coordinates outside `dim`.
    pub fn validate(&self, dim: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::BadSpec(msg));
        match self {
            Expr::Const { value } if !value.is_finite() => bad(format!("constant {value} is not finite")),
            Expr::Coord { index } | Expr::RunMax { index } | Expr::RunMin { index } if *index >= dim => {
                bad(format!("coordinate {index} out of range for dimension {dim}"))
            }
            Expr::SupDist { offset, slope } if offset.len() != dim || slope.len() != dim => {
                bad(format!("sup_dist offset and slope need length {dim}"))
            }
            Expr::ArcDist { radius, start, end } => {
                if dim != 2 {
                    bad("arc_dist needs two dimensions".into())
                } else if !(*radius > 0.0) || !(end > start) || end - start > 2.0 * PI + 1e-12 {
                    bad(format!("arc_dist needs radius > 0 and start < end ≤ start + 2π, got {radius}, {start}, {end}"))
                } else {
                    Ok(())
                }
            }
            Expr::Abs { arg } | Expr::Neg { arg } | Expr::Sign { arg } => arg.validate(dim),
            Expr::Scale { factor, arg } => {
                if !factor.is_finite() {
                    return bad(format!("scale factor {factor} is not finite"));
                }
                arg.validate(dim)
            }
            Expr::Sum { args } | Expr::Min { args } | Expr::Max { args } => {
                if args.is_empty() {
                    return bad("sum/min/max need at least one argument".into());
                }
                args.iter().try_for_each(|a| a.validate(dim))
            }
            Expr::AtHorizon { at, before } => {
                at.validate(dim)?;
                before.validate(dim)
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, view: &PathView<'_>) -> f64 {
        match self {
            Expr::Const { value } => *value,
            Expr::Time => view.time(),
            Expr::Coord { index } => view.now()[*index],
            Expr::Norm => view.now().iter().map(|x| x * x).sum::<f64>().sqrt(),
            Expr::RunMax { index } => view.history.iter().map(|x| x[*index]).fold(f64::NEG_INFINITY, f64::max),
            Expr::RunMin { index } => view.history.iter().map(|x| x[*index]).fold(f64::INFINITY, f64::min),
            Expr::SupDist { offset, slope } => view
                .history
                .iter()
                .enumerate()
                .map(|(m, x)| {
                    let r = m as f64 * view.dt;
                    x.iter()
                        .zip(offset.iter().zip(slope))
                        .map(|(xi, (o, s))| (xi - o - s * r).powi(2))
                        .sum::<f64>()
                        .sqrt()
                })
                .fold(0.0, f64::max),
            Expr::ArcDist { radius, start, end } => arc_distance(view.now(), *radius, *start, *end),
            Expr::Abs { arg } => arg.eval(view).abs(),
            Expr::Neg { arg } => -arg.eval(view),
            Expr::Scale { factor, arg } => factor * arg.eval(view),
            Expr::Sum { args } => args.iter().map(|a| a.eval(view)).sum(),
            Expr::Min { args } => args.iter().map(|a| a.eval(view)).fold(f64::INFINITY, f64::min),
            Expr::Max { args } => args.iter().map(|a| a.eval(view)).fold(f64::NEG_INFINITY, f64::max),
            Expr::Sign { arg } => {
                let x = arg.eval(view);
                if x > 0.0 {
                    1.0
                } else if x < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            Expr::AtHorizon { at, before } => {
                if view.step() == view.last_step {
                    at.eval(view)
                } else {
                    before.eval(view)
                }
            }
        }
    }

    /// Evaluates at every node of the tree.
    pub fn field(&self, tree: &TreeModel) -> Vec<f64> {
        use rayon::prelude::*;
        let dt = tree.grid().dt();
        let last = tree.depth();
        (0..tree.num_nodes())
            .into_par_iter()
            .map(|node| {
                let hist = tree.history(node);
                let pts: Vec<&[f64]> = hist.iter().map(|&h| tree.pos(h)).collect();
                self.eval(&PathView { history: &pts, dt, last_step: last })
            })
            .collect()
    }

    /// Lipschitz constant with respect to `|t₁ − t₂| + ‖ω₁(·∧t₁) − ω₂(·∧t₂)‖`, if one is known.
    pub fn lipschitz_time_path(&self) -> Option<f64> {
        self.lipschitz(true)
    }

    /// Lipschitz constant with respect to `‖ω₁ − ω₂‖_{0,t}` at a common time, if one is known.
    pub fn lipschitz_path(&self) -> Option<f64> {
        self.lipschitz(false)
    }

    fn lipschitz(&self, with_time: bool) -> Option<f64> {
        match self {
            Expr::Const { .. } => Some(0.0),
            Expr::Time => Some(if with_time { 1.0 } else { 0.0 }),
            Expr::Coord { .. } | Expr::Norm | Expr::RunMax { .. } | Expr::RunMin { .. } | Expr::ArcDist { .. } => {
                Some(1.0)
            }
            Expr::SupDist { slope, .. } => {
                let s = slope.iter().map(|x| x * x).sum::<f64>().sqrt();
                Some(if with_time { 1f64.max(s) } else { 1.0 })
            }
            Expr::Abs { arg } | Expr::Neg { arg } => arg.lipschitz(with_time),
            Expr::Scale { factor, arg } => arg.lipschitz(with_time).map(|l| l * factor.abs()),
            Expr::Sum { args } => args.iter().map(|a| a.lipschitz(with_time)).sum(),
            Expr::Min { args } | Expr::Max { args } => {
                args.iter().map(|a| a.lipschitz(with_time)).try_fold(0.0, |acc, l| l.map(|l| f64::max(acc, l)))
            }
            Expr::Sign { .. } | Expr::AtHorizon { .. } => None,
        }
    }
}

/// Distance from `x ∈ ℝ²` to `{(r cos θ, r sin θ) : start ≤ θ ≤ end}`.
pub fn arc_distance(x: &[f64], radius: f64, start: f64, end: f64) -> f64 {
    let (a, b) = (x[0], x[1]);
    let rho = (a * a + b * b).sqrt();
    let endpoint = |theta: f64| ((a - radius * theta.cos()).powi(2) + (b - radius * theta.sin()).powi(2)).sqrt();
    let to_ends = endpoint(start).min(endpoint(end));
    if rho == 0.0 {
        return radius;
    }
    let mut phi = b.atan2(a);
    while phi < start {
        phi += 2.0 * PI;
    }
    while phi >= start + 2.0 * PI {
        phi -= 2.0 * PI;
    }
    if phi <= end {
        (rho - radius).abs().min(to_ends)
    } else {
        to_ends
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn view<'a>(h: &'a [&'a [f64]], dt: f64) -> PathView<'a> {
        PathView { history: h, dt, last_step: 10 }
    }

    #[test]
    fn json_round_trip() {
        let e = Expr::three_quarter_circle_index();
        let s = serde_json::to_string(&e).unwrap();
        assert!(s.contains("\"kind\":\"sum\""));
        let back: Expr = serde_json::from_str(&s).unwrap();
        assert_eq!(back, e);
        let t: Expr = serde_json::from_str(r#"{"kind":"time"}"#).unwrap();
        assert_eq!(t, Expr::Time);
    }

    #[test]
    fn wedge_index_value() {
        let p0 = [0.0, 0.0];
        let p1 = [-0.5, -2.0];
        let h: [&[f64]; 2] = [&p0, &p1];
        assert_eq!(Expr::wedge_index().eval(&view(&h, 0.5)), 1.0 - 2.0 + 0.5);
        assert_eq!(Expr::wedge_index().lipschitz_path(), Some(2.0));
    }

    #[test]
    fn arc_distance_cases() {
        let end = 1.5 * PI;
        assert_eq!(arc_distance(&[0.0, 0.0], 1.0, 0.0, end), 1.0);
        assert!((arc_distance(&[2.0, 0.0], 1.0, 0.0, end) - 1.0).abs() < 1e-15);
        assert!((arc_distance(&[0.0, 0.5], 1.0, 0.0, end) - 0.5).abs() < 1e-15);
        // Fourth quadrant lies in the gap: nearest points are the endpoints (1, 0) and (0, −1).
        let d = arc_distance(&[0.7, -0.7], 1.0, 0.0, end);
        let expect = ((0.7f64 - 1.0).powi(2) + 0.49).sqrt();
        assert!((d - expect).abs() < 1e-12);
    }

    #[test]
    fn running_features() {
        let pts = [[0.0], [1.0], [-0.5], [0.25]];
        let h: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        let v = view(&h, 0.25);
        assert_eq!(Expr::RunMax { index: 0 }.eval(&v), 1.0);
        assert_eq!(Expr::RunMin { index: 0 }.eval(&v), -0.5);
        assert_eq!(Expr::Time.eval(&v), 0.75);
        let sd = Expr::SupDist { offset: vec![0.0], slope: vec![1.0] };
        assert!((sd.eval(&v) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn validation() {
        assert!(Expr::coord(1).validate(1).is_err());
        assert!(Expr::three_quarter_circle_index().validate(1).is_err());
        assert!(Expr::sum(vec![]).validate(1).is_err());
        assert!(Expr::wedge_index().validate(2).is_ok());
    }

    #[test]
    fn sign_has_no_lipschitz_constant() {
        assert_eq!(Expr::Sign { arg: Box::new(Expr::coord(0)) }.lipschitz_time_path(), None);
        assert_eq!(Expr::min(vec![Expr::constant(2.0), Expr::Norm]).lipschitz_time_path(), Some(1.0));
    }
}

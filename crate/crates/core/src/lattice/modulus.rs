//! Moduli of continuity and their expectation-lifted companions.
//!
//! A base modulus has the form `ρ(x) = c·(x^{p₁} ∨ x^{p₂})`. Its companion
//! `ρ̂(δ)` must dominate
//!
//! ```text
//! sup over controls and stopping rules ζ of  E[ ρ(δ + max_{r ∈ [ζ, ζ+δ]} |B_r − B_ζ|) ]
//! ```
//!
//! Three realisations are provided:
//!
//! * analytic: `Ĉ·(δ^{p₁/2} ∨ δ^{p₂})` with an explicit constant (see [`analytic_chat`]),
//!   valid for every tree whose controls respect the bound `ell`;
//! * calibrated: the same shape with the smallest constant that dominates the
//!   exact supremum on one given tree for every `δ > 0`;
//! * exact: the supremum itself, computed on the tree by dynamic programming.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::tree::dist;
use super::TreeModel;
use crate::error::{Error, Result};

/// Budget on `nodes × branching^window` for the exact supremum.
const WINDOW_WORK_CAP: u128 = 200_000_000;

/// `ρ(x) = c·(x^{p₁} ∨ x^{p₂})`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Modulus {
    pub c: f64,
    pub p1: f64,
    pub p2: f64,
}

impl Modulus {
    pub fn new(c: f64, p1: f64, p2: f64) -> Result<Self> {
        let m = Self { c, p1, p2 };
        m.validate()?;
        Ok(m)
    }

    /// `ρ(x) = c·x`.
    pub fn lipschitz(c: f64) -> Self {
        Self { c, p1: 1.0, p2: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c.is_finite() && self.c >= 0.0) {
            return Err(Error::BadSpec(format!("modulus constant must be finite and ≥ 0, got {}", self.c)));
        }
        if !(self.p1 > 0.0 && self.p1 <= self.p2 && self.p2.is_finite()) {
            return Err(Error::BadSpec(format!(
                "modulus exponents need 0 < p1 ≤ p2, got p1 = {}, p2 = {}",
                self.p1, self.p2
            )));
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 || self.c == 0.0 {
            return 0.0;
        }
        self.c * x.powf(self.p1).max(x.powf(self.p2))
    }

    /// Largest `x` with `ρ(x) ≤ bound`, in closed form.
    pub fn largest_arg_below(&self, bound: f64) -> f64 {
        if self.c == 0.0 {
            return f64::INFINITY;
        }
        if bound <= 0.0 {
            return 0.0;
        }
        let y = bound / self.c;
        y.powf(1.0 / self.p1).min(y.powf(1.0 / self.p2))
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}·(x^{} ∨ x^{})", self.c, self.p1, self.p2)
    }
}

/// `δ^{p₁/2} ∨ δ^{p₂}`.
pub(crate) fn hat_shape(base: &Modulus, delta: f64) -> f64 {
    if delta <= 0.0 {
        return 0.0;
    }
    delta.powf(base.p1 / 2.0).max(delta.powf(base.p2))
}

/// Explicit constant of the analytic companion.
///
/// With `a = 1 + √d·ℓ` (Euclidean drift bound over a unit window plus one) and
/// `K_q = max(2, q)^q` (Doob's maximal inequality combined with Burkholder's
/// square-function inequality for a martingale whose quadratic variation over
/// a window of length δ is at most `2ℓδ`), the bound
/// `E[(aδ + η)^p] ≤ A_p δ^p + B_p δ^{p/2}` holds with
///
/// ```text
/// A_p = c_p·a^p·(1 + 2√(2ℓ)),   B_p = c_p·(1 + K_{p+1}·(2ℓ)^{(p+1)/2}),   c_p = 1 ∨ 2^{p−1},
/// ```
///
/// obtained by splitting on `{η < √δ}`. Summing over `p ∈ {p₁, p₂}` gives
/// `Ĉ = c·Σ (A_p + B_p)`.
pub fn analytic_chat(base: &Modulus, ell: f64, dim: usize) -> f64 {
    let a = 1.0 + (dim as f64).sqrt() * ell;
    let k = |q: f64| 2f64.max(q).powf(q);
    let cp = |p: f64| 1f64.max(2f64.powf(p - 1.0));
    let term = |p: f64| {
        let aa = cp(p) * a.powf(p) * (1.0 + 2.0 * (2.0 * ell).sqrt());
        let bb = cp(p) * (1.0 + k(p + 1.0) * (2.0 * ell).powf((p + 1.0) / 2.0));
        aa + bb
    };
    base.c * (term(base.p1) + term(base.p2))
}

/// `Ĉ·(δ^{p₁/2} ∨ δ^{p₂})` with the analytic constant.
pub fn rho_hat_analytic(base: &Modulus, ell: f64, dim: usize, delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::BadDelta(delta));
    }
    Ok(analytic_chat(base, ell, dim) * hat_shape(base, delta))
}

/// Exact supremum on the tree with a window of `window_steps` steps and
/// `arg` in place of `δ` inside `ρ`.
pub(crate) fn window_sup(tree: &TreeModel, base: &Modulus, window_steps: usize, arg: f64) -> Result<f64> {
    let n = tree.depth();
    let m = window_steps.min(n);
    let work = (tree.num_nodes() as u128).saturating_mul((tree.branching() as u128).saturating_pow(m as u32));
    if work > WINDOW_WORK_CAP {
        return Err(Error::CapExceeded { what: "window supremum work".into(), needed: work, cap: WINDOW_WORK_CAP });
    }

    fn inner(tree: &TreeModel, base: &Modulus, node: usize, origin: &[f64], left: usize, cur: f64, arg: f64) -> f64 {
        if left == 0 || tree.is_terminal(node) {
            return base.eval(arg + cur);
        }
        let mut memo: [Option<f64>; 16] = [None; 16];
        let first = tree.children(node).start;
        let mut eval_child = |child: usize| -> f64 {
            let slot = child - first;
            if slot < memo.len() {
                if let Some(x) = memo[slot] {
                    return x;
                }
            }
            let r = cur.max(dist(tree.pos(child), origin));
            let x = inner(tree, base, child, origin, left - 1, r, arg);
            if slot < memo.len() {
                memo[slot] = Some(x);
            }
            x
        };
        let mut best = f64::NEG_INFINITY;
        for c in 0..tree.num_controls() {
            let (u, d) = tree.branch_pair(node, c);
            let x = 0.5 * (eval_child(u) + eval_child(d));
            if x > best {
                best = x;
            }
        }
        best
    }

    let stop_value: Vec<f64> = {
        use rayon::prelude::*;
        (0..tree.num_nodes())
            .into_par_iter()
            .map(|u| inner(tree, base, u, tree.pos(u), m, 0.0, arg))
            .collect()
    };
    let mut w = stop_value.clone();
    for lvl in (0..n).rev() {
        for node in tree.level(lvl) {
            let cont = super::one_step_sup(tree, node, &w);
            w[node] = stop_value[node].max(cont);
        }
    }
    Ok(w[0])
}

/// Exact left-hand side for a window of length `delta`.
fn exact_lhs(tree: &TreeModel, base: &Modulus, delta: f64) -> Result<f64> {
    window_sup(tree, base, tree.grid().window_steps(delta), delta)
}

/// Smallest `Ĉ` with `Ĉ·(δ^{p₁/2} ∨ δ^{p₂})` above the exact supremum for all `δ > 0`.
///
/// On `[m·dt, (m+1)·dt)` the window holds `m` steps, so the supremum is at most
/// its value with argument `(m+1)·dt` while the shape is at least its value at
/// `m·dt`. Below `dt` the supremum is `ρ(δ)` itself, dominated by `c` times the
/// shape. Beyond `T` the window is saturated and the ratio is largest at
/// `max(T, 1)` for the numerator and `T` for the shape.
fn calibrate_chat(tree: &TreeModel, base: &Modulus) -> Result<f64> {
    let g = tree.grid();
    let dt = g.dt();
    let t = g.horizon();
    let n = g.steps();
    let mut chat = base.c;
    for m in 1..n {
        let lhs = window_sup(tree, base, m, (m + 1) as f64 * dt)?;
        chat = chat.max(lhs / hat_shape(base, m as f64 * dt));
    }
    let lhs = window_sup(tree, base, n, t.max(1.0))?;
    chat = chat.max(lhs / hat_shape(base, t));
    Ok(chat)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HatMode {
    Analytic,
    Exhaustive,
}

struct ExactTable {
    tree: Arc<TreeModel>,
    memo: Mutex<HashMap<u64, f64>>,
}

/// Companion modulus `ρ̂`.
#[derive(Clone)]
pub struct ModulusHat {
    base: Modulus,
    chat: f64,
    mode: HatMode,
    exact: Option<Arc<ExactTable>>,
    dt: Option<f64>,
}

impl fmt::Debug for ModulusHat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModulusHat")
            .field("base", &self.base)
            .field("chat", &self.chat)
            .field("mode", &self.mode)
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

impl ModulusHat {
    /// Tree-independent companion with the explicit constant.
    pub fn analytic(base: Modulus, ell: f64, dim: usize) -> Self {
        Self { base, chat: analytic_chat(&base, ell, dim), mode: HatMode::Analytic, exact: None, dt: None }
    }

    /// Parametric companion with the constant calibrated on `tree`.
    pub fn calibrated(tree: &TreeModel, base: Modulus) -> Result<Self> {
        let chat = calibrate_chat(tree, &base)?;
        Ok(Self { base, chat, mode: HatMode::Exhaustive, exact: None, dt: Some(tree.grid().dt()) })
    }

    /// Companion equal to the exact supremum on `tree`.
    ///
    /// [`Self::chat`] still reports the calibrated constant.
    pub fn exact(tree: Arc<TreeModel>, base: Modulus) -> Result<Self> {
        let chat = calibrate_chat(&tree, &base)?;
        let dt = tree.grid().dt();
        Ok(Self {
            base,
            chat,
            mode: HatMode::Exhaustive,
            exact: Some(Arc::new(ExactTable { tree, memo: Mutex::new(HashMap::new()) })),
            dt: Some(dt),
        })
    }

    pub fn base(&self) -> &Modulus {
        &self.base
    }

    pub fn chat(&self) -> f64 {
        self.chat
    }

    pub fn mode(&self) -> HatMode {
        self.mode
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    /// `p̂₁ = p₁/2`.
    pub fn p_hat1(&self) -> f64 {
        self.base.p1 / 2.0
    }

    /// `p̂₂ = p₂`.
    pub fn p_hat2(&self) -> f64 {
        self.base.p2
    }

    /// Parametric value `Ĉ·(δ^{p₁/2} ∨ δ^{p₂})`.
    pub fn parametric(&self, delta: f64) -> f64 {
        self.chat * hat_shape(&self.base, delta)
    }

    pub fn eval(&self, delta: f64) -> f64 {
        if delta <= 0.0 {
            return 0.0;
        }
        match &self.exact {
            None => self.parametric(delta),
            Some(table) => {
                let key = delta.to_bits();
                if let Some(v) = table.memo.lock().expect("memo lock").get(&key) {
                    return *v;
                }
                let v = exact_lhs(&table.tree, &self.base, delta).unwrap_or_else(|_| self.parametric(delta));
                table.memo.lock().expect("memo lock").insert(key, v);
                v
            }
        }
    }

    /// `(coefficient, power, threshold)` with `ρ̂(δ) = coefficient·δ^power` for `0 < δ < threshold`.
    pub fn small_delta_law(&self) -> (f64, f64, f64) {
        match (&self.exact, self.dt) {
            (Some(_), Some(dt)) => (self.base.c, self.base.p1, dt.min(1.0)),
            _ => (self.chat, self.base.p1 / 2.0, 1.0),
        }
    }
}

/// Outcome of [`verify_modulus_bound`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusReport {
    pub delta: f64,
    pub lhs: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Computes the exact supremum for window length `delta` and compares it with `rho_hat_value`.
pub fn verify_modulus_bound(tree: &TreeModel, base: &Modulus, delta: f64, rho_hat_value: f64) -> Result<ModulusReport> {
    if !(delta > 0.0) {
        return Err(Error::BadDelta(delta));
    }
    let lhs = exact_lhs(tree, base, delta)?;
    Ok(ModulusReport { delta, lhs, bound: rho_hat_value, pass: lhs <= rho_hat_value + 1e-12 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{ControlSet, TimeGrid};

    fn tree(t: f64, n: usize, pairs: &[(f64, f64)]) -> TreeModel {
        TreeModel::build(TimeGrid::new(t, n).unwrap(), ControlSet::scalar(pairs, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn one_step_identity_modulus() {
        let t = tree(1.0, 1, &[(0.0, 1.0)]);
        let r = verify_modulus_bound(&t, &Modulus::lipschitz(1.0), 1.0, 10.0).unwrap();
        assert!((r.lhs - 2.0).abs() < 1e-15);
        assert!(r.pass);
    }

    #[test]
    fn zero_modulus_gives_zero() {
        let t = tree(1.0, 3, &[(0.3, 1.0), (-0.3, 0.5)]);
        let r = verify_modulus_bound(&t, &Modulus::lipschitz(0.0), 0.7, 0.0).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert!(r.pass);
    }

    #[test]
    fn identity_modulus_at_one_is_the_constant() {
        let base = Modulus::lipschitz(1.0);
        let chat = analytic_chat(&base, 1.0, 1);
        assert_eq!(rho_hat_analytic(&base, 1.0, 1, 1.0).unwrap(), chat);
        assert!(rho_hat_analytic(&base, 1.0, 1, 0.0).is_err());
    }

    #[test]
    fn calibrated_and_analytic_dominate_the_exact_supremum() {
        let t = Arc::new(tree(1.0, 3, &[(0.5, 1.0), (-0.5, 0.6)]));
        let base = Modulus::new(1.5, 1.0, 2.0).unwrap();
        let cal = ModulusHat::calibrated(&t, base).unwrap();
        let ana = ModulusHat::analytic(base, 1.0, 1);
        let ex = ModulusHat::exact(t.clone(), base).unwrap();
        for i in 1..60 {
            let delta = i as f64 * 0.071;
            let exact = ex.eval(delta);
            assert!(verify_modulus_bound(&t, &base, delta, cal.eval(delta)).unwrap().pass, "calibrated at {delta}");
            assert!(exact <= ana.eval(delta) + 1e-12, "analytic at {delta}");
        }
    }

    #[test]
    fn exact_companion_is_monotone() {
        let t = Arc::new(tree(2.0, 3, &[(0.2, 1.0)]));
        let ex = ModulusHat::exact(t, Modulus::new(1.0, 1.0, 1.5).unwrap()).unwrap();
        let mut prev = 0.0;
        for i in 0..80 {
            let v = ex.eval(i as f64 * 0.05);
            assert!(v + 1e-15 >= prev);
            prev = v;
        }
    }

    #[test]
    fn largest_arg_below_inverts() {
        let m = Modulus::new(2.0, 0.5, 3.0).unwrap();
        for b in [1e-3, 0.1, 1.0, 2.0, 50.0] {
            let x = m.largest_arg_below(b);
            assert!(m.eval(x) <= b * (1.0 + 1e-12));
            assert!(m.eval(x * 1.001) > b);
        }
    }
}

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::lattice::{ControlPolicy, TreeModel};
use crate::processes::{script_y, stopped, tau0, Index, Payoff};
use crate::snell::{argmax_policy, snell_envelope, EnvelopeField, OPTIMALITY_TOL};
use crate::stoptimes::{approach_time, Compose, StoppingTime};

/// Value certificate `|Ẑ₀ − E_{P*}[𝒴_{γ*∧τ₀}]|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValueCertificate {
    pub envelope_root: f64,
    pub policy_value: f64,
    pub gap: f64,
    pub pass: bool,
}

/// Saddle point of the robust problem with random maturity.
#[derive(Clone, Debug)]
pub struct RobustSolution {
    pub tau0: StoppingTime,
    /// `𝒴 = 1_{t<τ₀}L + 1_{t≥τ₀}U`.
    pub jump_payoff: Vec<f64>,
    /// Envelope of `𝒴` stopped at `τ₀`.
    pub envelope: EnvelopeField,
    pub gamma_star: StoppingTime,
    pub policy: ControlPolicy,
    pub certificate: ValueCertificate,
    /// The three characterizations of `γ*` select the same step on every path.
    pub forms_agree: bool,
    pub gamma_le_tau0: bool,
}

impl RobustSolution {
    pub fn value(&self) -> f64 {
        self.envelope.root()
    }
}

/// Solves the robust stopping problem directly on the stopped jump payoff.
///
/// `γ*` is the first time the envelope meets the stopped payoff and `P*`
/// attains the one-step worst case of the envelope everywhere. Two alternative
/// descriptions of `γ*` are computed and compared: the first meeting with
/// `𝒴` on `[0, τ₀]`, and the first meeting with `L` before `τ₀`, capped at `τ₀`.
pub fn solve_robust_stopping(tree: &TreeModel, payoff: &Payoff, index: &Index) -> Result<RobustSolution> {
    let tau0 = tau0(tree, index);
    let jump_payoff = script_y(tree, payoff, &tau0);
    let frozen = stopped(tree, &jump_payoff, &tau0);
    let envelope = snell_envelope(tree, &frozen);
    let z = &envelope.values;

    let gamma_star = approach_time(tree, z, &frozen, OPTIMALITY_TOL);
    let policy = argmax_policy(tree, z);
    let policy_value = policy.stopped_expectation(tree, |v| gamma_star.stops_at(tree, v), &frozen);
    let gap = (envelope.root() - policy_value).abs();
    let certificate = ValueCertificate { envelope_root: envelope.root(), policy_value, gap, pass: gap <= OPTIMALITY_TOL };

    let within = |v: usize| !tau0.stopped_by(v) || tau0.stops_at(tree, v);
    let on_interval =
        StoppingTime::from_decisions(tree, |v| within(v) && z[v] - jump_payoff[v] <= OPTIMALITY_TOL);
    let before = StoppingTime::from_decisions(tree, |v| !tau0.stopped_by(v) && z[v] - payoff.lower[v] <= OPTIMALITY_TOL)
        .compose(tree, &tau0, Compose::Min);
    let forms_agree = gamma_star.steps() == on_interval.steps() && gamma_star.steps() == before.steps();
    let gamma_le_tau0 = gamma_star.le(&tau0);

    Ok(RobustSolution { tau0, jump_payoff, envelope, gamma_star, policy, certificate, forms_agree, gamma_le_tau0 })
}

use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{ExperimentConfig, Prepared, RhoHatMode};
use super::output;
use crate::cascade::{build_cascade, CascadeResult, LedgerStatus};
use crate::error::Result;
use crate::lattice::verify_modulus_bound;
use crate::oracle::{brute_force_value_with_cap, OracleAgreement};
use crate::processes::{stopped, tau_n, verify_path_modulus, verify_uniform_continuity};
use crate::snell::{continuity_estimate_check, dpp_check, snell_envelope, martingale_check, pair_certificate, standard_family, OptimalPair, OPTIMALITY_TOL};
use crate::stoptimes::StoppingTime;

/// Node pairs scanned by the continuity diagnostic.
const CONTINUITY_PAIR_CAP: usize = 20_000;

/// Pair budget of the modulus scans before they switch to sampling.
const MODULUS_PAIR_BUDGET: usize = 1 << 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// Fails the run when it does not pass.
    Check,
    /// Reported only.
    Diagnostic,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub kind: CheckKind,
    pub pass: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn check(name: &str, pass: bool, detail: String) -> Self {
        Self { name: name.to_string(), kind: CheckKind::Check, pass, detail }
    }

    fn diagnostic(name: &str, pass: bool, detail: String) -> Self {
        Self { name: name.to_string(), kind: CheckKind::Diagnostic, pass, detail }
    }

    pub fn fails_run(&self) -> bool {
        self.kind == CheckKind::Check && !self.pass
    }
}

/// What a run produced.
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub checks: Vec<CheckOutcome>,
    pub value: f64,
    pub oracle: Option<OracleAgreement>,
}

impl RunSummary {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| !c.fails_run())
    }
}

/// Compares the envelope root with the enumerated robust value of the stopped jump payoff.
pub fn oracle_agreement(prepared: &Prepared, set_cap: usize) -> Result<OracleAgreement> {
    let solution = crate::cascade::solve_robust_stopping(&prepared.tree, &prepared.payoff, &prepared.index)?;
    agreement(prepared, &solution.envelope.payoff, solution.value(), set_cap)
}

fn agreement(prepared: &Prepared, frozen: &[f64], envelope: f64, set_cap: usize) -> Result<OracleAgreement> {
    let oracle = brute_force_value_with_cap(&prepared.tree, frozen, set_cap)?.value;
    let abs_diff = (envelope - oracle).abs();
    Ok(OracleAgreement { envelope, oracle, abs_diff, pass: abs_diff <= OPTIMALITY_TOL })
}

fn sequence_check(prepared: &Prepared, result: &CascadeResult) -> CheckOutcome {
    let tree = &prepared.tree;
    let tau0 = &result.solution.tau0;
    let horizon = tree.grid().horizon();
    let tol = tree.grid().time_tol();
    let mut worst_increment = f64::NEG_INFINITY;
    let mut ordered = true;
    for n in 1..=result.config.n_max {
        let wp = result.sequence.wp(n);
        let next = result.sequence.wp(n + 1);
        let lower = tau_n(tree, &prepared.index, n);
        for p in 0..tree.num_paths() {
            let w = wp.real_time(tree, p);
            let t0 = tau0.real_time(tree, p);
            ordered &= lower.real_time(tree, p) <= w + tol && w <= t0 + tol && w <= next.real_time(tree, p) + tol;
            let excess = next.real_time(tree, p) - w - 2.0 * horizon / (n as f64 + 3.0) - tree.grid().dt();
            worst_increment = worst_increment.max(excess);
        }
    }
    let pass = ordered && worst_increment <= tol;
    CheckOutcome::check(
        "approximating_sequence",
        pass,
        format!("ordering {}; largest increment excess {worst_increment:e}", if ordered { "holds" } else { "violated" }),
    )
}

fn modulus_checks(config: &ExperimentConfig, prepared: &Prepared, out: &mut Vec<CheckOutcome>) -> Result<()> {
    let tree = &prepared.tree;
    let payoff = &prepared.payoff;
    let seed = config.seed;
    let lower = verify_uniform_continuity(tree, &payoff.lower, &payoff.rho, MODULUS_PAIR_BUDGET, seed);
    let upper = verify_uniform_continuity(tree, &payoff.upper, &payoff.rho, MODULUS_PAIR_BUDGET, seed);
    out.push(CheckOutcome::check(
        "payoff_modulus",
        lower.pass && upper.pass,
        format!(
            "largest violation {:e} over {} pairs{}",
            lower.max_violation.max(upper.max_violation),
            lower.pairs_checked + upper.pairs_checked,
            if lower.exhaustive && upper.exhaustive { "" } else { " (sampled)" }
        ),
    ));
    let idx = verify_path_modulus(tree, &prepared.index.field, &prepared.index.rho, MODULUS_PAIR_BUDGET, seed);
    out.push(CheckOutcome::check(
        "index_modulus",
        idx.pass,
        format!("largest violation {:e} over {} pairs", idx.max_violation, idx.pairs_checked),
    ));
    let g = tree.grid();
    let mut deltas = vec![g.dt()];
    deltas.extend((1..=config.cascade.k_max).map(|k| 2.0 * 0.5f64.powi(k as i32)));
    deltas.extend((1..=config.cascade.n_max).map(|n| 2.0 * g.horizon() / (n as f64 + 3.0)));
    let mut worst = f64::NEG_INFINITY;
    let mut pass = true;
    for d in deltas {
        let r = verify_modulus_bound(tree, &payoff.rho, d, prepared.rho_hat.eval(d))?;
        worst = worst.max(r.lhs - r.bound);
        pass &= r.pass;
    }
    out.push(CheckOutcome::check("companion_modulus", pass, format!("largest excess of the exact supremum {worst:e}")));
    Ok(())
}

fn ledger_checks(config: &ExperimentConfig, result: &CascadeResult, out: &mut Vec<CheckOutcome>) {
    let graded = config.rho_hat == RhoHatMode::Exact;
    let mut ids: Vec<&str> = Vec::new();
    for e in &result.ledger {
        if !ids.contains(&e.inequality.as_str()) {
            ids.push(&e.inequality);
        }
    }
    for id in ids {
        let rows: Vec<_> = result.ledger.iter().filter(|e| e.inequality == id).collect();
        let count = |s: LedgerStatus| rows.iter().filter(|e| e.status == s).count();
        let worst = rows.iter().map(|e| e.excess).fold(f64::NEG_INFINITY, f64::max);
        let detail = format!(
            "{} rows: {} pass, {} pass_with_slack, {} fail, {} diagnostic; worst excess {worst:e}",
            rows.len(),
            count(LedgerStatus::Pass),
            count(LedgerStatus::PassWithSlack),
            count(LedgerStatus::Fail),
            count(LedgerStatus::Diagnostic)
        );
        let pass = rows.iter().all(|e| !e.status.is_failure());
        let name = format!("ledger_{id}");
        let diagnostic = !graded || rows.iter().all(|e| e.status == LedgerStatus::Diagnostic);
        out.push(if diagnostic {
            CheckOutcome::diagnostic(&name, pass, detail)
        } else {
            CheckOutcome::check(&name, pass, detail)
        });
    }
}

/// Runs one experiment and writes every output file into `out_dir`.
pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path) -> Result<RunSummary> {
    let prepared = config.prepare()?;
    let tree = &prepared.tree;
    let result = build_cascade(tree, &prepared.payoff, &prepared.index, prepared.cascade, &prepared.rho_hat)?;
    let solution = &result.solution;
    let env = &solution.envelope;
    let mut checks = Vec::new();

    checks.push(CheckOutcome::check(
        "value_certificate",
        solution.certificate.pass,
        format!("envelope root {} versus policy value {}", solution.certificate.envelope_root, solution.certificate.policy_value),
    ));
    checks.push(CheckOutcome::check(
        "gamma_star_characterizations",
        solution.forms_agree,
        "first meeting with the stopped payoff, with the payoff on [0, τ₀], and with L before τ₀".into(),
    ));
    checks.push(CheckOutcome::check("gamma_star_before_maturity", solution.gamma_le_tau0, "γ* ≤ τ₀ on every path".into()));
    checks.push(CheckOutcome::check(
        "frozen_after_maturity",
        result.diagnostics.frozen_after_tau0,
        "limit envelope equals U(τ₀) after τ₀".into(),
    ));
    checks.push(CheckOutcome::check(
        "limit_matches_direct",
        result.diagnostics.limit_vs_direct <= 1e-12,
        format!("max |limit − direct| = {:e}", result.diagnostics.limit_vs_direct),
    ));
    checks.push(sequence_check(&prepared, &result));

    let extra = vec![("tau0".to_string(), solution.tau0.clone()), ("gamma_star".to_string(), solution.gamma_star.clone())];
    let family = standard_family(tree, &extra, config.random_family, config.seed);
    let pair = OptimalPair { stop: solution.gamma_star.clone(), policy: solution.policy.clone(), value: solution.certificate.policy_value };
    let cert = pair_certificate(tree, env, &pair, &family);
    checks.push(CheckOutcome::check(
        "optimal_pair",
        cert.pass,
        format!("largest |Z₀ − E_P*[Z_(γ*∧ζ)]| = {:e} over {} stopping rules", cert.max_gap, family.len()),
    ));

    if config.checks.dpp {
        let mut nus: Vec<(String, StoppingTime)> =
            (0..=tree.depth()).map(|m| (format!("t{m}"), StoppingTime::deterministic(tree, m))).collect();
        nus.extend(extra.iter().cloned());
        let mut worst = 0.0f64;
        let mut pass = true;
        for (_, nu) in &nus {
            let c = dpp_check(tree, env, nu);
            worst = worst.max(c.max_error);
            pass &= c.pass;
        }
        checks.push(CheckOutcome::check("dpp", pass, format!("largest error {worst:e} over {} stopping times", nus.len())));
    }
    if config.checks.martingale {
        let m = martingale_check(tree, env, Some(&solution.gamma_star), &family);
        let sup = m.entries.iter().map(|e| e.super_violation).fold(0.0, f64::max);
        let sub = m.entries.iter().filter_map(|e| e.sub_violation).fold(0.0, f64::max);
        checks.push(CheckOutcome::check(
            "martingale",
            m.pass,
            format!("supermartingale violation {sup:e}, submartingale violation up to γ* {sub:e}"),
        ));
    }
    if config.checks.ledger {
        ledger_checks(config, &result, &mut checks);
    }
    let d = &result.diagnostics;
    checks.push(CheckOutcome::diagnostic("limit_gap", true, format!("max |Zⁿ − Z| at n = n_max: {:e}", d.limit_gap)));
    checks.push(CheckOutcome::diagnostic("blend_residual", true, format!("max |Z^(n,k_max) − Zⁿ|: {:e}", d.k_residual)));
    checks.push(CheckOutcome::diagnostic(
        "blend_policy_pair",
        d.policy_mm_gap <= OPTIMALITY_TOL,
        format!("largest pair gap of the diagonal cell: {:e}", d.policy_mm_gap),
    ));
    if config.checks.modulus {
        modulus_checks(config, &prepared, &mut checks)?;
        let upper_env = snell_envelope(tree, &prepared.payoff.upper);
        let r = continuity_estimate_check(tree, &upper_env, &prepared.rho_hat, 0.0, CONTINUITY_PAIR_CAP);
        checks.push(CheckOutcome::diagnostic(
            "continuity_estimate",
            r.pass,
            format!("envelope of U: largest excess {:e} over {} node pairs", r.max_violation, r.pairs_checked),
        ));
    }
    let oracle = if config.checks.oracle {
        let frozen = stopped(tree, &solution.jump_payoff, &solution.tau0);
        let a = agreement(&prepared, &frozen, solution.value(), config.caps.oracle_set)?;
        checks.push(CheckOutcome::check("oracle", a.pass, format!("max abs diff {:e}", a.abs_diff)));
        Some(a)
    } else {
        None
    };

    let summary = RunSummary { out_dir: out_dir.to_path_buf(), checks, value: solution.value(), oracle };
    output::write_all(config, &prepared, &result, &summary)?;
    Ok(summary)
}

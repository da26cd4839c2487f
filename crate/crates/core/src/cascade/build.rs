use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ledger::{tail_sums, ErrorLedgerEntry, TailSum};
use super::solve::{solve_robust_stopping, RobustSolution};
use crate::error::{Error, Result};
use crate::lattice::{ModulusHat, TreeModel};
use crate::processes::{blend_end_step, hat_y_nk, script_y_n, Index, Payoff};
use crate::snell::{argmax_policy, pair_certificate, snell_envelope, standard_family, EnvelopeField, OptimalPair, OPTIMALITY_TOL};
use crate::stoptimes::{approach_time, build_wp_sequence, StoppingTime, WpSequence};

/// Sizes of the double approximation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CascadeConfig {
    pub n_max: usize,
    pub k_max: usize,
    /// Seed of the random stopping rules used by the policy diagnostic.
    #[serde(default)]
    pub seed: u64,
}

/// Root value and stabilization residual of one `Z^{n,k}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub n: usize,
    pub k: usize,
    pub root: f64,
    /// `max |Z^{n,k} − 𝒵ⁿ|` over nodes.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CascadeDiagnostics {
    /// `max |𝒵^{n_max} − 𝒵|`, the distance between the last cascade term and its limit.
    pub limit_gap: f64,
    /// `max_n max |Z^{n,k_max} − 𝒵ⁿ|`.
    pub k_residual: f64,
    /// `max |𝒵 − Ẑ|` between the limit envelope and the directly solved one.
    pub limit_vs_direct: f64,
    /// `𝒵` equals `U(τ₀)` exactly once `τ₀` has passed.
    pub frozen_after_tau0: bool,
    /// Largest `|Z^{m,m}₀ − E_{P_{m,m}}[Z^{m,m}_{ν∧ζ}]|` over a family of `ζ`, `m = min(n_max, k_max)`.
    pub policy_mm_gap: f64,
}

/// Everything produced by [`build_cascade`].
#[derive(Clone, Debug)]
pub struct CascadeResult {
    pub config: CascadeConfig,
    pub sequence: WpSequence,
    pub cells: Vec<CellSummary>,
    /// `script_roots[n-1] = 𝒵ⁿ₀` for `n = 1..=n_max+1`.
    pub script_roots: Vec<f64>,
    /// `𝒵`, the envelope of the limit payoff `1_{t≤τ₀}L + 1_{t>τ₀}U(τ₀)`.
    pub limit: EnvelopeField,
    pub eps: Vec<TailSum>,
    pub ledger: Vec<ErrorLedgerEntry>,
    pub solution: RobustSolution,
    pub diagnostics: CascadeDiagnostics,
}

impl CascadeResult {
    pub fn cell(&self, n: usize, k: usize) -> &CellSummary {
        &self.cells[(n - 1) * self.config.k_max + (k - 1)]
    }

    pub fn ledger_pass(&self) -> bool {
        self.ledger.iter().all(|e| !e.status.is_failure())
    }

    /// `ε_n`.
    pub fn eps(&self, n: usize) -> f64 {
        self.eps[n - 1].value
    }
}

fn u_stopped(tree: &TreeModel, upper: &[f64], tau: &StoppingTime, node: usize) -> f64 {
    upper[tau.stop_ancestor(tree, node).unwrap_or(node)]
}

fn u_blend_end(tree: &TreeModel, upper: &[f64], wp: &StoppingTime, k: u32, node: usize) -> f64 {
    match wp.step_at(tree, node) {
        None => upper[node],
        Some(s) => upper[tree.ancestor(node, blend_end_step(tree, s, k).min(tree.step(node)))],
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Builds `Z^{n,k}` for `n ≤ n_max`, `k ≤ k_max`, the envelopes `𝒵ⁿ` and `𝒵`,
/// and grades every error bound linking them.
///
/// `rho_hat` is the companion modulus of the payoff. The robust problem is also
/// solved directly and its root is compared with the cascade.
pub fn build_cascade(
    tree: &TreeModel,
    payoff: &Payoff,
    index: &Index,
    config: CascadeConfig,
    rho_hat: &ModulusHat,
) -> Result<CascadeResult> {
    let CascadeConfig { n_max, k_max, seed } = config;
    if n_max == 0 || k_max == 0 {
        return Err(Error::Config(format!("cascade sizes must be ≥ 1, got n_max = {n_max}, k_max = {k_max}")));
    }
    if k_max > 60 {
        return Err(Error::Config(format!("k_max = {k_max} is beyond double precision of 2^(1-k)")));
    }
    let g = tree.grid();
    let horizon = g.horizon();
    let grid_slack = rho_hat.eval(g.dt());
    let sequence = build_wp_sequence(tree, index, n_max + 1)?;
    let solution = solve_robust_stopping(tree, payoff, index)?;
    let tau0 = &solution.tau0;
    let upper = &payoff.upper;
    let nodes = tree.num_nodes();

    let script: Vec<EnvelopeField> =
        (1..=n_max + 1).into_par_iter().map(|n| snell_envelope(tree, &script_y_n(tree, payoff, sequence.wp(n)))).collect();
    let limit = snell_envelope(tree, &script_y_n(tree, payoff, tau0));
    let eps = tail_sums(tree, rho_hat, n_max + k_max);
    let eps_of = |n: usize| eps[n - 1].value;
    let h = |k: usize| 2.0 * 0.5f64.powi(k as i32);

    let pairs: Vec<(usize, usize)> = (1..=n_max).flat_map(|n| (1..=k_max).map(move |k| (n, k))).collect();
    let cell_out: Vec<(CellSummary, ErrorLedgerEntry, Option<ErrorLedgerEntry>)> = pairs
        .par_iter()
        .map(|&(n, k)| {
            let wp = sequence.wp(n);
            let z = snell_envelope(tree, &hat_y_nk(tree, payoff, wp, k as u32));
            let zn = &script[n - 1].values;
            let r = rho_hat.eval(h(k));
            let blend_row = ErrorLedgerEntry::evaluate(
                "eh137",
                n,
                Some(k),
                -2.0 * r,
                r,
                grid_slack,
                (0..nodes).map(|v| {
                    z.values[v] - zn[v] - u_blend_end(tree, upper, wp, k as u32, v) + u_stopped(tree, upper, wp, v)
                }),
                false,
            );
            let diagonal = (n == k).then(|| {
                let bound = 2.0 * r + 2.0 * eps_of(k);
                ErrorLedgerEntry::evaluate(
                    "et341",
                    n,
                    Some(k),
                    -bound,
                    bound,
                    grid_slack,
                    (0..nodes).map(|v| {
                        z.values[v] - limit.values[v] - u_blend_end(tree, upper, wp, k as u32, v)
                            + u_stopped(tree, upper, tau0, v)
                    }),
                    true,
                )
            });
            let summary = CellSummary { n, k, root: z.root(), residual: max_abs_diff(&z.values, zn) };
            (summary, blend_row, diagonal)
        })
        .collect();

    let mut ledger = Vec::new();
    let mut cells = Vec::with_capacity(pairs.len());
    let mut diagonal_rows = Vec::new();
    for (summary, row, diag) in cell_out {
        cells.push(summary);
        ledger.push(row);
        diagonal_rows.extend(diag);
    }
    for n in 1..=n_max {
        let (a, b) = (sequence.wp(n), sequence.wp(n + 1));
        let r = rho_hat.eval(2.0 * horizon / (n as f64 + 3.0));
        ledger.push(ErrorLedgerEntry::evaluate(
            "eh137b",
            n,
            None,
            -2.0 * r,
            r,
            grid_slack,
            (0..nodes).map(|v| {
                script[n].values[v] - script[n - 1].values[v] - u_stopped(tree, upper, b, v) + u_stopped(tree, upper, a, v)
            }),
            false,
        ));
    }
    for n in 1..=n_max {
        let wp = sequence.wp(n);
        let e = eps_of(n);
        ledger.push(ErrorLedgerEntry::evaluate(
            "et317",
            n,
            None,
            -2.0 * e,
            e,
            grid_slack,
            (0..nodes).map(|v| {
                limit.values[v] - script[n - 1].values[v] - u_stopped(tree, upper, tau0, v) + u_stopped(tree, upper, wp, v)
            }),
            false,
        ));
    }
    ledger.extend(diagonal_rows);

    // At the root the correction terms cancel, so the direct value must sit
    // within the combined blend and tail bounds of the finest cell.
    let finest = &cells[(n_max - 1) * k_max + (k_max - 1)];
    let (r, e) = (rho_hat.eval(h(k_max)), eps_of(n_max));
    ledger.push(ErrorLedgerEntry::evaluate(
        "direct_vs_cascade",
        n_max,
        Some(k_max),
        -2.0 * e - r,
        e + 2.0 * r,
        grid_slack,
        std::iter::once(solution.value() - finest.root),
        false,
    ));

    let m = n_max.min(k_max);
    let wp_m = sequence.wp(m);
    let z_mm = snell_envelope(tree, &hat_y_nk(tree, payoff, wp_m, m as u32));
    let pair = OptimalPair {
        stop: approach_time(tree, &z_mm.values, &z_mm.payoff, OPTIMALITY_TOL),
        policy: argmax_policy(tree, &z_mm.values),
        value: z_mm.root(),
    };
    let family = standard_family(tree, &[("tau0".to_string(), tau0.clone())], 4, seed);
    let policy_mm_gap = pair_certificate(tree, &z_mm, &pair, &family).max_gap;

    let frozen_after_tau0 =
        (0..nodes).all(|v| !tau0.stopped_by(v) || limit.values[v] == upper[tau0.stop_ancestor(tree, v).unwrap()]);
    let diagnostics = CascadeDiagnostics {
        limit_gap: max_abs_diff(&script[n_max - 1].values, &limit.values),
        k_residual: (1..=n_max).map(|n| cells[(n - 1) * k_max + (k_max - 1)].residual).fold(0.0, f64::max),
        limit_vs_direct: max_abs_diff(&limit.values, &solution.envelope.values),
        frozen_after_tau0,
        policy_mm_gap,
    };

    Ok(CascadeResult {
        config,
        script_roots: script.iter().map(|e| e.root()).collect(),
        sequence,
        cells,
        limit,
        eps: eps.into_iter().take(n_max).collect(),
        ledger,
        solution,
        diagnostics,
    })
}

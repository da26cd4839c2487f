use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::config::{ExperimentConfig, Prepared};
use super::run::{CheckKind, RunSummary};
use crate::cascade::{CascadeDiagnostics, CascadeResult, CellSummary, TailSum, ValueCertificate};
use crate::error::{Error, Result};
use crate::lattice::TreeStats;
use crate::oracle::OracleAgreement;
use crate::snell::{EnvelopeExport, OPTIMALITY_TOL};
use crate::stoptimes::{StoppingTimeExport, WpSummary};

pub const VALUES_FILE: &str = "values.json";
pub const LEDGER_FILE: &str = "ledger.csv";
pub const GAMMA_FILE: &str = "gamma_star.json";
pub const POLICY_FILE: &str = "policy.json";
pub const BOUNDARY_FILE: &str = "boundary.csv";
pub const ENVELOPE_FILE: &str = "envelope.json";
pub const REPORT_FILE: &str = "report.md";

#[derive(Serialize)]
struct ScriptValue {
    n: usize,
    root: f64,
}

#[derive(Serialize)]
struct Values<'a> {
    name: &'a str,
    tree: TreeStats,
    rho_hat: super::config::RhoHatMode,
    grid_slack: f64,
    /// Directly solved robust value.
    value: f64,
    /// Root of the limit envelope.
    limit_value: f64,
    cells: &'a [CellSummary],
    script_values: Vec<ScriptValue>,
    eps: &'a [TailSum],
    sequence: Vec<WpSummary>,
    diagnostics: &'a CascadeDiagnostics,
    certificate: &'a ValueCertificate,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<&'a OracleAgreement>,
}

#[derive(Serialize)]
struct GammaStar {
    gamma_star: StoppingTimeExport,
    tau0: StoppingTimeExport,
}

#[derive(Serialize)]
struct PolicyFile {
    value: f64,
    /// Control index chosen at each non-terminal node.
    choices: std::collections::BTreeMap<usize, usize>,
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| Error::io(path.display().to_string(), e))
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

fn opt(k: Option<usize>) -> String {
    k.map(|k| k.to_string()).unwrap_or_default()
}

fn ledger_csv(result: &CascadeResult) -> String {
    let mut s = String::from("inequality,n,k,lower_bound,upper_bound,min_value,max_value,slack,grid_slack,status,pass\n");
    for e in &result.ledger {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{}",
            e.inequality,
            e.n,
            opt(e.k),
            e.lower_bound,
            e.upper_bound,
            e.min_value,
            e.max_value,
            e.excess,
            e.grid_slack,
            e.status.as_str(),
            !e.status.is_failure()
        );
    }
    s
}

fn boundary_csv(prepared: &Prepared, result: &CascadeResult) -> String {
    let tree = &prepared.tree;
    let env = &result.solution.envelope;
    let tau0 = &result.solution.tau0;
    let mut s = String::from("step,time,node");
    for i in 0..tree.dim() {
        let _ = write!(s, ",x{i}");
    }
    s.push_str(",envelope,payoff,matured,exercise\n");
    for node in 0..tree.num_nodes() {
        let step = tree.step(node);
        let _ = write!(s, "{step},{},{node}", tree.grid().time(step));
        for x in tree.pos(node) {
            let _ = write!(s, ",{x}");
        }
        let exercise = env.values[node] - env.payoff[node] <= OPTIMALITY_TOL;
        let _ = writeln!(
            s,
            ",{},{},{},{}",
            env.values[node],
            env.payoff[node],
            u8::from(tau0.stopped_by(node)),
            u8::from(exercise)
        );
    }
    s
}

fn report_md(config: &ExperimentConfig, prepared: &Prepared, result: &CascadeResult, summary: &RunSummary) -> String {
    let stats = prepared.tree.stats();
    let mut s = String::new();
    let _ = writeln!(s, "# {}\n", config.name);
    let _ = writeln!(
        s,
        "Tree: {} steps over horizon {}, {} controls in dimension {}, {} nodes, {} paths.\n",
        stats.depth, config.grid.horizon, stats.controls, stats.dim, stats.nodes, stats.paths
    );
    let _ = writeln!(s, "- Robust value: {}", summary.value);
    let _ = writeln!(s, "- Limit envelope root: {}", result.limit.root());
    let last = result.cell(result.config.n_max, result.config.k_max);
    let _ = writeln!(s, "- Finest cascade cell Z^({},{}) root: {}", last.n, last.k, last.root);
    if let Some(a) = &summary.oracle {
        let _ = writeln!(s, "- Oracle agreement: envelope {}, oracle {}, max abs diff {:e}", a.envelope, a.oracle, a.abs_diff);
    }
    let verdict = if summary.all_pass() { "PASS" } else { "FAIL" };
    let _ = writeln!(s, "- Overall: {verdict}\n");
    s.push_str("| check | kind | result | detail |\n|---|---|---|---|\n");
    for c in &summary.checks {
        let kind = if c.kind == CheckKind::Check { "check" } else { "diagnostic" };
        let result = if c.pass { "pass" } else { "fail" };
        let _ = writeln!(s, "| {} | {kind} | {result} | {} |", c.name, c.detail.replace('|', "\\|"));
    }
    s
}

/// Writes every output file of a run.
pub fn write_all(config: &ExperimentConfig, prepared: &Prepared, result: &CascadeResult, summary: &RunSummary) -> Result<()> {
    let dir = &summary.out_dir;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    let tree = &prepared.tree;
    let solution = &result.solution;
    let values = Values {
        name: &config.name,
        tree: tree.stats(),
        rho_hat: config.rho_hat,
        grid_slack: prepared.rho_hat.eval(tree.grid().dt()),
        value: solution.value(),
        limit_value: result.limit.root(),
        cells: &result.cells,
        script_values: result.script_roots.iter().enumerate().map(|(i, &root)| ScriptValue { n: i + 1, root }).collect(),
        eps: &result.eps,
        sequence: result.sequence.summaries(),
        diagnostics: &result.diagnostics,
        certificate: &solution.certificate,
        oracle: summary.oracle.as_ref(),
    };
    write(dir, VALUES_FILE, &json(&values))?;
    write(dir, LEDGER_FILE, &ledger_csv(result))?;
    let gamma = GammaStar { gamma_star: solution.gamma_star.export(tree), tau0: solution.tau0.export(tree) };
    write(dir, GAMMA_FILE, &json(&gamma))?;
    let policy = PolicyFile { value: solution.certificate.policy_value, choices: solution.policy.to_map(tree) };
    write(dir, POLICY_FILE, &json(&policy))?;
    let envelope: EnvelopeExport = solution.envelope.export(OPTIMALITY_TOL);
    write(dir, ENVELOPE_FILE, &json(&envelope))?;
    write(dir, BOUNDARY_FILE, &boundary_csv(prepared, result))?;
    write(dir, REPORT_FILE, &report_md(config, prepared, result, summary))?;
    Ok(())
}

/// Which table to print from a results directory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum TableKind {
    Convergence,
    Ledger,
    Boundary,
}

fn read(dir: &Path, name: &str) -> Result<String> {
    let path = dir.join(name);
    std::fs::read_to_string(&path).map_err(|e| Error::io(path.display().to_string(), e))
}

fn num(v: &serde_json::Value) -> String {
    match v.as_f64() {
        Some(x) => x.to_string(),
        None => "inf".to_string(),
    }
}

/// CSV text of one table from a prior run.
///
/// `convergence` lists every `Z^{n,k}₀`, every `𝒵ⁿ₀`, the limit root and the direct value.
pub fn table(dir: &Path, which: TableKind) -> Result<String> {
    match which {
        TableKind::Ledger => read(dir, LEDGER_FILE),
        TableKind::Boundary => read(dir, BOUNDARY_FILE),
        TableKind::Convergence => {
            let v: serde_json::Value = serde_json::from_str(&read(dir, VALUES_FILE)?)?;
            let mut s = String::from("series,n,k,value\n");
            let empty = Vec::new();
            for c in v["cells"].as_array().unwrap_or(&empty) {
                let _ = writeln!(s, "cell,{},{},{}", c["n"], c["k"], num(&c["root"]));
            }
            for c in v["script_values"].as_array().unwrap_or(&empty) {
                let _ = writeln!(s, "script,{},,{}", c["n"], num(&c["root"]));
            }
            let _ = writeln!(s, "limit,,,{}", num(&v["limit_value"]));
            let _ = writeln!(s, "direct,,,{}", num(&v["value"]));
            Ok(s)
        }
    }
}

// Solves a robust stopping problem whose exercise window closes at the first
// zero of an index, and exports the optimal stopping rule and policy as JSON.

use robust_stopping::cascade::solve_robust_stopping;
use robust_stopping::error::Result;
use robust_stopping::lattice::{ControlSet, TimeGrid, TreeModel};
use robust_stopping::processes::{Expr, IndexSpec, ModulusSpec, PayoffSpec};

fn run_example() -> Result<f64> {
    let tree = TreeModel::build(TimeGrid::new(1.0, 4)?, ControlSet::scalar(&[(0.0, 1.0), (0.2, 0.5)], 1.0)?)?;
    let gain = Expr::max(vec![Expr::constant(0.0), Expr::coord(0)]);
    let payoff = PayoffSpec {
        lower: Expr::at_horizon(Expr::sum(vec![Expr::constant(0.5), gain.clone()]), gain.clone()),
        upper: Expr::sum(vec![Expr::constant(0.5), gain]),
        bound: None,
        modulus: ModulusSpec::Calibrated { p1: 1.0, p2: 1.0 },
    }
    .resolve(&tree)?;
    let index = IndexSpec { expr: Expr::sum(vec![Expr::constant(0.8), Expr::coord(0)]), modulus: ModulusSpec::Lipschitz }
        .resolve(&tree)?;

    let sol = solve_robust_stopping(&tree, &payoff, &index)?;
    println!("value {:.6}, certificate gap {:e}", sol.value(), sol.certificate.gap);
    println!("γ* ≤ τ₀: {}, characterizations agree: {}", sol.gamma_le_tau0, sol.forms_agree);
    let export = sol.gamma_star.export(&tree);
    println!("γ* stops at {} nodes", export.stop_nodes.len());
    println!("{}", serde_json::to_string(&sol.policy.to_map(&tree))?);
    Ok(sol.value())
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}

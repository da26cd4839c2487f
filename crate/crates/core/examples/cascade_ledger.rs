// Builds the double approximation `Z^{n,k}` and prints the error ledger.

use std::sync::Arc;

use robust_stopping::cascade::{build_cascade, CascadeConfig};
use robust_stopping::error::Result;
use robust_stopping::lattice::{ControlSet, ModulusHat, TimeGrid, TreeModel};
use robust_stopping::processes::{Expr, IndexSpec, ModulusSpec, PayoffSpec};

fn run_example() -> Result<bool> {
    let tree = Arc::new(TreeModel::build(TimeGrid::new(1.0, 3)?, ControlSet::scalar(&[(0.0, 1.0), (0.3, 0.6)], 1.0)?)?);
    let capped = Expr::min(vec![Expr::constant(1.0), Expr::abs(Expr::coord(0))]);
    let upper = Expr::sum(vec![Expr::constant(1.0), capped.clone()]);
    let payoff = PayoffSpec {
        lower: Expr::at_horizon(upper.clone(), capped),
        upper,
        bound: None,
        modulus: ModulusSpec::Calibrated { p1: 1.0, p2: 1.0 },
    }
    .resolve(&tree)?;
    let index = IndexSpec { expr: Expr::sum(vec![Expr::constant(0.6), Expr::coord(0)]), modulus: ModulusSpec::Lipschitz }
        .resolve(&tree)?;
    let rho_hat = ModulusHat::exact(tree.clone(), payoff.rho)?;
    let result = build_cascade(&tree, &payoff, &index, CascadeConfig { n_max: 3, k_max: 4, seed: 0 }, &rho_hat)?;

    println!("direct value {:.6}", result.solution.value());
    for e in &result.ledger {
        println!(
            "{:<18} n={} k={:<4} bounds [{:.4}, {:.4}] observed [{:.4}, {:.4}] {}",
            e.inequality,
            e.n,
            e.k.map(|k| k.to_string()).unwrap_or_default(),
            e.lower_bound,
            e.upper_bound,
            e.min_value,
            e.max_value,
            e.status.as_str()
        );
    }
    Ok(result.ledger_pass())
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}

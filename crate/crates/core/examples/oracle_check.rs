// Cross-checks the backward induction against exhaustive enumeration of
// stopping rules and control policies on a tiny tree.

use robust_stopping::error::Result;
use robust_stopping::lattice::{ControlSet, TimeGrid, TreeModel};
use robust_stopping::oracle::brute_force_value;
use robust_stopping::processes::Expr;
use robust_stopping::snell::snell_envelope;

fn run_example() -> Result<f64> {
    let tree = TreeModel::build(TimeGrid::new(1.0, 3)?, ControlSet::scalar(&[(0.0, 1.0), (0.4, 0.3), (-0.2, 0.7)], 1.0)?)?;
    let payoff = Expr::sum(vec![Expr::abs(Expr::coord(0)), Expr::neg(Expr::Time)]).field(&tree);
    let env = snell_envelope(&tree, &payoff);
    let oracle = brute_force_value(&tree, &payoff)?;
    let diff = (env.root() - oracle.value).abs();
    println!("envelope {:.12}  oracle {:.12}  |diff| {diff:e}", env.root(), oracle.value);
    println!("distinct strategy values at the root: {}", oracle.distinct_values);
    Ok(diff)
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}

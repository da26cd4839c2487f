// Robust American put on a non-recombining tree: envelope, exercise region,
// an optimal stopping rule with its worst-case control policy, and the
// fixpoint checks.

use robust_stopping::error::Result;
use robust_stopping::lattice::{ControlSet, TimeGrid, TreeModel};
use robust_stopping::processes::Expr;
use robust_stopping::snell::{dpp_check, martingale_check, optimal_pair, snell_envelope, standard_family};
use robust_stopping::stoptimes::StoppingTime;

fn run_example() -> Result<f64> {
    let tree = TreeModel::build(TimeGrid::new(1.0, 5)?, ControlSet::scalar(&[(0.0, 0.8), (0.1, 0.4), (-0.1, 0.6)], 1.0)?)?;
    // Arithmetic put with strike 0 on the state itself.
    let put = Expr::max(vec![Expr::constant(0.0), Expr::neg(Expr::coord(0))]).field(&tree);
    let env = snell_envelope(&tree, &put);
    println!("robust put value {:.6}", env.root());
    println!("exercise nodes: {}", env.exercise_region(1e-12).len());

    let pair = optimal_pair(&tree, &env)?;
    println!("value under the extracted pair {:.6}", pair.value);

    let family = standard_family(&tree, &[], 4, 11);
    let mart = martingale_check(&tree, &env, Some(&pair.stop), &family);
    let dpp = dpp_check(&tree, &env, &StoppingTime::deterministic(&tree, 2));
    println!("martingale checks pass: {}, dpp error {:e}", mart.pass, dpp.max_error);
    Ok(env.root())
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}

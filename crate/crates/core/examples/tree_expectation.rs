// Builds a one-dimensional path tree under two controls and evaluates the
// worst-case expectation of a few terminal functionals.

use robust_stopping::error::Result;
use robust_stopping::lattice::{nonlinear_expectation, ControlSet, TimeGrid, TreeModel};

fn run_example() -> Result<Vec<f64>> {
    let grid = TimeGrid::new(1.0, 4)?;
    let controls = ControlSet::scalar(&[(0.0, 1.0), (0.25, 0.5)], 1.0)?;
    let tree = TreeModel::build(grid, controls)?;
    println!("{:?}", tree.stats());

    let last = tree.depth();
    let terminal = |f: &dyn Fn(f64) -> f64| -> Vec<f64> { (0..tree.num_paths()).map(|p| f(tree.path_pos(p, last)[0])).collect() };
    let square = terminal(&|x| x * x);
    let linear = terminal(&|x| x);
    let neg_linear = terminal(&|x| -x);

    let e_sq = nonlinear_expectation(&tree, &square, tree.root());
    let e_lin = nonlinear_expectation(&tree, &linear, tree.root());
    let e_neg = nonlinear_expectation(&tree, &neg_linear, tree.root());
    println!("sup E[B_T^2] = {e_sq:.6}");
    // Drift uncertainty makes the upper and lower means differ.
    println!("sup E[B_T] = {e_lin:.6}, inf E[B_T] = {:.6}", -e_neg);
    Ok(vec![e_sq, e_lin, -e_neg])
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}

// The nondecreasing sequence of Lipschitz stopping times that approaches the
// first zero of an index process from below.

use robust_stopping::error::Result;
use robust_stopping::lattice::{ControlSet, TimeGrid, TreeModel};
use robust_stopping::processes::{tau0, Expr, IndexSpec, ModulusSpec};
use robust_stopping::stoptimes::build_wp_sequence;

fn run_example() -> Result<usize> {
    let tree = TreeModel::build(TimeGrid::new(1.0, 5)?, ControlSet::scalar(&[(0.0, 1.0), (-0.3, 0.7)], 1.0)?)?;
    let index = IndexSpec { expr: Expr::sum(vec![Expr::constant(0.7), Expr::coord(0)]), modulus: ModulusSpec::Lipschitz }
        .resolve(&tree)?;
    let maturity = tau0(&tree, &index);
    let seq = build_wp_sequence(&tree, &index, 6)?;
    for s in seq.summaries() {
        let wp = seq.wp(s.n);
        let mean: f64 = (0..tree.num_paths()).map(|p| wp.real_time(&tree, p)).sum::<f64>() / tree.num_paths() as f64;
        println!("n = {}  level {}  κ = {:.3}  mean time {:.4}", s.n, s.level, s.kappa, mean);
    }
    let mean_tau0: f64 = maturity.steps().iter().map(|&s| tree.grid().time(s)).sum::<f64>() / tree.num_paths() as f64;
    println!("mean τ₀ = {mean_tau0:.4}");
    Ok(seq.len())
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}

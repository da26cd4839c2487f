// Hitting times, a Lipschitz window time around a reference path, and the
// pathwise Lipschitz verification of the latter.

use robust_stopping::error::Result;
use robust_stopping::lattice::{ControlSet, TimeGrid, TreeModel};
use robust_stopping::processes::Expr;
use robust_stopping::stoptimes::{lipschitz_window_time, verify_lipschitz, LipschitzScope, StoppingTime, WindowParams};

fn run_example() -> Result<bool> {
    let tree = TreeModel::build(TimeGrid::new(1.0, 6)?, ControlSet::scalar(&[(0.0, 1.0)], 1.0)?)?;
    let level = Expr::sum(vec![Expr::constant(0.5), Expr::coord(0)]).field(&tree);
    let hit = StoppingTime::hitting(&tree, &level, 0.0);
    let early = hit.steps().iter().filter(|&&s| s < tree.depth()).count();
    println!("hitting time stops before the horizon on {early} of {} paths", tree.num_paths());

    let params = WindowParams::new(0.2, 1.0, 0.3, 0.6)?;
    let window = lipschitz_window_time(&tree, 0, params)?;
    let kappa = params.kappa();
    let report = verify_lipschitz(&tree, &window, kappa, LipschitzScope::GlobalT, 1 << 16, 5);
    println!("window time κ = {kappa}, pairs checked {}, verdict {:?}", report.pairs_checked, report.verdict);
    Ok(report.pass)
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}

// Compares the three companion moduli of a payoff modulus with the exact
// supremum they must dominate.

use std::sync::Arc;

use robust_stopping::error::Result;
use robust_stopping::lattice::{verify_modulus_bound, ControlSet, Modulus, ModulusHat, TimeGrid, TreeModel};

fn run_example() -> Result<bool> {
    let tree = Arc::new(TreeModel::build(TimeGrid::new(1.0, 4)?, ControlSet::scalar(&[(0.0, 1.0), (0.5, 0.5)], 1.0)?)?);
    let base = Modulus::new(1.0, 1.0, 2.0)?;
    let analytic = ModulusHat::analytic(base, 1.0, 1);
    let calibrated = ModulusHat::calibrated(&tree, base)?;
    let exact = ModulusHat::exact(tree.clone(), base)?;
    println!("Ĉ analytic {:.4}, calibrated {:.4}", analytic.chat(), calibrated.chat());
    let mut all = true;
    for delta in [0.1, 0.25, 0.5, 1.0] {
        let lhs = exact.eval(delta);
        let ok = verify_modulus_bound(&tree, &base, delta, calibrated.eval(delta))?.pass;
        all &= ok;
        println!("δ = {delta:<5} exact {lhs:.5}  calibrated {:.5}  analytic {:.5}", calibrated.eval(delta), analytic.eval(delta));
    }
    Ok(all)
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}

//! Seeded random instances shared by the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robust_stopping::lattice::{Control, ControlSet, TimeGrid, TreeModel};
use robust_stopping::processes::{Expr, Index, IndexSpec, ModulusSpec, Payoff, PayoffSpec};
use robust_stopping::stoptimes::StoppingTime;

pub struct Instance {
    pub seed: u64,
    pub tree: Arc<TreeModel>,
    /// A generic path-dependent reward.
    pub reward: Vec<f64>,
    pub payoff: Payoff,
    pub index: Index,
}

/// One-dimensional tree with `steps` steps and `controls` random controls, `ell = 1`.
pub fn random_tree(rng: &mut ChaCha8Rng, steps: usize, controls: usize) -> TreeModel {
    let list = (0..controls)
        .map(|_| Control::scalar(rng.gen_range(-1.0..=1.0), rng.gen_range(0.2..=std::f64::consts::SQRT_2)))
        .collect();
    TreeModel::build(TimeGrid::new(1.0, steps).unwrap(), ControlSet::new(1, list, 1.0).unwrap()).unwrap()
}

fn coef(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(-1.0..=1.0)
}

/// Reward `a₀ + a₁x + a₂|x| + a₃ max x + a₄t`.
pub fn random_reward_expr(rng: &mut ChaCha8Rng) -> Expr {
    Expr::sum(vec![
        Expr::constant(coef(rng)),
        Expr::scale(coef(rng), Expr::coord(0)),
        Expr::scale(coef(rng), Expr::abs(Expr::coord(0))),
        Expr::scale(coef(rng), Expr::RunMax { index: 0 }),
        Expr::scale(coef(rng), Expr::Time),
    ])
}

/// `U` from [`random_reward_expr`] and `L = U − b(1 + min(1, |x|))` before the horizon.
pub fn random_payoff_spec(rng: &mut ChaCha8Rng, modulus: ModulusSpec) -> PayoffSpec {
    let upper = random_reward_expr(rng);
    let gap = Expr::scale(
        rng.gen_range(0.0..=0.5),
        Expr::sum(vec![Expr::constant(1.0), Expr::min(vec![Expr::constant(1.0), Expr::abs(Expr::coord(0))])]),
    );
    let before = Expr::sum(vec![upper.clone(), Expr::neg(gap)]);
    PayoffSpec { lower: Expr::at_horizon(upper.clone(), before), upper, bound: None, modulus }
}

/// Index `x₀ ± x − c·t`, started in `[0.3, 1]`.
pub fn random_index_spec(rng: &mut ChaCha8Rng) -> IndexSpec {
    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    IndexSpec {
        expr: Expr::sum(vec![
            Expr::constant(rng.gen_range(0.3..=1.0)),
            Expr::scale(sign, Expr::coord(0)),
            Expr::scale(-rng.gen_range(0.0..=0.5), Expr::Time),
        ]),
        modulus: ModulusSpec::Lipschitz,
    }
}

pub fn instance_with(seed: u64, steps: usize, controls: usize, modulus: ModulusSpec) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tree = Arc::new(random_tree(&mut rng, steps, controls));
    let reward = random_reward_expr(&mut rng).field(&tree);
    let payoff = random_payoff_spec(&mut rng, modulus).resolve(&tree).unwrap();
    let index = random_index_spec(&mut rng).resolve(&tree).unwrap();
    Instance { seed, tree, reward, payoff, index }
}

/// Sizes `N ≤ 4`, `|C| ≤ 3`, without the `N = 4, |C| = 3` corner.
pub fn small_sizes(seed: u64) -> (usize, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let steps = rng.gen_range(1..=4);
    let controls = if steps == 4 { rng.gen_range(1..=2) } else { rng.gen_range(1..=3) };
    (steps, controls)
}

pub fn small_instance(seed: u64) -> Instance {
    let (steps, controls) = small_sizes(seed);
    instance_with(seed, steps, controls, ModulusSpec::Calibrated { p1: 1.0, p2: 1.0 })
}

/// Payoff equal to `values` strictly before `nu`, `at_nu` where `nu` stops and
/// a large negative number afterwards, so that every optimal rule stops by `nu`.
pub fn forced_by(tree: &TreeModel, nu: &StoppingTime, before: &[f64], at_nu: &[f64]) -> Vec<f64> {
    (0..tree.num_nodes())
        .map(|v| {
            if !nu.stopped_by(v) {
                before[v]
            } else if nu.stops_at(tree, v) {
                at_nu[v]
            } else {
                -1.0e6
            }
        })
        .collect()
}

/// Running maximum of `|ω_p − ω_q|` over steps `0..=m`, for every `m`.
pub fn running_distance(tree: &TreeModel, p: usize, q: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(tree.depth() + 1);
    let mut best: f64 = 0.0;
    for m in 0..=tree.depth() {
        let d = tree
            .path_pos(p, m)
            .iter()
            .zip(tree.path_pos(q, m))
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        best = best.max(d);
        out.push(best);
    }
    out
}

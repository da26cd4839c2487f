//! Path functionals on the tree: the payoff DSL, the metrics used to state
//! continuity, payoff and index specifications, and the derived payoff fields.

mod dsl;
mod interp;
mod metric;
mod payoff;

pub use dsl::{arc_distance, Expr, PathView};
pub use interp::{blend_end_step, blend_weight, hat_y_nk, script_y, script_y_n, stopped, y_nk};
pub use metric::{
    calibrate_constant, metric_dinf, node_dinf, path_distance, path_modulus, path_modulus_values,
    verify_path_modulus, verify_uniform_continuity, ContinuityReport,
};
pub(crate) use payoff::ceil_log2;
pub use payoff::{tau0, tau_n, tau_n_level, Index, IndexSpec, ModulusSpec, Payoff, PayoffSpec};

/// One value per tree node.
pub type ProcessField = Vec<f64>;

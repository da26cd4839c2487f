//! Discrete path space and the worst-case expectation operators.
//!
//! A [`TreeModel`] stores every history of increments up to the horizon. Each
//! control `(b, σ)` contributes two equally likely increments `b·dt ± σ·√dt`
//! applied to all coordinates at once, and increments shared by several
//! controls are merged so that the corresponding children are shared too.
//! The sublinear expectation is the backward maximum over controls of the
//! two-point average.

mod expectation;
mod grid;
mod modulus;
mod policy;
mod tree;

pub use expectation::{backward_induction, conditional_sup, nonlinear_expectation, one_step_argmax, one_step_sup};
pub use grid::TimeGrid;
pub use modulus::{
    analytic_chat, rho_hat_analytic, verify_modulus_bound, HatMode, Modulus, ModulusHat,
    ModulusReport,
};
pub use policy::ControlPolicy;
pub use tree::{Control, ControlSet, TreeModel, TreeStats, DEFAULT_NODE_CAP, INCREMENT_TOL};
pub(crate) use tree::{dist as tree_dist, norm as tree_norm};

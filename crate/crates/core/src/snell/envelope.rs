use serde::{Deserialize, Serialize};

use crate::lattice::{backward_induction, TreeModel};

/// Value of the optimal stopping problem at every node, with the payoff it envelopes.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvelopeField {
    pub values: Vec<f64>,
    pub payoff: Vec<f64>,
    /// `max |payoff|`.
    pub bound: f64,
}

/// JSON form of an envelope.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeExport {
    /// Envelope value by node id.
    pub values: Vec<f64>,
    pub bound: f64,
    /// Nodes where the envelope meets the payoff.
    pub exercise_region: Vec<usize>,
}

impl EnvelopeField {
    pub fn root(&self) -> f64 {
        self.values[0]
    }

    /// Nodes with `Z − Ŷ ≤ tol`.
    pub fn exercise_region(&self, tol: f64) -> Vec<usize> {
        (0..self.values.len()).filter(|&v| self.values[v] - self.payoff[v] <= tol).collect()
    }

    pub fn export(&self, tol: f64) -> EnvelopeExport {
        EnvelopeExport { values: self.values.clone(), bound: self.bound, exercise_region: self.exercise_region(tol) }
    }
}

/// `Z_T = Ŷ_T` and `Z = max(Ŷ, worst-case one-step expectation of Z)` before.
pub fn snell_envelope(tree: &TreeModel, payoff: &[f64]) -> EnvelopeField {
    assert_eq!(payoff.len(), tree.num_nodes(), "one payoff value per node");
    let values = backward_induction(tree, |node, cont| {
        if tree.is_terminal(node) {
            payoff[node]
        } else {
            payoff[node].max(cont())
        }
    });
    let bound = payoff.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    EnvelopeField { values, payoff: payoff.to_vec(), bound }
}

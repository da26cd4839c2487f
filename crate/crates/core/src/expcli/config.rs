use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cascade::CascadeConfig;
use crate::error::{Error, Result};
use crate::lattice::{Control, ControlSet, ModulusHat, TimeGrid, TreeModel, DEFAULT_NODE_CAP};
use crate::oracle::DEFAULT_SET_CAP;
use crate::processes::{Index, IndexSpec, Payoff, PayoffSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub horizon: f64,
    pub steps: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlsConfig {
    pub dim: usize,
    pub ell: f64,
    pub list: Vec<Control>,
}

/// Which companion modulus of the payoff the ledger uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RhoHatMode {
    /// Exact supremum on the tree.
    #[default]
    Exact,
    /// Parametric form with the constant fitted on the tree.
    Calibrated,
    /// Parametric form with the explicit constant.
    Analytic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChecksConfig {
    #[serde(default = "yes")]
    pub dpp: bool,
    #[serde(default = "yes")]
    pub martingale: bool,
    #[serde(default = "yes")]
    pub ledger: bool,
    #[serde(default)]
    pub oracle: bool,
    #[serde(default = "yes")]
    pub modulus: bool,
}

impl Default for ChecksConfig {
    fn default() -> Self {
        Self { dpp: true, martingale: true, ledger: true, oracle: false, modulus: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapsConfig {
    #[serde(default = "default_node_cap")]
    pub nodes: u64,
    #[serde(default = "default_set_cap")]
    pub oracle_set: usize,
}

impl Default for CapsConfig {
    fn default() -> Self {
        Self { nodes: default_node_cap(), oracle_set: DEFAULT_SET_CAP }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CascadeSizes {
    pub n_max: usize,
    pub k_max: usize,
}

fn yes() -> bool {
    true
}

fn default_node_cap() -> u64 {
    DEFAULT_NODE_CAP as u64
}

fn default_set_cap() -> usize {
    DEFAULT_SET_CAP
}

fn default_random_family() -> usize {
    8
}

/// One experiment, as read from a JSON file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub grid: GridConfig,
    pub controls: ControlsConfig,
    pub payoff: PayoffSpec,
    pub index: IndexSpec,
    #[serde(default)]
    pub rho_hat: RhoHatMode,
    pub cascade: CascadeSizes,
    #[serde(default)]
    pub checks: ChecksConfig,
    #[serde(default)]
    pub seed: u64,
    /// Number of seeded random stopping rules added to the check family.
    #[serde(default = "default_random_family")]
    pub random_family: usize,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub caps: CapsConfig,
}

/// Validated inputs ready for computation.
pub struct Prepared {
    pub tree: Arc<TreeModel>,
    pub payoff: Payoff,
    pub index: Index,
    pub rho_hat: ModulusHat,
    pub cascade: CascadeConfig,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.grid.horizon, self.grid.steps)
    }

    pub fn control_set(&self) -> Result<ControlSet> {
        ControlSet::new(self.controls.dim, self.controls.list.clone(), self.controls.ell)
    }

    /// Checks everything that does not need the tree.
    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::Config("name must not be empty".into()));
        }
        self.grid()?;
        self.control_set()?;
        let CascadeSizes { n_max, k_max } = self.cascade;
        if n_max == 0 || k_max == 0 || k_max > 60 {
            return Err(Error::Config(format!("cascade needs 1 ≤ n_max and 1 ≤ k_max ≤ 60, got n_max = {n_max}, k_max = {k_max}")));
        }
        let dim = self.controls.dim;
        self.payoff.lower.validate(dim)?;
        self.payoff.upper.validate(dim)?;
        self.index.expr.validate(dim)?;
        Ok(())
    }

    /// Validates, builds the tree and resolves the payoff, index and companion modulus.
    pub fn prepare(&self) -> Result<Prepared> {
        self.validate()?;
        let tree = Arc::new(TreeModel::build_with_cap(self.grid()?, self.control_set()?, self.caps.nodes as u128)?);
        let payoff = self.payoff.resolve(&tree)?;
        let index = self.index.resolve(&tree)?;
        let rho_hat = match self.rho_hat {
            RhoHatMode::Exact => ModulusHat::exact(tree.clone(), payoff.rho)?,
            RhoHatMode::Calibrated => ModulusHat::calibrated(&tree, payoff.rho)?,
            RhoHatMode::Analytic => ModulusHat::analytic(payoff.rho, self.controls.ell, self.controls.dim),
        };
        let cascade = CascadeConfig { n_max: self.cascade.n_max, k_max: self.cascade.k_max, seed: self.seed };
        Ok(Prepared { tree, payoff, index, rho_hat, cascade })
    }
}

//! Stopping rules on the tree and the Lipschitz constructions built from them.

mod lipschitz;
mod paths;
mod sandwich;
mod sequence;
mod stopping;
mod window;

pub use lipschitz::{verify_lipschitz, LipschitzReport, LipschitzVerdict, PairCheck};
pub use sandwich::{check_sandwich_premise, sandwich_stopping_time, SANDWICH_PATH_CAP};
pub use sequence::{build_wp_sequence, WpSequence, WpSummary, WpTerm};
pub use stopping::{approach_time, stop_compose, Compose, LipschitzCert, LipschitzScope, StoppingTime, StoppingTimeExport};
pub use window::{lipschitz_window_time, WindowParams};

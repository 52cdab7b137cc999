//! Scenario runner for the solitonscope toolkit: TOML experiment configs, a
//! staged pipeline that writes CSV/JSON artifacts, and pass/fail reports
//! recomputed from those artifacts.

pub mod artifacts;
pub mod classify;
pub mod config;
pub mod error;
pub mod pipeline;
pub mod report;
pub mod scenario;

pub use classify::{classify_flux, classify_history, Verdict};
pub use config::{ExperimentConfig, Scenario, Stage, Thresholds};
pub use error::{CliError, CliResult};
pub use pipeline::{run, RunOptions, RunOutcome};
pub use report::{evaluate, CheckStatus, RunReport};

//! Scenario-driven study orchestration.
//!
//! `scenario` reads and validates the TOML study description, `sweep` runs
//! the (range × power × slot) grid against the solvers, and `reports` turns
//! the results into a stable family of CSV files plus a run manifest. The
//! chain is deterministic end to end: running the same scenario twice must
//! produce byte-identical files.

mod reports;
mod scenario;
mod sweep;

pub use reports::emit_reports;
pub use scenario::{
    default_scenario, load_scenario, ConnectionConfig, ConstellationConfig, GroundStationConfig,
    PowerSetting, Scenario, SolverChoice, SweepConfig, DEFAULT_LISL_RANGES_KM, SCHEMA_VERSION,
};
pub use sweep::{run_sweep, CellResult, ResolvedSolver, SweepResult};

use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::linkbudget::LinkBudgetError;
use crate::netgraph::NetGraphError;
use crate::optimizer::OptimizerError;
use crate::orbital::OrbitalError;

#[derive(Debug, Error)]
pub enum StudioError {
    /// The scenario violates a documented invariant. The message names it.
    #[error("scenario: {0}")]
    Scenario(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        source: Box<toml::de::Error>,
    },
    #[error(transparent)]
    Orbital(#[from] OrbitalError),
    #[error(transparent)]
    LinkBudget(#[from] LinkBudgetError),
    #[error(transparent)]
    NetGraph(#[from] NetGraphError),
    #[error(transparent)]
    Optimizer(#[from] OptimizerError),
}

impl StudioError {
    /// True for errors in the user's input rather than in the run itself —
    /// the distinction behind the process exit codes.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            StudioError::Scenario(_)
                | StudioError::Parse { .. }
                | StudioError::Orbital(_)
                | StudioError::LinkBudget(_)
        )
    }
}

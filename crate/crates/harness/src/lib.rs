//! Experiment harness: configuration, synthetic demonstrations, seeded batch
//! runs and report emission.

pub mod batch;
pub mod config;
pub mod demos;
pub mod report;

use thiserror::Error;

pub use batch::{expand_cells, prepare, run_batch, run_single, Cell, Prepared};
pub use config::ExperimentConfig;
pub use demos::{generate_paint_goal, generate_wax_demos};
pub use report::{emit_reports, AggregateReport, ConfigurationReport};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    /// Process exit code: 1 for configuration problems, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 1,
            _ => 2,
        }
    }
}

macro_rules! runtime_from {
    ($($t:ty),*) => {$(
        impl From<$t> for HarnessError {
            fn from(e: $t) -> Self {
                HarnessError::Runtime(e.to_string())
            }
        }
    )*};
}

runtime_from!(
    cgda_core::TrajectoryError,
    cgda_core::SimError,
    cgda_core::IetError,
    cgda_core::ConstraintError
);

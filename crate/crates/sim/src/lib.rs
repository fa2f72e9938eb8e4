//! Seeded discrete-time simulator and experiment presets for cooperative
//! federated learning at the wireless edge.

pub mod config;
pub mod engine;
pub mod metrics;
pub mod presets;
pub mod scenario;

pub use config::{RateOracleKind, SimConfig};
pub use engine::{oracle_report, run, Engine, RunOutput};
pub use metrics::{MetricsRow, SummaryRow};

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] cflmec_core::Error),
    #[error("slot {slot}: infeasible decision ({what})")]
    Infeasible { slot: u64, what: String },
    #[error("unknown preset `{0}` (expected fig4, fig5, fig6, fig7 or fig8)")]
    UnknownPreset(String),
    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error("{0}: {1}")]
    Csv(String, #[source] csv::Error),
}

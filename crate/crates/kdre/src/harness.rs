//! Experiment orchestration: config ingestion, end-to-end runs, error
//! metrics, CSV formats, the Monte-Carlo validation check, and plot-script
//! emission. The CLI is a thin wrapper over this module.

use thiserror::Error;

use crate::error::KdreError;

pub mod check;
pub mod config;
pub mod csv;
pub mod experiment;
pub mod metrics;
pub mod plot;

pub use check::{run_check, CheckParams, CheckPointResult, CheckReport};
pub use config::{Experiment, ExperimentConfig};
pub use csv::{read_samples_csv, write_field_csv, write_samples_csv};
pub use experiment::{run_experiment, ExperimentRun, X_STREAM_ID, Y_STREAM_ID};
pub use metrics::{compute_metrics, ChannelMetrics, MetricsReport};
pub use plot::gnuplot_script;

/// Harness-level errors. The CLI maps these onto exit codes: config
/// problems exit 2, I/O and data-file problems exit 3.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config field `{field}`: {reason}")]
    Config { field: String, reason: String },
    #[error("config parse error: {0}")]
    ConfigParse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("csv line {line}: {reason}")]
    Csv { line: usize, reason: String },
    #[error("field has no `true` channel to compare against")]
    MissingTrueChannel,
    #[error("internal model error: {0}")]
    Model(#[from] KdreError),
}

impl HarnessError {
    pub(crate) fn config(field: &str, reason: impl Into<String>) -> Self {
        HarnessError::Config {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}

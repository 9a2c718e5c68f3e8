//! Configured experiment runs, trace files and reports.

mod config;
mod figure1;
mod run;
mod trace_file;

use thiserror::Error;

use crate::admm::AdmmError;
use crate::analysis::AnalysisError;
use crate::graph::GraphError;
use crate::objectives::ObjectiveError;
use crate::spectral::SpectralError;

pub use config::{
    AdmmSpec, CheckSpec, ExperimentConfig, GraphSpec, InitSpec, NodeObjective, ObjectiveSpec,
    OutputSpec, Penalty, PenaltySpec,
};
pub use figure1::{figure1_configs, run_figure1, Figure1Outcome, FIGURE1_C_SCALE, FIGURE1_DEGREES, FIGURE1_MIN_R2};
pub use run::{run_experiment, CheckOutcome, ExperimentOutcome};
pub use trace_file::{parse_trace, replay_check, TraceFile, TRACE_COLUMNS, TRACE_VERSION};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config parse error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    ConfigParse { line: Option<usize>, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("trace file line {line}: {message}")]
    TraceParse { line: usize, message: String },
    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error(transparent)]
    Admm(#[from] AdmmError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

pub(crate) fn write_file(path: &std::path::Path, contents: &str) -> Result<(), ExperimentError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| ExperimentError::Io {
                path: dir.display().to_string(),
                message: e.to_string(),
            })?;
        }
    }
    std::fs::write(path, contents).map_err(|e| ExperimentError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

//! Convergence certificates evaluated against recorded traces.

mod bounds;
mod checks;
mod fit;
mod rate;

use thiserror::Error;

use crate::objectives::ObjectiveError;
use crate::spectral::SpectralError;

pub use bounds::{
    laplacian_network_bounds, sublinear_bounds, LaplacianBoundsReport, SublinearBound,
    SANDWICH_SLACK,
};
pub use checks::{
    aux_sequences, contraction_check, diagnostics, sublinear_check, telescoping_check,
    AuxSequences, ContractionReport, DiagnosticRow, SublinearReport, TelescopingReport,
    BOUND_SLACK, DEFAULT_CONTRACTION_FLOOR,
};
pub use fit::{log_error_fit, LogFit};
pub use rate::{
    beta_star, certify, delta_at_beta_star, delta_bound, delta_terms, optimize_rate,
    RateCertificate,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Objective,
    Feasibility,
}

impl std::fmt::Display for BoundKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BoundKind::Objective => write!(f, "objective"),
            BoundKind::Feasibility => write!(f, "feasibility"),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("beta must lie in (0, 1), got {0}")]
    InvalidBeta(f64),
    #[error("penalty c must be positive and finite, got {0}")]
    InvalidC(f64),
    #[error("need 0 < nu <= L, got nu = {nu}, L = {lipschitz}")]
    InvalidCurvature { nu: f64, lipschitz: f64 },
    #[error("rate optimizer hit the bracket edge at c = {c:e}")]
    OptimizationBracketFailure { c: f64 },
    #[error("numeric optimum delta = {numeric} disagrees with closed form {closed_form}")]
    CrossCheckFailed { numeric: f64, closed_form: f64 },
    #[error("communication matrix is not the graph Laplacian")]
    NotLaplacian,
    #[error("contraction violated at t = {t}: ratio {ratio} > bound {bound}")]
    ContractionViolated { t: usize, ratio: f64, bound: f64 },
    #[error("{kind} bound violated at T = {t}: {lhs:e} > {rhs:e}")]
    BoundViolated {
        t: usize,
        kind: BoundKind,
        lhs: f64,
        rhs: f64,
    },
    #[error("telescoping inequality violated at t = {t} (anchor {anchor}): slack {slack:e}")]
    TelescopingViolated {
        t: usize,
        anchor: &'static str,
        slack: f64,
    },
    #[error("log-error fit needs at least two positive errors")]
    FitFailed,
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
}

//! Node-based ADMM for consensus optimization over undirected networks, with the spectral
//! machinery needed to certify its convergence rates.

pub mod admm;
pub mod analysis;
pub mod experiment;
pub mod graph;
pub mod objectives;
pub mod spectral;

pub use graph::{CommunicationMatrix, Graph, GraphError, GraphKind};
pub use objectives::{LocalObjective, ObjectiveError};
pub use spectral::{SpectralData, SpectralError};

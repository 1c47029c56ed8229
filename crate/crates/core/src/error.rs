use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = DscError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum DscError {
    #[error("cell {cell}: face {face} points inward (vertex labeling violated)")]
    Orientation { cell: usize, face: usize },
    #[error("cell {cell}: degenerate cell, volume {volume:e}")]
    DegenerateCell { cell: usize, volume: f64 },
    #[error("cell {cell}: singular node-vector matrix, det {det:e}")]
    SingularCell { cell: usize, det: f64 },
    #[error("non-conforming mesh: {0}")]
    NonConformingMesh(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("zero denominator at interface cell {cell} face {face}")]
    ZeroDenominator { cell: usize, face: usize },
    #[error("zero diagonal at cell {cell} face {face}")]
    ZeroDiagonal { cell: usize, face: usize },
    #[error("non-finite {field} at cell {cell} (step {step})")]
    NonFiniteState {
        field: &'static str,
        cell: usize,
        step: u64,
    },
    #[error("divergence cleaning did not converge after {outer} iterations, residual {residual:e}")]
    NoConvergence { outer: usize, residual: f64 },
    #[error("config: {0}")]
    Config(String),
    #[error("mesh file {path}, line {line}: {msg}")]
    MeshFormat { path: PathBuf, line: usize, msg: String },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("step {step}: {source}")]
    AtStep {
        step: u64,
        #[source]
        source: Box<DscError>,
    },
}

impl DscError {
    /// Process exit code used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            DscError::Config(_)
            | DscError::InvalidParameter(_)
            | DscError::MeshFormat { .. }
            | DscError::NonConformingMesh(_)
            | DscError::Orientation { .. }
            | DscError::DegenerateCell { .. }
            | DscError::SingularCell { .. } => 1,
            DscError::NoConvergence { .. } => 3,
            DscError::AtStep { source, .. } => source.exit_code(),
            _ => 2,
        }
    }
}

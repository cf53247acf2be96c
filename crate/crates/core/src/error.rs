use thiserror::Error;

use crate::linalg::SolveReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("point ({x}, {y}) lies outside the mesh domain")]
    PointOutside { x: f64, y: f64 },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("value outside the domain of definition: {0}")]
    Domain(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("time step must be positive, got {0}")]
    InvalidTimeStep(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("linear solver failed: {message} ({report:?})")]
    Solver { message: String, report: SolveReport },

    #[error("assembly produced a matrix without M-matrix structure: {0}")]
    Structure(String),

    #[error("negative {field} value {value:e} in cell {cell} after step {step}")]
    Negativity {
        field: &'static str,
        value: f64,
        cell: usize,
        step: usize,
    },

    #[error("invariant violated at step {step}: {message}")]
    Invariant { step: usize, message: String },

    #[error("coupled oracle did not converge after {iterations} iterations (last change {residual:e})")]
    OracleDiverged { iterations: usize, residual: f64 },

    #[error("coupled oracle refused: {cells} cells exceeds the limit of {limit}")]
    OracleTooLarge { cells: usize, limit: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("convergence study aborted: {message}")]
    StudyAborted {
        message: String,
        partial: Box<crate::sim::StudyReport>,
    },

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

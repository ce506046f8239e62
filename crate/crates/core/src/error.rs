use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FsdbError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate shape-function denominator: |kappa| = {kappa:e} below {threshold:e}")]
    DegenerateKappa { kappa: f64, threshold: f64 },

    #[error("axial equilibration did not converge after {iterations} inner iterations (spread {spread:e})")]
    AxialEquilibrium { iterations: usize, spread: f64 },

    #[error("singular system: {0}")]
    SingularSystem(String),

    #[error("step {step} failed to converge after {halvings} halvings")]
    StepFailure { step: usize, halvings: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("model validation failed:\n  - {}", .0.join("\n  - "))]
    Validation(Vec<String>),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed results file {path}: {message}")]
    MalformedResults { path: PathBuf, message: String },
}

impl FsdbError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        FsdbError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, FsdbError>;

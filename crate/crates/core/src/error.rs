use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid quadrature order {0}: must be a positive even integer")]
    QuadratureOrder(usize),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("near-zero pivot {pivot:e} at row {row} of tridiagonal system")]
    ZeroPivot { row: usize, pivot: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("case (N={sn_order}, cells={num_cells}, c={scattering_ratio}) has no converged solver")]
    NoConvergedSolver {
        sn_order: usize,
        num_cells: usize,
        scattering_ratio: f64,
    },

    #[error("case (N={sn_order}, cells={num_cells}, c={scattering_ratio}) has no {criterion} label")]
    Unlabeled {
        sn_order: usize,
        num_cells: usize,
        scattering_ratio: f64,
        criterion: &'static str,
    },

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("invalid hyperparameter: {0}")]
    Hyperparameter(String),

    #[error("training failed: {0}")]
    Training(String),

    #[error("non-finite loss at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },

    #[error("{0}")]
    WrongModel(String),

    #[error("stratification infeasible: class {class} has {count} samples but {folds} folds requested")]
    Stratification {
        class: String,
        count: usize,
        folds: usize,
    },

    #[error("invalid metric input: {0}")]
    Metric(String),

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

use thiserror::Error;

/// Errors produced by assembly, factorization and the iterative solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {context} (expected {expected}, got {actual})")]
    Dimension {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid sparse structure: {0}")]
    InvalidStructure(String),

    #[error("LU breakdown: pivot {pivot:e} in row {row} is below threshold {threshold:e}")]
    LuBreakdown { row: usize, pivot: f64, threshold: f64 },

    #[error("IC(0) breakdown: nonpositive pivot in row {row} even with diagonal shift {shift}")]
    Ic0Breakdown { row: usize, shift: f64 },

    #[error("matrix is singular to working precision (column {column})")]
    Singular { column: usize },

    #[error("QR iteration did not converge for eigenvalue {index} after {iterations} iterations")]
    EigenNoConvergence { index: usize, iterations: usize },

    #[error("CG breakdown at iteration {iteration}: p'Ap = {curvature:e} is not positive")]
    CgBreakdown { iteration: usize, curvature: f64 },

    #[error("BiCGstab(2) breakdown at cycle {cycle}: {reason}")]
    BicgstabBreakdown { cycle: usize, reason: &'static str },

    #[error("inner solve failed to converge: {iterations} iterations, relative residual {residual:e}")]
    InnerNotConverged { iterations: usize, residual: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid material: {0}")]
    InvalidMaterial(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("problem too large for {what}: size {size} exceeds cap {cap}")]
    SizeCap {
        what: &'static str,
        size: usize,
        cap: usize,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("matrix market: {0}")]
    MatrixMarket(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(context: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::Dimension {
            context,
            expected,
            actual,
        });
    }
    Ok(())
}

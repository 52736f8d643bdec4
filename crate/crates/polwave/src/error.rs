//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide error type.
///
/// Variants are grouped by how the batch front-end maps them to exit codes:
/// configuration/validation problems, violated spectral assumptions, and
/// runtime blow-up are distinguished so callers can react differently.
#[derive(Debug, Error)]
pub enum Error {
    #[error("structural check failed for {matrix}: max deviation {deviation:.3e}")]
    Structural { matrix: String, deviation: f64 },

    #[error("L_{j} is numerically singular (sigma_min = {sigma_min:.3e})")]
    Assumption { j: i64, sigma_min: f64 },

    #[error("selected eigenvalue branch is degenerate (gap = {gap:.3e})")]
    DegenerateBranch { gap: f64 },

    #[error("eigenvalue branch tracking lost between k-points (max overlap {overlap:.3})")]
    BranchTracking { overlap: f64 },

    #[error("envelope does not decay at the torus boundary (|alpha| = {boundary:.3e})")]
    Periodization { boundary: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("field leaves the range of P (defect {defect:.3e})")]
    Projection { defect: f64 },

    #[error("norm {norm:.3e} exceeds the blow-up threshold at time {time}")]
    Blowup { norm: f64, time: f64 },

    #[error("inadmissible epsilon: kappa_{axis} L_{axis} / (2 pi eps) = {value} is not an integer")]
    Admissibility { axis: usize, value: f64 },

    #[error("hierarchy is at tau = {have} but tau = {want} was requested")]
    TauMismatch { have: f64, want: f64 },

    #[error("derivative recursion exceeded depth {0}: triangular structure violated")]
    RecursionDepth(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command-line front-end.
    ///
    /// 2 = validation / configuration, 3 = violated assumption, 4 = blow-up.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Structural { .. }
            | Error::Periodization { .. }
            | Error::GridMismatch(_)
            | Error::Admissibility { .. }
            | Error::TauMismatch { .. }
            | Error::Config(_)
            | Error::Io(_) => 2,
            Error::Assumption { .. }
            | Error::DegenerateBranch { .. }
            | Error::BranchTracking { .. }
            | Error::Projection { .. }
            | Error::RecursionDepth(_) => 3,
            Error::Blowup { .. } => 4,
        }
    }
}

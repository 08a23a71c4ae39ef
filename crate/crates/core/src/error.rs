//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by basis construction, Hamiltonian assembly, propagation
/// and protocol orchestration.
#[derive(Debug, Error)]
pub enum Error {
    /// The requested basis would exceed the dense-matrix budget.
    #[error("basis dimension {dim} exceeds the 2^20 dense-state limit")]
    DimensionOverflow { dim: u128 },

    /// An occupation or operator does not fit the basis sector.
    #[error("sector violation: {0}")]
    SectorViolation(String),

    /// Operands over incompatible bases or of incompatible shapes.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A matrix expected to be Hermitian failed the symmetry check.
    #[error("non-Hermitian input: max |H - H^dag| = {deviation:.3e}")]
    NonHermitianInput { deviation: f64 },

    /// The explicit integrator lost more norm than the quality gate allows.
    #[error("norm drift {drift:.3e} exceeds the {limit:.1e} integration gate")]
    NormDriftExceeded { drift: f64, limit: f64 },

    /// A decay rate was negative.
    #[error("negative decay rate {0} ps^-1")]
    NegativeRate(f64),

    /// No local maximum found in a recorded observable series.
    #[error("no resonance found in series '{0}'")]
    NoResonanceFound(String),

    /// No local minimum found in a recorded observable series.
    #[error("no minimum found in series '{0}'")]
    NoMinimumFound(String),

    /// A 4x4 matrix failed the density-matrix checks.
    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    /// A probability or budget factor fell outside [0, 1].
    #[error("value {value} for '{name}' outside [0, 1]")]
    OutOfRange { name: &'static str, value: f64 },

    /// Arm resonance times differ beyond the re-blocking tolerance.
    #[error("arm resonance times differ by {delta_ps:.4} ps (tolerance {tol_ps} ps)")]
    ArmMismatch { delta_ps: f64, tol_ps: f64 },

    /// A precondition on an argument was violated.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Scenario configuration parse or validation failure.
    #[error("config: {0}")]
    Config(String),

    /// The underlying LAPACK call failed.
    #[error("linear algebra backend: {0}")]
    Linalg(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(e.to_string())
    }
}

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid truncation dimension {dim}: every mode needs at least 2 levels")]
    InvalidDimension { dim: usize },

    #[error(
        "truncation inadequate: |alpha|^2 = {alpha_sq:.4} needs dim >= {required_dim}, got {dim}"
    )]
    TruncationInadequate {
        alpha_sq: f64,
        dim: usize,
        required_dim: usize,
    },

    #[error("dimension mismatch: expected dims {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: Vec<usize>,
        found: Vec<usize>,
    },

    #[error("mode index {index} out of range for a {modes}-mode state")]
    ModeIndex { index: usize, modes: usize },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("not a density matrix: {0}")]
    NotADensityMatrix(String),

    #[error("not a normalized state vector: norm = {norm}")]
    NotNormalized { norm: f64 },

    #[error("integrator failure: {0}")]
    Integrator(String),

    #[error("incomplete pump reset: residual population {residual:.3e} >= threshold {threshold:.3e}")]
    IncompleteReset { residual: f64, threshold: f64 },
}

impl Error {
    /// True for failures of the numerics (truncation, integration, reset),
    /// as opposed to rejected inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::TruncationInadequate { .. }
                | Error::Integrator(_)
                | Error::IncompleteReset { .. }
                | Error::NotADensityMatrix(_)
        )
    }

    pub(crate) fn param(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason,
        }
    }
}

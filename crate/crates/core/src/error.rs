use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not positive semi-definite (min eigenvalue {min_eigenvalue:e}, tolerance {tolerance:e})")]
    NotPsd { min_eigenvalue: f64, tolerance: f64 },

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPd { pivot: usize, value: f64 },

    #[error("matrix is not symmetric: |a[{i}][{j}] - a[{j}][{i}]| = {gap:e}")]
    NotSymmetric { i: usize, j: usize, gap: f64 },

    #[error("vector is not unit length (norm {norm})")]
    NotUnit { norm: f64 },

    #[error("basis is not orthonormal (max Gram deviation {deviation:e})")]
    BasisNotOrthonormal { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("2x2 block is numerically singular (det {det:e})")]
    SingularBlock { det: f64 },

    #[error("only {accepted} proposals accepted, at least {required} required")]
    TooFewAcceptances { accepted: u64, required: u64 },

    #[error("degenerate random draw after {attempts} attempts")]
    DegenerateDraw { attempts: usize },

    #[error("theta lies in the orthogonal complement of E (|P_E theta| = {projection_norm:e})")]
    ThetaInEPerp { projection_norm: f64 },

    #[error("unknown detector '{name}' (available: {})", available.join(", "))]
    UnknownDetector {
        name: String,
        available: Vec<String>,
    },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParams(msg.into())
    }
}

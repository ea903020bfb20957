use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Why a family of vectors fails to span a standard subspace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NotStandardReason {
    TooFewGenerators,
    TooManyGenerators,
    /// `K ∩ iK ≠ {0}`: the basis matrix is singular over `ℂ`.
    ComplexDegenerate,
}

impl fmt::Display for NotStandardReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::TooFewGenerators => "TooFewGenerators",
            Self::TooManyGenerators => "TooManyGenerators",
            Self::ComplexDegenerate => "ComplexDegenerate",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("vectors are linearly dependent over the reals (pivot {index}, relative residual {residual:.3e})")]
    RankDeficient { index: usize, residual: f64 },

    #[error("operator is numerically singular (smallest/largest eigenvalue ratio {ratio:.3e})")]
    Singular { ratio: f64 },

    #[error("not a standard subspace: {reason}")]
    NotStandard { reason: NotStandardReason },

    #[error("subspace is not a factor: the modular operator has eigenvalue 1")]
    NonFactor,

    #[error("matrix expected positive semi-definite has eigenvalue {eigenvalue:.3e} (scale {scale:.3e})")]
    NotPsd { eigenvalue: f64, scale: f64 },

    #[error("R1 Q^-1 R2^-1 Q differs from Q^dagger Q by relative residual {residual:.3e}")]
    MismatchWithDagger { residual: f64 },

    #[error("modular operator has an eigenvalue at 1 (distance {distance:.3e}); coth(log(delta)/4) is singular")]
    SpectrumAtOne { distance: f64 },

    #[error("lambda = {lambda} lies within {distance:.3e} of the modular spectrum")]
    SpectrumHit { lambda: String, distance: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("identity `{name}` violated: relative residual {residual:.3e} exceeds {tolerance:.1e}")]
    IdentityCheckFailed { name: String, residual: f64, tolerance: f64 },

    #[error("Galerkin models are incompatible: {0}")]
    ModelMismatch(String),

    #[error("mass must be non-negative, got {0}")]
    MassNegative(f64),

    #[error(
        "quadrature did not converge: successive levels {previous:.6e} and {current:.6e} differ by {relative:.3e}"
    )]
    QuadratureNotConverged { previous: f64, current: f64, relative: f64 },

    #[error("unsupported: {0}")]
    ExplicitlyUnsupported(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

//! Default numerical tolerances.

/// Relative tolerance for involution and reconstruction checks.
pub const RECONSTRUCTION: f64 = 1e-10;

/// `cond(δ)` above which a [`crate::hilbert::ConditioningWarning`] is attached.
pub const CONDITIONING_WARNING: f64 = 1e12;

/// Smallest admissible `λ_min/λ_max` of `δ` before it is declared singular.
pub const SINGULAR_RATIO: f64 = 1e-15;

/// Pivot threshold (relative to the input norm) of real Gram–Schmidt.
pub const RANK: f64 = 1e-10;

/// Smallest admissible `σ_min/σ_max` of a basis matrix over `ℂ`.
pub const COMPLEX_RANK: f64 = 1e-12;

/// Relative width of the eigenvalue-1 band: `|λ - 1| ≤ EIGEN_ONE · (1 + ‖δ‖)`.
pub const EIGEN_ONE: f64 = 1e-8;

/// Negative eigenvalues above `-PSD_CLIP · ‖M‖` are clipped to zero.
pub const PSD_CLIP: f64 = 1e-10;

/// Relative tolerance of the operator identities checked inside criteria.
pub const IDENTITY: f64 = 1e-8;

/// Symplectic-form preservation, relative to unit-normalised bases.
pub const SYMPLECTIC: f64 = 1e-9;

/// Relative Frobenius residual `‖a - b‖ / max(‖a‖, ‖b‖, 1)`.
pub fn rel_residual<T>(a: &nalgebra::DMatrix<T>, b: &nalgebra::DMatrix<T>) -> f64
where
    T: nalgebra::ComplexField<RealField = f64>,
{
    let diff = (a - b).norm();
    let scale = a.norm().max(b.norm()).max(1.0);
    diff / scale
}

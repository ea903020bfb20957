//! Standard subspaces and their modular data.
//!
//! A real subspace `K ⊂ ℂ^N` with `dim_ℝ K = N` is standard exactly when its
//! basis matrix is invertible over `ℂ`. The Tomita operator
//! `s(h + ik) = h − ik` then has matrix `B·conj(B⁻¹)`, and everything else
//! (`j`, `δ`, the polariser `R`, `θ`, `γ`, the spectral projections) is a
//! functional calculus on the cached eigendecomposition of `δ`.

mod spec_file;

pub use spec_file::{format_spec, parse_complex, parse_spec};

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, NotStandardReason, Result};
use crate::hilbert::{
    antilinear_polar, columns, conj_mat, re_inner, real_orthonormalize_with_transform, real_span_basis, AntilinearMap,
    CMat, CVec, ComplexSpace, ConditioningWarning, HermitianEigen, LinearMap, RMat, C64, I,
};
use crate::tol;

/// Modular objects of one standard subspace, all acting on `ℂ^N`.
#[derive(Debug, Clone)]
pub struct ModularData {
    pub s: AntilinearMap,
    pub j: AntilinearMap,
    pub delta: LinearMap,
    pub delta_eigen: HermitianEigen,
    /// Polariser `R = i(δ − 1)(δ + 1)⁻¹`.
    pub r: LinearMap,
    /// `tan(θ/2) = exp(−½|log δ|)`
    pub theta: LinearMap,
    /// `γ = sgn log δ`, with `sgn 0 = 0` on the eigenvalue-1 band.
    pub gamma: LinearMap,
    pub e_minus: LinearMap,
    pub e_one: LinearMap,
    pub e_plus: LinearMap,
    /// Half-width of the eigenvalue-1 band.
    pub eig_one_tol: f64,
    pub warning: Option<ConditioningWarning>,
}

impl ModularData {
    fn from_tomita(s: AntilinearMap) -> Result<Self> {
        let polar = antilinear_polar(&s)?;
        let eigen = polar.eigen;
        let band = tol::EIGEN_ONE * (1.0 + eigen.max());
        let at_one = |l: f64| (l - 1.0).abs() <= band;
        let real = |x: f64| C64::new(x, 0.0);

        let r = eigen.apply_fn(|l| I * ((l - 1.0) / (l + 1.0)));
        let theta =
            eigen.apply_fn(
                |l| {
                    if at_one(l) {
                        real(FRAC_PI_2)
                    } else {
                        real(2.0 * (-0.5 * l.ln().abs()).exp().atan())
                    }
                },
            );
        let gamma = eigen.apply_fn(|l| if at_one(l) { real(0.0) } else { real(l.ln().signum()) });
        let e_minus = eigen.projection(|l| l < 1.0 && !at_one(l));
        let e_one = eigen.projection(at_one);
        let e_plus = eigen.projection(|l| l > 1.0 && !at_one(l));

        Ok(Self {
            s,
            j: polar.j,
            delta: polar.delta,
            r: LinearMap::new(r),
            theta: LinearMap::new(theta),
            gamma: LinearMap::new(gamma),
            e_minus: LinearMap::new(e_minus),
            e_one: LinearMap::new(e_one),
            e_plus: LinearMap::new(e_plus),
            eig_one_tol: band,
            warning: polar.warning,
            delta_eigen: eigen,
        })
    }

    /// `f(δ)` through the cached eigendecomposition.
    pub fn func<F: Fn(f64) -> C64>(&self, f: F) -> LinearMap {
        LinearMap::new(self.delta_eigen.apply_fn(f))
    }

    pub fn spectrum(&self) -> &[f64] {
        &self.delta_eigen.values
    }

    /// Distance of the closest eigenvalue of `δ` to 1.
    pub fn distance_to_one(&self) -> f64 {
        self.spectrum().iter().map(|l| (l - 1.0).abs()).fold(f64::INFINITY, f64::min)
    }

    pub fn has_eigenvalue_one(&self) -> bool {
        self.distance_to_one() <= self.eig_one_tol
    }

    pub fn condition(&self) -> f64 {
        self.delta_eigen.max() / self.delta_eigen.min()
    }

    /// `‖s‖ = ‖δ^{1/2}‖`.
    pub fn tomita_norm(&self) -> f64 {
        self.delta_eigen.max().sqrt()
    }
}

/// A standard subspace `K ⊂ ℂ^N` given by a Re-orthonormal real basis.
#[derive(Debug, Clone)]
pub struct StandardSubspace {
    space: ComplexSpace,
    basis: Vec<CVec>,
    basis_matrix: CMat,
    basis_inverse: CMat,
    generator_transform: RMat,
    modular: ModularData,
    factor: bool,
    fixed_space: Vec<CVec>,
}

impl StandardSubspace {
    /// Builds `K` as the real span of `vectors`.
    ///
    /// The vectors are Re-orthonormalised in input order; there must be
    /// exactly `N` of them and the resulting basis matrix must be invertible
    /// over `ℂ`.
    pub fn from_real_span(space: ComplexSpace, vectors: &[CVec]) -> Result<Self> {
        let n = space.dim();
        if let Some(v) = vectors.iter().find(|v| v.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: format!("vectors of length {n}"),
                found: format!("length {}", v.len()),
            });
        }
        if vectors.len() < n {
            return Err(Error::NotStandard { reason: NotStandardReason::TooFewGenerators });
        }
        if vectors.len() > n {
            return Err(Error::NotStandard { reason: NotStandardReason::TooManyGenerators });
        }
        let (basis, generator_transform) = real_orthonormalize_with_transform(vectors)?;
        let basis_matrix = columns(&basis);

        let sv = basis_matrix.clone().singular_values();
        if sv.min() <= tol::COMPLEX_RANK * sv.max() {
            return Err(Error::NotStandard { reason: NotStandardReason::ComplexDegenerate });
        }
        let basis_inverse = basis_matrix
            .clone()
            .try_inverse()
            .ok_or(Error::NotStandard { reason: NotStandardReason::ComplexDegenerate })?;

        let s = AntilinearMap::new(&basis_matrix * conj_mat(&basis_inverse));
        let modular = ModularData::from_tomita(s).map_err(|e| match e {
            Error::Singular { .. } => Error::NotStandard { reason: NotStandardReason::ComplexDegenerate },
            other => other,
        })?;

        let mut k = Self {
            space,
            basis,
            basis_matrix,
            basis_inverse,
            generator_transform,
            modular,
            factor: true,
            fixed_space: Vec::new(),
        };
        k.fixed_space = k.compute_fixed_space();
        k.factor = k.fixed_space.is_empty();
        Ok(k)
    }

    fn compute_fixed_space(&self) -> Vec<CVec> {
        let eig = &self.modular.delta_eigen;
        let j = &self.modular.j;
        let mut candidates = Vec::new();
        for (idx, &l) in eig.values.iter().enumerate() {
            if (l - 1.0).abs() > self.modular.eig_one_tol {
                continue;
            }
            let h = eig.vectors.column(idx).clone_owned();
            let jh = j.apply(&h);
            candidates.push(&h + &jh);
            candidates.push((&h - &jh) * I);
        }
        let projected: Vec<CVec> = candidates.iter().map(|x| self.project(x)).collect();
        real_span_basis(&projected, 1e-8)
    }

    pub fn space(&self) -> ComplexSpace {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn basis(&self) -> &[CVec] {
        &self.basis
    }

    pub fn basis_matrix(&self) -> &CMat {
        &self.basis_matrix
    }

    /// Real upper-triangular `C` with `basis = generators · C`.
    pub fn generator_transform(&self) -> &RMat {
        &self.generator_transform
    }

    pub fn tomita_operator(&self) -> &AntilinearMap {
        &self.modular.s
    }

    pub fn modular_data(&self) -> &ModularData {
        &self.modular
    }

    /// `(K is a factor, real basis of K ∩ K′)`.
    pub fn is_factor(&self) -> (bool, &[CVec]) {
        (self.factor, &self.fixed_space)
    }

    pub fn factor(&self) -> bool {
        self.factor
    }

    /// Re-orthogonal projection onto `K`.
    pub fn project(&self, x: &CVec) -> CVec {
        let mut out = CVec::zeros(self.dim());
        for b in &self.basis {
            out.axpy(C64::new(re_inner(b, x), 0.0), b, C64::new(1.0, 0.0));
        }
        out
    }

    /// Norm of the component of `x` Re-orthogonal to `K`.
    pub fn distance(&self, x: &CVec) -> f64 {
        (x - self.project(x)).norm()
    }

    /// Whether every basis vector of `other` lies in `K`, and vice versa.
    pub fn same_span(&self, other: &StandardSubspace, tol: f64) -> bool {
        self.dim() == other.dim()
            && other.basis.iter().all(|b| self.distance(b) <= tol)
            && self.basis.iter().all(|b| other.distance(b) <= tol)
    }

    /// Matrix of a complex-linear operator in the basis of `K`: `B⁻¹ M B`.
    pub fn to_k_basis(&self, m: &CMat) -> CMat {
        &self.basis_inverse * m * &self.basis_matrix
    }

    /// K-basis matrix of `f(δ)`.
    pub fn func_k_basis<F: Fn(f64) -> C64>(&self, f: F) -> CMat {
        self.to_k_basis(self.modular.func(f).matrix())
    }

    /// The real matrix of `R` in the Re-orthonormal basis, from the functional
    /// calculus. `R` preserves `K`, so the imaginary part is discarded.
    pub fn polariser_k_basis(&self) -> RMat {
        self.to_k_basis(self.modular.r.matrix()).map(|z| z.re)
    }

    /// `Im⟨bᵢ, bₖ⟩`.
    pub fn symplectic_form(&self) -> RMat {
        let g = self.basis_matrix.adjoint() * &self.basis_matrix;
        g.map(|z| z.im)
    }

    /// The symplectic complement `K′ = jK`, with `Im⟨bᵢ, j bₖ⟩ = 0` verified.
    pub fn symplectic_complement(&self) -> Result<StandardSubspace> {
        let j = &self.modular.j;
        let images: Vec<CVec> = self.basis.iter().map(|b| j.apply(b)).collect();
        let mut worst = 0.0_f64;
        for b in &self.basis {
            for jb in &images {
                worst = worst.max(b.dotc(jb).im.abs());
            }
        }
        if worst > tol::SYMPLECTIC {
            return Err(Error::IdentityCheckFailed {
                name: "Im<b, j b'> = 0".into(),
                residual: worst,
                tolerance: tol::SYMPLECTIC,
            });
        }
        StandardSubspace::from_real_span(self.space, &images)
    }

    /// `R⁻¹ = −i(δ + 1)(δ − 1)⁻¹`, defined on all of `ℂ^N` for a factor.
    pub fn polariser_inverse(&self) -> Result<LinearMap> {
        if !self.factor {
            return Err(Error::NonFactor);
        }
        let inv = self.modular.func(|l| -I * ((l + 1.0) / (l - 1.0)));
        let mut worst = 0.0_f64;
        for b in &self.basis {
            let back = inv.apply(&self.modular.r.apply(b));
            worst = worst.max((back - b).norm());
        }
        if worst > tol::IDENTITY {
            return Err(Error::IdentityCheckFailed {
                name: "R^-1 R b = b".into(),
                residual: worst,
                tolerance: tol::IDENTITY,
            });
        }
        Ok(inv)
    }
}

//! Galerkin models of the local one-particle subspaces `K_m`.
//!
//! Generators on the momentum grid are `vᵢ = ω_m^{−1/2} f̂ᵢ` (φ-sector) and
//! `wⱼ = i ω_m^{1/2} ĝⱼ` (π-sector). Their complex span is identified with
//! `ℂ^N` through a Cholesky factor of the complex Gram matrix, and the
//! standard subspace lives there. Grid-space vectors are kept for the
//! projection-based assembly of `Q†Q`.

use std::sync::Arc;

use nalgebra::Cholesky;
use serde::{Deserialize, Serialize};

use super::basis::BasisLayout;
use super::grid::{GridSpec, MomentumGrid};
use super::transform::{transform_layout, TransformCache};
use crate::error::{Error, Result};
use crate::hilbert::{CMat, CVec, ComplexSpace, RMat, C64, I};
use crate::quasifree::Symplectomorphism;
use crate::subspace::StandardSubspace;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub dim: usize,
    pub mass: f64,
    pub n_phi: usize,
    pub n_pi: usize,
    pub grid: GridSpec,
    pub zero_mean: bool,
}

impl ModelSpec {
    pub fn with_mass(&self, mass: f64) -> Self {
        Self { mass, ..self.clone() }
    }

    fn same_discretisation(&self, other: &ModelSpec) -> bool {
        self.dim == other.dim
            && self.n_phi == other.n_phi
            && self.n_pi == other.n_pi
            && self.grid == other.grid
            && self.zero_mean == other.zero_mean
    }
}

/// Mass-independent data: grid and transforms of both sectors.
#[derive(Debug, Clone)]
pub struct SectorTransforms {
    pub grid: MomentumGrid,
    pub layout_phi: BasisLayout,
    pub layout_pi: BasisLayout,
    pub f_hat: Vec<CVec>,
    pub g_hat: Vec<CVec>,
}

impl SectorTransforms {
    pub fn new(spec: &ModelSpec, cache: &TransformCache) -> Result<Self> {
        let grid = MomentumGrid::new(spec.dim, spec.grid)?;
        let layout_phi = BasisLayout::new(spec.dim, spec.n_phi, spec.zero_mean)?;
        let layout_pi = BasisLayout::new(spec.dim, spec.n_pi, spec.zero_mean)?;
        let f_hat = transform_layout(&layout_phi, &grid, cache)?;
        let g_hat = transform_layout(&layout_pi, &grid, cache)?;
        Ok(Self { grid, layout_phi, layout_pi, f_hat, g_hat })
    }
}

#[derive(Debug, Clone)]
pub struct GalerkinModel {
    pub spec: ModelSpec,
    pub transforms: Arc<SectorTransforms>,
    pub omega: Vec<f64>,
    /// `vᵢ` on the grid.
    pub phi: Vec<CVec>,
    /// `wⱼ` on the grid.
    pub pi: Vec<CVec>,
    /// `⟨uᵢ, uⱼ⟩` over all generators `u = (v, w)`, grid-weighted.
    pub gram: CMat,
    pub subspace: StandardSubspace,
    /// Set for the massless `d = 1` model without zero-mean constraint, whose
    /// φ-sector Gram diverges under refinement.
    pub infrared_divergent: bool,
}

impl GalerkinModel {
    pub fn generators(&self) -> impl Iterator<Item = &CVec> {
        self.phi.iter().chain(self.pi.iter())
    }

    pub fn dim(&self) -> usize {
        self.phi.len() + self.pi.len()
    }

    pub fn weight(&self) -> f64 {
        self.transforms.grid.weight()
    }

    /// Re-Gram of the φ-sector generators.
    pub fn phi_gram(&self) -> RMat {
        let n = self.phi.len();
        self.gram.view((0, 0), (n, n)).map(|z| z.re)
    }

    /// Grid-space Re-orthonormal basis of `K_m`: `b = u·C`.
    pub fn grid_basis(&self) -> Vec<CVec> {
        let c = self.subspace.generator_transform();
        let gens: Vec<&CVec> = self.generators().collect();
        (0..self.dim())
            .map(|a| {
                let mut b = CVec::zeros(self.transforms.grid.len());
                for (j, u) in gens.iter().enumerate() {
                    let coeff = c[(j, a)];
                    if coeff != 0.0 {
                        b.axpy(C64::new(coeff, 0.0), u, C64::new(1.0, 0.0));
                    }
                }
                b
            })
            .collect()
    }

    /// `Re⟨x, y⟩` with the grid weight.
    pub fn re_inner(&self, x: &CVec, y: &CVec) -> f64 {
        self.weight() * x.dotc(y).re
    }
}

/// Builds `K_m` for `spec` from freshly computed (or cached) transforms.
pub fn build_kg_model(spec: &ModelSpec, cache: &TransformCache) -> Result<GalerkinModel> {
    check_mass(spec.mass)?;
    let transforms = Arc::new(SectorTransforms::new(spec, cache)?);
    model_from_transforms(spec, transforms)
}

fn check_mass(mass: f64) -> Result<()> {
    if mass < 0.0 || mass.is_nan() {
        return Err(Error::MassNegative(mass));
    }
    Ok(())
}

/// Builds `K_m` on shared transforms; only the `ω_m` weights depend on the mass.
pub fn model_from_transforms(spec: &ModelSpec, transforms: Arc<SectorTransforms>) -> Result<GalerkinModel> {
    check_mass(spec.mass)?;
    let grid = &transforms.grid;
    if transforms.f_hat.len() != spec.n_phi || transforms.g_hat.len() != spec.n_pi || grid.spec != spec.grid {
        return Err(Error::ModelMismatch("transforms do not match the model specification".into()));
    }
    let omega = grid.omega(spec.mass);
    let scale = |f: &CVec, pow: f64, factor: C64| -> CVec {
        CVec::from_iterator(f.len(), f.iter().zip(&omega).map(|(z, w)| *z * w.powf(pow) * factor))
    };
    let one = C64::new(1.0, 0.0);
    let phi: Vec<CVec> = transforms.f_hat.iter().map(|f| scale(f, -0.5, one)).collect();
    let pi: Vec<CVec> = transforms.g_hat.iter().map(|g| scale(g, 0.5, I)).collect();

    let n = phi.len() + pi.len();
    let u = CMat::from_columns(&phi.iter().chain(pi.iter()).cloned().collect::<Vec<_>>());
    let mut gram = u.adjoint() * &u * C64::new(grid.weight(), 0.0);
    gram = (&gram + gram.adjoint()) * C64::new(0.5, 0.0);
    if gram.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidInput("model Gram matrix is not finite".into()));
    }
    let chol = Cholesky::new(gram.clone())
        .ok_or(Error::NotStandard { reason: crate::error::NotStandardReason::ComplexDegenerate })?;
    let lh = chol.l().adjoint();
    let embedded: Vec<CVec> = (0..n).map(|j| lh.column(j).into_owned()).collect();
    let subspace = StandardSubspace::from_real_span(ComplexSpace::new(n)?, &embedded)?;
    Ok(GalerkinModel {
        spec: spec.clone(),
        omega,
        phi,
        pi,
        gram,
        subspace,
        infrared_divergent: spec.mass == 0.0 && spec.dim == 1 && !spec.zero_mean,
        transforms,
    })
}

fn check_pair(model_m: &GalerkinModel, model_0: &GalerkinModel) -> Result<()> {
    if !model_m.spec.same_discretisation(&model_0.spec) {
        return Err(Error::ModelMismatch(format!(
            "models differ in discretisation: {:?} vs {:?}",
            model_m.spec, model_0.spec
        )));
    }
    Ok(())
}

/// `Q: ω_{m₁}^{−1/2}f + iω_{m₁}^{1/2}g ↦ ω_{m₂}^{−1/2}f + iω_{m₂}^{1/2}g`.
///
/// Both models share generator coefficients, so in the Re-orthonormal bases
/// `Q = C₂⁻¹C₁` with `Cₖ` the generator transforms.
pub fn mass_change_map(model_m: &GalerkinModel, model_0: &GalerkinModel) -> Result<Symplectomorphism> {
    check_pair(model_m, model_0)?;
    let c_m = model_m.subspace.generator_transform();
    let c_0 = model_0.subspace.generator_transform();
    let q = c_0.clone().solve_upper_triangular(c_m).ok_or(Error::Singular { ratio: 0.0 })?;
    Symplectomorphism::new(model_m.subspace.clone(), model_0.subspace.clone(), q)
}

/// `Q†Q = C_mᵀ Re(G₀) C_m`, straight from the target Gram.
pub fn qdq_via_gram(model_m: &GalerkinModel, model_0: &GalerkinModel) -> Result<RMat> {
    check_pair(model_m, model_0)?;
    let c_m = model_m.subspace.generator_transform();
    let g0 = model_0.gram.map(|z| z.re);
    Ok(c_m.transpose() * g0 * c_m)
}

/// Re-orthogonal projection onto the real span of a family of grid vectors.
#[derive(Debug, Clone)]
pub struct RealProjection {
    vectors: Vec<CVec>,
    gram_inv: RMat,
    weight: f64,
}

impl RealProjection {
    pub fn new(vectors: Vec<CVec>, weight: f64) -> Result<Self> {
        let n = vectors.len();
        let gram = RMat::from_fn(n, n, |i, j| weight * vectors[i].dotc(&vectors[j]).re);
        let gram_inv = Cholesky::new(gram).ok_or(Error::Singular { ratio: 0.0 })?.inverse();
        Ok(Self { vectors, gram_inv, weight })
    }

    pub fn apply(&self, x: &CVec) -> CVec {
        let coeffs = nalgebra::DVector::from_iterator(
            self.vectors.len(),
            self.vectors.iter().map(|v| self.weight * v.dotc(x).re),
        );
        let a = &self.gram_inv * coeffs;
        let mut out = CVec::zeros(x.len());
        for (v, &c) in self.vectors.iter().zip(a.iter()) {
            out.axpy(C64::new(c, 0.0), v, C64::new(1.0, 0.0));
        }
        out
    }
}

/// `E_φ` onto `span_ℝ{ω_m^{−1/2}f̂ᵢ}` and `E_π` onto `span_ℝ{ω_m^{1/2}ĝⱼ}`,
/// so that `E_K = E_φ − iE_π i`.
#[derive(Debug, Clone)]
pub struct SectorProjections {
    pub phi: RealProjection,
    pub pi: RealProjection,
}

impl SectorProjections {
    pub fn e_k(&self, x: &CVec) -> CVec {
        self.phi.apply(x) - self.pi.apply(&(x * I)) * I
    }
}

pub fn projections_phi_pi(model: &GalerkinModel) -> Result<SectorProjections> {
    let w = model.weight();
    let real_pi: Vec<CVec> = model.pi.iter().map(|v| v * (-I)).collect();
    Ok(SectorProjections { phi: RealProjection::new(model.phi.clone(), w)?, pi: RealProjection::new(real_pi, w)? })
}

/// `Q†Q = (E_φ (ω_m/ω₀) E_φ − i E_π (ω₀/ω_m) E_π i)|_{K_m}` assembled on the
/// grid and returned in the Re-orthonormal basis of `K_m`.
pub fn qdq_via_projections(model_m: &GalerkinModel, model_0: &GalerkinModel) -> Result<RMat> {
    check_pair(model_m, model_0)?;
    let proj = projections_phi_pi(model_m)?;
    let ratio: Vec<f64> = model_m.omega.iter().zip(&model_0.omega).map(|(m, z)| m / z).collect();
    let mul = |x: &CVec, inv: bool| -> CVec {
        CVec::from_iterator(x.len(), x.iter().zip(&ratio).map(|(z, r)| if inv { *z / *r } else { *z * *r }))
    };
    let basis = model_m.grid_basis();
    let n = basis.len();
    let images: Vec<CVec> = basis
        .iter()
        .map(|b| {
            let phi = proj.phi.apply(&mul(&proj.phi.apply(b), false));
            let pi = proj.pi.apply(&mul(&proj.pi.apply(&(b * I)), true));
            phi - pi * I
        })
        .collect();
    Ok(RMat::from_fn(n, n, |c, a| model_m.re_inner(&basis[c], &images[a])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quasifree::qdagger_q;
    use crate::tol::rel_residual;

    fn spec(dim: usize, mass: f64, n: usize, m: usize, p: f64, zero_mean: bool) -> ModelSpec {
        ModelSpec { dim, mass, n_phi: n, n_pi: n, grid: GridSpec::new(m, p).unwrap(), zero_mean }
    }

    #[test]
    fn sectors_are_re_orthogonal() {
        let model = build_kg_model(&spec(2, 1.0, 4, 32, 8.0, false), &TransformCache::in_memory()).unwrap();
        let worst = model
            .phi
            .iter()
            .flat_map(|v| model.pi.iter().map(move |w| (v, w)))
            .map(|(v, w)| model.re_inner(v, w).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-13, "{worst}");
    }

    #[test]
    fn equal_masses_give_identity() {
        let cache = TransformCache::in_memory();
        let a = build_kg_model(&spec(1, 0.5, 3, 64, 8.0, true), &cache).unwrap();
        let q = mass_change_map(&a, &a).unwrap();
        assert!(rel_residual(&q.matrix, &RMat::identity(6, 6)) < 1e-14);
        let t = qdq_via_projections(&a, &a).unwrap();
        assert!(rel_residual(&t, &RMat::identity(6, 6)) < 1e-10);
    }

    #[test]
    fn gram_and_projection_routes_agree() {
        let cache = TransformCache::in_memory();
        let s = spec(2, 1.0, 3, 32, 8.0, false);
        let m1 = build_kg_model(&s, &cache).unwrap();
        let m0 = build_kg_model(&s.with_mass(0.0), &cache).unwrap();
        let q = mass_change_map(&m1, &m0).unwrap();
        assert!(q.is_symplectic(), "{}", q.symplectic_residual());
        let x = qdagger_q(&q);
        let g = qdq_via_gram(&m1, &m0).unwrap();
        let t = qdq_via_projections(&m1, &m0).unwrap();
        assert!(rel_residual(&x, &g) < 1e-10);
        assert!(rel_residual(&x, &t) < 1e-8, "{}", rel_residual(&x, &t));
    }

    #[test]
    fn e_k_reproduces_subspace_projection() {
        let model = build_kg_model(&spec(1, 1.0, 3, 64, 8.0, false), &TransformCache::in_memory()).unwrap();
        let proj = projections_phi_pi(&model).unwrap();
        let basis = model.grid_basis();
        for b in &basis {
            assert!((proj.e_k(b) - b).norm() < 1e-9 * b.norm());
        }
        let x = CVec::from_fn(basis[0].len(), |i, _| C64::new((i as f64).sin(), (0.3 * i as f64).cos()));
        let mut direct = CVec::zeros(x.len());
        for b in &basis {
            direct.axpy(C64::new(model.re_inner(b, &x), 0.0), b, C64::new(1.0, 0.0));
        }
        assert!((proj.e_k(&x) - direct).norm() < 1e-9 * x.norm());
    }

    #[test]
    fn mismatched_models_rejected() {
        let cache = TransformCache::in_memory();
        let a = build_kg_model(&spec(1, 1.0, 3, 64, 8.0, true), &cache).unwrap();
        let b = build_kg_model(&spec(1, 0.0, 4, 64, 8.0, true), &cache).unwrap();
        assert!(matches!(mass_change_map(&a, &b), Err(Error::ModelMismatch(_))));
        assert!(matches!(build_kg_model(&spec(1, -1.0, 3, 64, 8.0, true), &cache), Err(Error::MassNegative(_))));
    }
}

//! Dense complex Hilbert space primitives on `ℂ^N`.
//!
//! The inner product is conjugate-linear in the first argument,
//! `⟨x, y⟩ = Σ conj(xᵢ) yᵢ`. Antilinear maps are stored as a complex matrix
//! `A` acting as `x ↦ A·conj(x)`; with this convention the antilinear adjoint
//! (`⟨s*x, y⟩ = ⟨sy, x⟩`) is the plain transpose `Aᵀ`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tol;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;
pub type RMat = DMatrix<f64>;

pub const I: C64 = C64::new(0.0, 1.0);

/// `ℂ^N` with the standard inner product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComplexSpace {
    dim: usize,
}

impl ComplexSpace {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("complex space dimension must be ≥ 1".into()));
        }
        Ok(Self { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

pub fn inner(x: &CVec, y: &CVec) -> C64 {
    x.dotc(y)
}

/// `Re⟨x, y⟩`, the real scalar product of `ℂ^N` viewed as `ℝ^{2N}`.
pub fn re_inner(x: &CVec, y: &CVec) -> f64 {
    x.iter().zip(y.iter()).map(|(a, b)| a.re * b.re + a.im * b.im).sum()
}

pub fn conj_mat(m: &CMat) -> CMat {
    m.map(|z| z.conj())
}

pub fn conj_vec(v: &CVec) -> CVec {
    v.map(|z| z.conj())
}

pub fn to_complex(m: &RMat) -> CMat {
    m.map(|x| C64::new(x, 0.0))
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Matrix whose columns are the given vectors.
pub fn columns(vectors: &[CVec]) -> CMat {
    let n = vectors.first().map_or(0, |v| v.len());
    CMat::from_fn(n, vectors.len(), |i, j| vectors[j][i])
}

/// Complex-linear map `x ↦ M·x`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMap {
    matrix: CMat,
}

impl LinearMap {
    pub fn new(matrix: CMat) -> Self {
        assert!(matrix.is_square(), "linear maps on ℂ^N are square");
        Self { matrix }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(identity(n))
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, x: &CVec) -> CVec {
        &self.matrix * x
    }

    pub fn compose(&self, other: &LinearMap) -> LinearMap {
        LinearMap::new(&self.matrix * &other.matrix)
    }

    pub fn adjoint(&self) -> LinearMap {
        LinearMap::new(self.matrix.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        tol::rel_residual(&self.matrix, &self.matrix.adjoint()) <= tol
    }

    /// Operator norm (largest singular value).
    pub fn norm(&self) -> f64 {
        self.matrix.clone().singular_values().max()
    }
}

/// Antilinear map `x ↦ A·conj(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AntilinearMap {
    matrix: CMat,
}

impl AntilinearMap {
    pub fn new(matrix: CMat) -> Self {
        assert!(matrix.is_square(), "antilinear maps on ℂ^N are square");
        Self { matrix }
    }

    /// Plain complex conjugation.
    pub fn conjugation(n: usize) -> Self {
        Self::new(identity(n))
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, x: &CVec) -> CVec {
        &self.matrix * conj_vec(x)
    }

    /// `self ∘ other` for antilinear `other`; the result is linear with
    /// matrix `A₁·conj(A₂)`.
    pub fn compose(&self, other: &AntilinearMap) -> LinearMap {
        LinearMap::new(&self.matrix * conj_mat(&other.matrix))
    }

    /// `self ∘ t` for linear `t`: `x ↦ A·conj(T x)`.
    pub fn after_linear(&self, t: &LinearMap) -> AntilinearMap {
        AntilinearMap::new(&self.matrix * conj_mat(t.matrix()))
    }

    /// `t ∘ self` for linear `t`.
    pub fn before_linear(&self, t: &LinearMap) -> AntilinearMap {
        AntilinearMap::new(t.matrix() * &self.matrix)
    }

    /// The antilinear adjoint, `⟨s*x, y⟩ = ⟨sy, x⟩`.
    pub fn adjoint(&self) -> AntilinearMap {
        AntilinearMap::new(self.matrix.transpose())
    }

    /// `‖A·conj(A) − 1‖` relative to unit scale.
    pub fn involution_residual(&self) -> f64 {
        let sq = self.compose(self).into_matrix();
        tol::rel_residual(&sq, &identity(self.dim()))
    }

    pub fn is_involution(&self, tol: f64) -> bool {
        self.involution_residual() <= tol
    }

    /// Operator norm; conjugation is isometric so this is `‖A‖₂`.
    pub fn norm(&self) -> f64 {
        self.matrix.clone().singular_values().max()
    }
}

/// Eigendecomposition `M = V diag(λ) Vᴴ` of a Hermitian matrix, eigenvalues
/// ascending. The input is symmetrised before decomposition.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl HermitianEigen {
    pub fn new(m: &CMat) -> Self {
        let sym = (m + m.adjoint()).scale(0.5);
        let eig = SymmetricEigen::new(sym);
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = CMat::from_fn(m.nrows(), order.len(), |i, j| eig.eigenvectors[(i, order[j])]);
        Self { values, vectors }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// Functional calculus `f(M) = V diag(f(λ)) Vᴴ`.
    pub fn apply_fn<F: Fn(f64) -> C64>(&self, f: F) -> CMat {
        let n = self.dim();
        let mut scaled = self.vectors.clone();
        for (j, &lambda) in self.values.iter().enumerate() {
            let fl = f(lambda);
            scaled.column_mut(j).iter_mut().for_each(|z| *z *= fl);
        }
        let out = scaled * self.vectors.adjoint();
        debug_assert_eq!(out.nrows(), n);
        out
    }

    /// Orthogonal projection onto the eigenvectors selected by `keep`.
    pub fn projection<F: Fn(f64) -> bool>(&self, keep: F) -> CMat {
        self.apply_fn(|l| if keep(l) { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
    }
}

/// Attached to results whose `cond(δ)` exceeds the configured threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditioningWarning {
    pub condition: f64,
    pub threshold: f64,
}

/// Polar decomposition `s = j δ^{1/2}` of an invertible antilinear map.
#[derive(Debug, Clone)]
pub struct PolarDecomposition {
    pub j: AntilinearMap,
    pub delta: LinearMap,
    pub eigen: HermitianEigen,
    pub warning: Option<ConditioningWarning>,
}

impl PolarDecomposition {
    pub fn condition(&self) -> f64 {
        self.eigen.max() / self.eigen.min()
    }
}

/// Polar decomposition via the eigendecomposition of `δ = s*∘s = AᵀĀ`.
pub fn antilinear_polar(s: &AntilinearMap) -> Result<PolarDecomposition> {
    antilinear_polar_with(s, tol::CONDITIONING_WARNING)
}

pub fn antilinear_polar_with(s: &AntilinearMap, warn_threshold: f64) -> Result<PolarDecomposition> {
    let delta = s.adjoint().compose(s);
    let eigen = HermitianEigen::new(delta.matrix());
    let (lo, hi) = (eigen.min(), eigen.max());
    if !(hi > 0.0) || !lo.is_finite() || lo <= tol::SINGULAR_RATIO * hi {
        let ratio = if hi > 0.0 { lo / hi } else { 0.0 };
        return Err(Error::Singular { ratio });
    }
    let inv_sqrt = eigen.apply_fn(|l| C64::new(l.powf(-0.5), 0.0));
    let j = s.after_linear(&LinearMap::new(inv_sqrt));
    let condition = hi / lo;
    let warning = (condition > warn_threshold).then_some(ConditioningWarning { condition, threshold: warn_threshold });
    let delta = LinearMap::new(eigen.apply_fn(|l| C64::new(l, 0.0)));
    Ok(PolarDecomposition { j, delta, eigen, warning })
}

/// Modified Gram–Schmidt in `Re⟨·,·⟩` with one full re-orthogonalisation pass.
pub fn real_orthonormalize(vectors: &[CVec]) -> Result<Vec<CVec>> {
    real_orthonormalize_with_transform(vectors).map(|(q, _)| q)
}

/// As [`real_orthonormalize`], also returning the real upper-triangular `C`
/// with `qₖ = Σᵢ vᵢ Cᵢₖ`.
pub fn real_orthonormalize_with_transform(vectors: &[CVec]) -> Result<(Vec<CVec>, RMat)> {
    let n = vectors.len();
    let mut basis: Vec<CVec> = Vec::with_capacity(n);
    let mut transform = RMat::zeros(n, n);
    for (k, v) in vectors.iter().enumerate() {
        let original = re_inner(v, v).sqrt();
        let mut w = v.clone();
        let mut coeffs = DVector::<f64>::zeros(n);
        coeffs[k] = 1.0;
        for _pass in 0..2 {
            for (j, q) in basis.iter().enumerate() {
                let r = re_inner(q, &w);
                w.axpy(C64::new(-r, 0.0), q, C64::new(1.0, 0.0));
                let tj = transform.column(j).clone_owned();
                coeffs.axpy(-r, &tj, 1.0);
            }
        }
        let norm = re_inner(&w, &w).sqrt();
        if original == 0.0 || norm <= tol::RANK * original {
            let residual = if original == 0.0 { 0.0 } else { norm / original };
            return Err(Error::RankDeficient { index: k, residual });
        }
        w.unscale_mut(norm);
        coeffs.unscale_mut(norm);
        transform.set_column(k, &coeffs);
        basis.push(w);
    }
    Ok((basis, transform))
}

/// Re-orthonormal basis of the real span, silently dropping vectors whose
/// residual falls below `rel_tol` of their norm.
pub fn real_span_basis(vectors: &[CVec], rel_tol: f64) -> Vec<CVec> {
    let mut basis: Vec<CVec> = Vec::new();
    for v in vectors {
        let original = re_inner(v, v).sqrt();
        if original == 0.0 {
            continue;
        }
        let mut w = v.clone();
        for _pass in 0..2 {
            for q in &basis {
                let r = re_inner(q, &w);
                w.axpy(C64::new(-r, 0.0), q, C64::new(1.0, 0.0));
            }
        }
        let norm = re_inner(&w, &w).sqrt();
        if norm > rel_tol * original {
            w.unscale_mut(norm);
            basis.push(w);
        }
    }
    basis
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GramForm {
    /// `Gᵢⱼ = ⟨vᵢ, vⱼ⟩`
    Complex,
    /// `Gᵢⱼ = Re⟨vᵢ, vⱼ⟩`
    RealPart,
}

pub fn gram_matrix(vectors: &[CVec], form: GramForm) -> CMat {
    let n = vectors.len();
    let mut g = CMat::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let z = inner(&vectors[i], &vectors[j]);
            let z = match form {
                GramForm::Complex => z,
                GramForm::RealPart => C64::new(z.re, 0.0),
            };
            g[(i, j)] = z;
            g[(j, i)] = z.conj();
        }
    }
    g
}

/// Principal square root of a Hermitian positive semi-definite matrix.
/// Eigenvalues in `[-PSD_CLIP·‖M‖, 0)` are clipped to zero; anything more
/// negative is reported as [`Error::NotPsd`].
pub fn psd_sqrt(m: &CMat) -> Result<CMat> {
    psd_sqrt_with(m, tol::PSD_CLIP)
}

pub fn psd_sqrt_with(m: &CMat, clip: f64) -> Result<CMat> {
    let eig = HermitianEigen::new(m);
    let scale = eig.values.iter().fold(0.0_f64, |a, &l| a.max(l.abs()));
    if eig.min() < -clip * scale {
        return Err(Error::NotPsd { eigenvalue: eig.min(), scale });
    }
    Ok(eig.apply_fn(|l| C64::new(l.max(0.0).sqrt(), 0.0)))
}

/// Frobenius norm; the Hilbert–Schmidt norm in an orthonormal basis.
pub fn frobenius<T>(m: &DMatrix<T>) -> f64
where
    T: nalgebra::ComplexField<RealField = f64>,
{
    m.norm()
}

/// Sum of singular values.
pub fn nuclear<T>(m: &DMatrix<T>) -> f64
where
    T: nalgebra::ComplexField<RealField = f64>,
{
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn cvec(v: &[C64]) -> CVec {
        CVec::from_column_slice(v)
    }

    fn cmat(rows: usize, cols: usize, v: &[C64]) -> CMat {
        CMat::from_row_slice(rows, cols, v)
    }

    #[test]
    fn zero_dimensional_space_is_rejected() {
        assert!(ComplexSpace::new(0).is_err());
        assert_eq!(ComplexSpace::new(3).unwrap().dim(), 3);
    }

    #[test]
    fn orthonormalize_unit_and_scaled() {
        let q = real_orthonormalize(&[cvec(&[c(1.0, 0.0), c(0.0, 0.0)])]).unwrap();
        assert_abs_diff_eq!((&q[0] - cvec(&[c(1.0, 0.0), c(0.0, 0.0)])).norm(), 0.0);
        let q = real_orthonormalize(&[cvec(&[c(2.0, 0.0), c(0.0, 0.0)])]).unwrap();
        assert_abs_diff_eq!((&q[0] - cvec(&[c(1.0, 0.0), c(0.0, 0.0)])).norm(), 0.0);
    }

    #[test]
    fn orthonormalize_detects_real_dependence() {
        let e = cvec(&[c(1.0, 0.0), c(0.0, 0.0)]);
        let ie = cvec(&[c(0.0, 1.0), c(0.0, 0.0)]);
        let almost = cvec(&[c(1.0, 1e-18), c(0.0, 0.0)]);
        let err = real_orthonormalize(&[e, ie, almost]).unwrap_err();
        assert!(matches!(err, Error::RankDeficient { index: 2, .. }));
    }

    #[test]
    fn orthonormalize_transform_reproduces_basis() {
        let v = vec![
            cvec(&[c(1.0, 2.0), c(0.5, 0.0), c(0.0, -1.0)]),
            cvec(&[c(0.0, 1.0), c(1.0, 1.0), c(2.0, 0.0)]),
            cvec(&[c(3.0, 0.0), c(0.0, 0.0), c(1.0, 1.0)]),
        ];
        let (q, t) = real_orthonormalize_with_transform(&v).unwrap();
        for k in 0..3 {
            let mut rebuilt = CVec::zeros(3);
            for i in 0..3 {
                rebuilt += &v[i] * C64::new(t[(i, k)], 0.0);
            }
            assert_abs_diff_eq!((&rebuilt - &q[k]).norm(), 0.0, epsilon = 1e-12);
            for l in 0..3 {
                let expect = if k == l { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(re_inner(&q[k], &q[l]), expect, epsilon = 1e-12);
            }
        }
        // upper triangular
        assert_abs_diff_eq!(t[(1, 0)], 0.0);
        assert_abs_diff_eq!(t[(2, 1)], 0.0);
    }

    #[test]
    fn antilinear_adjoint_examples() {
        let id = AntilinearMap::conjugation(2);
        assert_eq!(id.adjoint().matrix(), &identity(2));
        let flip = AntilinearMap::new(cmat(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]));
        assert_eq!(flip.adjoint(), flip);

        let s = AntilinearMap::new(cmat(2, 2, &[c(0.0, 0.0), c(2.0, 0.0), c(0.5, 0.0), c(0.0, 0.0)]));
        let sa = s.adjoint();
        let expected = cmat(2, 2, &[c(0.0, 0.0), c(0.5, 0.0), c(2.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(sa.matrix(), &expected);
        // ⟨s*x, y⟩ = ⟨sy, x⟩ on the standard basis and i·basis
        let basis = [
            cvec(&[c(1.0, 0.0), c(0.0, 0.0)]),
            cvec(&[c(0.0, 0.0), c(1.0, 0.0)]),
            cvec(&[c(0.0, 1.0), c(0.0, 0.0)]),
            cvec(&[c(0.0, 0.0), c(0.0, 1.0)]),
        ];
        for x in &basis {
            for y in &basis {
                let lhs = inner(&sa.apply(x), y);
                let rhs = inner(&s.apply(y), x);
                assert_abs_diff_eq!((lhs - rhs).norm(), 0.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn composition_rule() {
        let a = AntilinearMap::new(cmat(2, 2, &[c(1.0, 1.0), c(0.0, 2.0), c(0.5, 0.0), c(-1.0, 0.3)]));
        let b = AntilinearMap::new(cmat(2, 2, &[c(0.2, 0.0), c(1.0, -1.0), c(0.0, 0.7), c(2.0, 0.0)]));
        let x = cvec(&[c(0.3, -0.4), c(1.1, 0.9)]);
        let direct = a.apply(&b.apply(&x));
        let composed = a.compose(&b).apply(&x);
        assert_abs_diff_eq!((direct - composed).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn polar_of_conjugation_on_c1() {
        let p = antilinear_polar(&AntilinearMap::conjugation(1)).unwrap();
        assert_abs_diff_eq!((p.j.matrix()[(0, 0)] - c(1.0, 0.0)).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((p.delta.matrix()[(0, 0)] - c(1.0, 0.0)).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn polar_of_fixture_map() {
        // s(z1, z2) = (½ conj z2, 2 conj z1)
        let s = AntilinearMap::new(cmat(2, 2, &[c(0.0, 0.0), c(0.5, 0.0), c(2.0, 0.0), c(0.0, 0.0)]));
        let p = antilinear_polar(&s).unwrap();
        let flip = cmat(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let delta = cmat(2, 2, &[c(4.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.25, 0.0)]);
        assert!(tol::rel_residual(p.j.matrix(), &flip) < 1e-14);
        assert!(tol::rel_residual(p.delta.matrix(), &delta) < 1e-14);
        assert!(p.warning.is_none());
        // δ^{1/2} = diag(2, ½) rebuilds s
        let half = LinearMap::new(p.eigen.apply_fn(|l| c(l.sqrt(), 0.0)));
        let rebuilt = p.j.after_linear(&half);
        assert!(tol::rel_residual(rebuilt.matrix(), s.matrix()) < 1e-14);
    }

    #[test]
    fn polar_of_zero_is_singular() {
        let err = antilinear_polar(&AntilinearMap::new(CMat::zeros(2, 2))).unwrap_err();
        assert!(matches!(err, Error::Singular { .. }));
    }

    #[test]
    fn polar_warns_on_poor_conditioning() {
        // δ = diag(1e6, 2.5e-7), cond 4e12
        let s = AntilinearMap::new(cmat(2, 2, &[c(0.0, 0.0), c(5e-4, 0.0), c(1e3, 0.0), c(0.0, 0.0)]));
        let p = antilinear_polar(&s).unwrap();
        let w = p.warning.expect("cond above threshold must warn");
        assert!((w.condition / 4e12 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn gram_examples() {
        let e = [cvec(&[c(1.0, 0.0), c(0.0, 0.0)]), cvec(&[c(0.0, 0.0), c(1.0, 0.0)])];
        assert_eq!(gram_matrix(&e, GramForm::Complex), identity(2));

        let u = [cvec(&[c(0.5, 0.0), c(1.0, 0.0)]), cvec(&[c(0.0, -0.5), c(0.0, 1.0)])];
        let re = gram_matrix(&u, GramForm::RealPart);
        let expect_re = cmat(2, 2, &[c(1.25, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.25, 0.0)]);
        assert!(tol::rel_residual(&re, &expect_re) < 1e-15);
        let full = gram_matrix(&u, GramForm::Complex);
        let expect = cmat(2, 2, &[c(1.25, 0.0), c(0.0, 0.75), c(0.0, -0.75), c(1.25, 0.0)]);
        assert!(tol::rel_residual(&full, &expect) < 1e-15);
    }

    #[test]
    fn psd_sqrt_clips_and_rejects() {
        let m = cmat(2, 2, &[c(4.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1e-12, 0.0)]);
        let r = psd_sqrt(&m).unwrap();
        assert_abs_diff_eq!(r[(0, 0)].re, 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r[(1, 1)].re, 0.0);
        let bad = cmat(2, 2, &[c(4.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1e-3, 0.0)]);
        assert!(matches!(psd_sqrt(&bad), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn schatten_norms() {
        let t = RMat::from_row_slice(2, 2, &[-3.0, 0.0, 0.0, 0.75]);
        assert_abs_diff_eq!(frobenius(&t), 153f64.sqrt() / 4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(nuclear(&t), 3.75, epsilon = 1e-14);
    }
}

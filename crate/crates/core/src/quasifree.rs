//! Symplectomorphisms between standard subspaces and the Hilbert–Schmidt
//! criteria for quasi-equivalence of the associated quasi-free states.
//!
//! Every operator is expressed in the Re-orthonormal basis of the source
//! subspace `K₁`. A symplectomorphism `Q` is a real matrix from `K₁`-coordinates
//! to `K₂`-coordinates; its complex-linear extension has the same matrix, and
//! its `†`-adjoint is the transpose.

use crate::error::{Error, Result};
use crate::hilbert::{identity, nuclear, psd_sqrt, to_complex, CMat, RMat, C64, I};
use crate::subspace::StandardSubspace;
use crate::tol;

/// A real-linear bijection `Q: K₁ → K₂`.
#[derive(Debug, Clone)]
pub struct Symplectomorphism {
    pub source: StandardSubspace,
    pub target: StandardSubspace,
    pub matrix: RMat,
}

impl Symplectomorphism {
    /// Checks shapes and invertibility. Symplecticity is checked separately by
    /// [`Symplectomorphism::is_symplectic`].
    pub fn new(source: StandardSubspace, target: StandardSubspace, matrix: RMat) -> Result<Self> {
        let n = source.dim();
        if target.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: format!("target dimension {n}"),
                found: format!("{}", target.dim()),
            });
        }
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: format!("{n}x{n} matrix"),
                found: format!("{}x{}", matrix.nrows(), matrix.ncols()),
            });
        }
        let sv = matrix.clone().singular_values();
        if sv.min() <= tol::SINGULAR_RATIO * sv.max() {
            return Err(Error::Singular { ratio: sv.min() / sv.max() });
        }
        Ok(Self { source, target, matrix })
    }

    /// The identity of `K` onto itself.
    pub fn identity(k: &StandardSubspace) -> Self {
        Self { source: k.clone(), target: k.clone(), matrix: RMat::identity(k.dim(), k.dim()) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `max |Im⟨Qbᵢ, Qbₖ⟩ − Im⟨bᵢ, bₖ⟩|`
    pub fn symplectic_residual(&self) -> f64 {
        let w1 = self.source.symplectic_form();
        let w2 = self.target.symplectic_form();
        let pulled = self.matrix.transpose() * w2 * &self.matrix;
        (pulled - w1).amax()
    }

    pub fn is_symplectic(&self) -> bool {
        self.symplectic_residual() <= tol::SYMPLECTIC
    }

    pub fn inverse_matrix(&self) -> RMat {
        self.matrix.clone().try_inverse().expect("invertibility checked at construction")
    }

    /// `Q₂ ∘ Q₁`, when the target of `self` is the source of `next`.
    pub fn then(&self, next: &Symplectomorphism) -> Result<Symplectomorphism> {
        if !self.target.same_span(&next.source, 1e-10) {
            return Err(Error::InvalidInput("composition of maps with unrelated subspaces".into()));
        }
        Symplectomorphism::new(self.source.clone(), next.target.clone(), &next.matrix * &self.matrix)
    }
}

/// Whether `q` preserves the symplectic form.
pub fn check_symplectomorphism(q: &Symplectomorphism) -> bool {
    q.is_symplectic()
}

/// The operator of one criterion, with its graph Schatten norms.
#[derive(Debug, Clone)]
pub struct CriterionReport {
    pub criterion_name: String,
    pub operator: CMat,
    pub hs_norm: f64,
    pub trace_norm: f64,
    pub notes: Vec<String>,
    /// Relative residuals of identities verified while building the report.
    pub residuals: Vec<(String, f64)>,
}

impl CriterionReport {
    fn new(name: &str, operator: CMat, q: &Symplectomorphism) -> Self {
        let mut notes = Vec::new();
        for (label, k) in [("source", &q.source), ("target", &q.target)] {
            if let Some(w) = k.modular_data().warning {
                notes.push(format!(
                    "{label} modular operator is ill-conditioned: cond {:.3e} > {:.1e}",
                    w.condition, w.threshold
                ));
            }
        }
        Self {
            criterion_name: name.to_string(),
            hs_norm: operator.norm(),
            trace_norm: nuclear(&operator),
            operator,
            notes,
            residuals: Vec::new(),
        }
    }

    pub fn residual(&self, name: &str) -> Option<f64> {
        self.residuals.iter().find(|(n, _)| n == name).map(|&(_, r)| r)
    }
}

/// `Q†Q = QᵀQ` on `K₁`.
pub fn qdagger_q(q: &Symplectomorphism) -> RMat {
    q.matrix.transpose() * &q.matrix
}

/// `A₁(B₁ − B₂) + (A₁ − A₂)B₂`, which equals `A₁B₁ − A₂B₂`.
pub fn schatten_split(a1: &CMat, b1: &CMat, a2: &CMat, b2: &CMat) -> CMat {
    a1 * (b1 - b2) + (a1 - a2) * b2
}

fn ay_operator(r1: &RMat, x: &CMat) -> Result<CMat> {
    let n = r1.nrows();
    let ir1 = to_complex(r1) * I;
    let m1 = identity(n) + &ir1;
    let m2 = &ir1 + x;
    Ok(psd_sqrt(&m1)? - psd_sqrt(&m2)?)
}

/// `[1 + iR₁]^{1/2} − [iR₁ + Q†Q]^{1/2}` on `K₁ + iK₁`.
pub fn ay_criterion(q: &Symplectomorphism) -> Result<CriterionReport> {
    let r1 = q.source.polariser_k_basis();
    let x = to_complex(&qdagger_q(q));
    let op = ay_operator(&r1, &x)?;
    let mut report = CriterionReport::new("ay", op, q);
    let w1 = q.source.symplectic_form();
    report.residuals.push(("polariser_vs_symplectic_form".into(), tol::rel_residual(&r1, &w1)));
    report.residuals.push(("symplectic".into(), q.symplectic_residual()));
    Ok(report)
}

/// `R₁Q⁻¹R₂⁻¹Q`, the factorial expression of `Q†Q`.
pub fn factorial_qdagger_q(q: &Symplectomorphism) -> Result<RMat> {
    if !q.source.factor() || !q.target.factor() {
        return Err(Error::NonFactor);
    }
    let r1 = q.source.polariser_k_basis();
    let r2_inv = q.target.polariser_k_basis().try_inverse().ok_or(Error::NonFactor)?;
    Ok(r1 * q.inverse_matrix() * r2_inv * &q.matrix)
}

/// `[1 + iR₁]^{1/2} − [iR₁ + R₁Q⁻¹R₂⁻¹Q]^{1/2}` for factors.
pub fn factor_criterion(q: &Symplectomorphism) -> Result<CriterionReport> {
    let x = factorial_qdagger_q(q)?;
    let qdq = qdagger_q(q);
    let residual = tol::rel_residual(&x, &qdq);
    if residual > tol::IDENTITY {
        return Err(Error::MismatchWithDagger { residual });
    }
    let r1 = q.source.polariser_k_basis();
    let op = ay_operator(&r1, &to_complex(&x))?;
    let mut report = CriterionReport::new("factor", op, q);
    report.residuals.push(("dagger_identity".into(), residual));
    Ok(report)
}

/// `1 − Q†Q` and `(1+δ₁)^{−1/2} − Q⁻¹(1+δ₂)^{−1/2}Q`.
pub fn equiv_pair(q: &Symplectomorphism) -> Result<(CriterionReport, CriterionReport)> {
    let n = q.dim();
    let first = to_complex(&(RMat::identity(n, n) - qdagger_q(q)));
    let first = CriterionReport::new("equiv_qdq", first, q);

    let f = |l: f64| C64::new((1.0 + l).powf(-0.5), 0.0);
    let a1 = q.source.func_k_basis(f);
    let a2 = to_complex(&q.inverse_matrix()) * q.target.func_k_basis(f);
    let qc = to_complex(&q.matrix);
    let one = identity(n);
    let op = schatten_split(&a1, &one, &a2, &qc);
    let direct = &a1 - &a2 * &qc;
    let mut second = CriterionReport::new("equiv_sqrt", op, q);
    second.residuals.push(("schatten_split".into(), tol::rel_residual(&second.operator, &direct)));
    Ok((first, second))
}

/// `1 − tanh(¼ log δ₁) Q⁻¹ coth(¼ log δ₂) Q`.
pub fn vd_criterion(q: &Symplectomorphism) -> Result<CriterionReport> {
    for k in [&q.source, &q.target] {
        let m = k.modular_data();
        if m.has_eigenvalue_one() {
            return Err(Error::SpectrumAtOne { distance: m.distance_to_one() });
        }
    }
    // tanh(¼ log λ) = (√λ − 1)/(√λ + 1)
    let t1 = q.source.func_k_basis(|l| C64::new((l.sqrt() - 1.0) / (l.sqrt() + 1.0), 0.0));
    let c2 = q.target.func_k_basis(|l| C64::new((l.sqrt() + 1.0) / (l.sqrt() - 1.0), 0.0));
    let qc = to_complex(&q.matrix);
    let qi = to_complex(&q.inverse_matrix());
    let op = identity(q.dim()) - t1 * qi * c2 * qc;
    Ok(CriterionReport::new("vd", op, q))
}

fn resolvent(k: &StandardSubspace, lambda: C64) -> CMat {
    k.func_k_basis(|l| (C64::new(l, 0.0) - lambda).inv())
}

fn resolvent_diff(q: &Symplectomorphism, lambda: C64, qc: &CMat, qi: &CMat) -> CMat {
    resolvent(&q.source, lambda) - qi * resolvent(&q.target, lambda) * qc
}

/// `(δ₁ − λ)⁻¹ − Q⁻¹(δ₂ − λ)⁻¹Q`.
///
/// Always verifies the closed form at `λ = −1`,
/// `−½(1 − Q†Q)Q⁻¹((1−δ₂)/(1+δ₂))Q`; for other `λ` also verifies
/// `E·D(−1)·F = D(λ)` with `E = 1 + (λ+1)(δ₁−λ)⁻¹` and
/// `F = Q⁻¹[1 + (λ+1)(δ₂−λ)⁻¹]Q`.
pub fn resolvent_difference(q: &Symplectomorphism, lambda: C64) -> Result<CriterionReport> {
    let band = tol::EIGEN_ONE * (1.0 + lambda.norm());
    for k in [&q.source, &q.target] {
        let dist = k
            .modular_data()
            .spectrum()
            .iter()
            .map(|&l| (C64::new(l, 0.0) - lambda).norm())
            .fold(f64::INFINITY, f64::min);
        if dist <= band {
            return Err(Error::SpectrumHit { lambda: format!("{lambda}"), distance: dist });
        }
    }
    let n = q.dim();
    let qc = to_complex(&q.matrix);
    let qi = to_complex(&q.inverse_matrix());
    let minus_one = C64::new(-1.0, 0.0);

    let d_m1 = resolvent_diff(q, minus_one, &qc, &qi);
    let one_minus_qdq = to_complex(&(RMat::identity(n, n) - qdagger_q(q)));
    let cayley = q.target.func_k_basis(|l| C64::new((1.0 - l) / (1.0 + l), 0.0));
    let closed = (one_minus_qdq * &qi * cayley * &qc).scale(-0.5);
    let closed_res = tol::rel_residual(&d_m1, &closed);
    check("resolvent closed form at -1", closed_res)?;

    let (op, sandwich_res) = if lambda == minus_one {
        (d_m1, 0.0)
    } else {
        let d = resolvent_diff(q, lambda, &qc, &qi);
        let one = identity(n);
        let e = &one + resolvent(&q.source, lambda) * (lambda + 1.0);
        let f = &qi * (&one + resolvent(&q.target, lambda) * (lambda + 1.0)) * &qc;
        let res = tol::rel_residual(&(e * d_m1 * f), &d);
        check("resolvent sandwich", res)?;
        (d, res)
    };
    let mut report = CriterionReport::new("resolvent", op, q);
    report.residuals.push(("closed_form_m1".into(), closed_res));
    report.residuals.push(("sandwich".into(), sandwich_res));
    Ok(report)
}

fn check(name: &str, residual: f64) -> Result<()> {
    if residual > tol::IDENTITY || residual.is_nan() {
        return Err(Error::IdentityCheckFailed { name: name.into(), residual, tolerance: tol::IDENTITY });
    }
    Ok(())
}

/// Residual of `(A+B)(A−B) = A² − B² + [B,A]` for `A = (1+δ₁)⁻¹` and
/// `B = Q⁻¹(1+δ₂)⁻¹Q`.
pub fn commutator_residual(q: &Symplectomorphism) -> f64 {
    let inv = |l: f64| C64::new(1.0 / (1.0 + l), 0.0);
    let a = q.source.func_k_basis(inv);
    let b = to_complex(&q.inverse_matrix()) * q.target.func_k_basis(inv) * to_complex(&q.matrix);
    let lhs = (&a + &b) * (&a - &b);
    let rhs = &a * &a - &b * &b + (&b * &a - &a * &b);
    tol::rel_residual(&lhs, &rhs)
}

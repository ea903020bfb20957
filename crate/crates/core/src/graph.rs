//! Graph scalar product of the Tomita operator and Schatten norms.
//!
//! In a Re-orthonormal basis of `K` the graph Gram matrix is `2·1`, so a
//! complex matrix in that basis is self-adjoint for `⟨·,·⟩_s` exactly when it
//! is Hermitian, and Frobenius/nuclear norms are the graph Hilbert–Schmidt and
//! trace norms.

use nalgebra::Cholesky;

use crate::error::{Error, Result};
use crate::hilbert::{frobenius, inner, nuclear, CMat, CVec, RMat, C64};
use crate::subspace::StandardSubspace;
use crate::tol;

/// `⟨x,y⟩_s = ⟨x,y⟩ + ⟨sy,sx⟩`.
pub fn graph_inner(k: &StandardSubspace, x: &CVec, y: &CVec) -> C64 {
    let s = k.tomita_operator();
    inner(x, y) + inner(&s.apply(y), &s.apply(x))
}

/// `⟨x,y⟩ − ⟨sy,sx⟩`, the indefinite form of the quasi-free construction
/// (unrelated to the sign operator `γ` of the modular data).
pub fn indefinite_form(k: &StandardSubspace, x: &CVec, y: &CVec) -> C64 {
    let s = k.tomita_operator();
    inner(x, y) - inner(&s.apply(y), &s.apply(x))
}

/// Graph Gram matrix of the basis of `K` and its Cholesky whitener.
#[derive(Debug, Clone)]
pub struct GraphMetric {
    pub subspace: StandardSubspace,
    pub gram_s: CMat,
    /// Lower-triangular `L` with `gram_s = L Lᴴ`.
    pub whitener: CMat,
}

impl GraphMetric {
    pub fn new(k: &StandardSubspace) -> Result<Self> {
        let b = k.basis();
        let n = b.len();
        let gram_s = CMat::from_fn(n, n, |i, j| graph_inner(k, &b[i], &b[j]));
        let whitener =
            Cholesky::new(gram_s.clone()).ok_or(Error::NotPsd { eigenvalue: f64::NAN, scale: gram_s.norm() })?.l();
        Ok(Self { subspace: k.clone(), gram_s, whitener })
    }

    /// Matrix of a K-basis operator in a `⟨·,·⟩_s`-orthonormal basis:
    /// `Lᴴ M L⁻ᴴ`.
    pub fn whiten(&self, m: &CMat) -> CMat {
        let lh = self.whitener.adjoint();
        let lh_inv = lh.clone().try_inverse().expect("Cholesky factor is invertible");
        lh * m * lh_inv
    }
}

/// Real `†`-adjoint of `T: K₁ → K₂` given in the Re-orthonormal bases.
///
/// Returns `Tᵀ` after checking `Re⟨T†h, k⟩ = Re⟨h, Tk⟩` on all basis pairs.
pub fn dagger_adjoint(t: &RMat, k1: &StandardSubspace, k2: &StandardSubspace) -> Result<RMat> {
    if t.nrows() != k2.dim() || t.ncols() != k1.dim() {
        return Err(Error::DimensionMismatch {
            expected: format!("{}x{}", k2.dim(), k1.dim()),
            found: format!("{}x{}", t.nrows(), t.ncols()),
        });
    }
    let td = t.transpose();
    let apply = |m: &RMat, basis_out: &[CVec], col: usize| -> CVec {
        let mut v = CVec::zeros(basis_out[0].len());
        for (r, b) in basis_out.iter().enumerate() {
            v.axpy(C64::new(m[(r, col)], 0.0), b, C64::new(1.0, 0.0));
        }
        v
    };
    let (b1, b2) = (k1.basis(), k2.basis());
    let mut worst = 0.0_f64;
    for (hi, h) in b2.iter().enumerate() {
        let tdh = apply(&td, b1, hi);
        for (ki, kv) in b1.iter().enumerate() {
            let tk = apply(t, b2, ki);
            let lhs = inner(&tdh, kv).re;
            let rhs = inner(h, &tk).re;
            worst = worst.max((lhs - rhs).abs() / t.norm().max(1.0));
        }
    }
    if worst > tol::RECONSTRUCTION {
        return Err(Error::IdentityCheckFailed {
            name: "Re<T^dagger h, k> = Re<h, T k>".into(),
            residual: worst,
            tolerance: tol::RECONSTRUCTION,
        });
    }
    Ok(td)
}

/// Hilbert–Schmidt norm in the graph structure (Frobenius in the K-basis).
pub fn hs_norm_graph(t: &CMat) -> f64 {
    frobenius(t)
}

/// Trace norm in the graph structure (nuclear norm in the K-basis).
pub fn trace_norm_graph(t: &CMat) -> f64 {
    nuclear(t)
}

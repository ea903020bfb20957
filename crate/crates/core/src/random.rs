//! Seeded generators for standard subspaces and symplectomorphisms.
//!
//! Standardness is guaranteed by construction: a Haar unitary `U` and a real
//! antisymmetric `A` give `j = U∘conj∘U*` and `δ = U e^{iA} U*`, which satisfy
//! `jδj = δ⁻¹`, so `K = fix(jδ^{1/2})` is standard.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::hilbert::{CMat, CVec, ComplexSpace, HermitianEigen, RMat, C64, I};
use crate::quasifree::Symplectomorphism;
use crate::subspace::StandardSubspace;

pub use rand_chacha::ChaCha8Rng as SeededRng;

pub fn seeded(seed: u64) -> SeededRng {
    rand::SeedableRng::seed_from_u64(seed)
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub fn random_complex_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVec {
    CVec::from_fn(n, |_, _| C64::new(normal(rng), normal(rng)))
}

pub fn random_real_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> RMat {
    RMat::from_fn(rows, cols, |_, _| normal(rng))
}

pub fn random_complex_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| C64::new(normal(rng), normal(rng)))
}

/// Haar-distributed unitary: QR of a complex Gaussian matrix with the phases
/// of `diag(R)` moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let qr = random_complex_matrix(n, n, rng).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for k in 0..n {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        q.column_mut(k).iter_mut().for_each(|z| *z *= phase);
    }
    q
}

/// Real antisymmetric matrix with spectral radius `radius`; for `min_gap > 0`
/// resamples until every eigenvalue of `iA` has modulus at least
/// `min_gap·radius` (only possible for even `n`).
fn antisymmetric<R: Rng + ?Sized>(n: usize, radius: f64, min_gap: f64, rng: &mut R) -> RMat {
    loop {
        let g = random_real_matrix(n, n, rng);
        let a = &g - g.transpose();
        let h = HermitianEigen::new(&(a.map(|x| C64::new(x, 0.0)) * I));
        let rho = h.values.iter().fold(0.0_f64, |m, l| m.max(l.abs()));
        if rho == 0.0 {
            // only the 1×1 case is identically zero
            if min_gap > 0.0 || n > 1 {
                continue;
            }
            return a;
        }
        let gap = h.values.iter().fold(f64::INFINITY, |m, l| m.min(l.abs())) / rho;
        if gap >= min_gap {
            return a * (radius / rho);
        }
    }
}

fn subspace_from_modular<R: Rng + ?Sized>(u: &CMat, a: &RMat, rng: &mut R) -> Result<StandardSubspace> {
    let n = u.nrows();
    let h = HermitianEigen::new(&(a.map(|x| C64::new(x, 0.0)) * I));
    // s = j δ^{1/2} has matrix U e^{−iA/2} Uᵀ
    let half = h.apply_fn(|mu| C64::new((-0.5 * mu).exp(), 0.0));
    let s = u * half * u.transpose();
    let space = ComplexSpace::new(n)?;
    for _attempt in 0..8 {
        let gens: Vec<CVec> = (0..n)
            .map(|_| {
                let x = random_complex_vector(n, rng);
                &x + &s * x.map(|z| z.conj())
            })
            .collect();
        match StandardSubspace::from_real_span(space, &gens) {
            Err(Error::RankDeficient { .. }) => continue,
            other => return other,
        }
    }
    Err(Error::InvalidInput("could not draw independent generators".into()))
}

/// A random standard subspace of `ℂ^n` with `|log λ| ≤ log_radius` for every
/// eigenvalue `λ` of `δ`. Odd `n` always yields a non-factor.
pub fn random_standard_subspace<R: Rng + ?Sized>(n: usize, log_radius: f64, rng: &mut R) -> Result<StandardSubspace> {
    let u = haar_unitary(n, rng);
    let a = antisymmetric(n, log_radius, 0.0, rng);
    subspace_from_modular(&u, &a, rng)
}

/// A random factor subspace (even `n`), `δ`-eigenvalues kept away from 1.
pub fn random_factor_subspace<R: Rng + ?Sized>(n: usize, log_radius: f64, rng: &mut R) -> Result<StandardSubspace> {
    if n % 2 == 1 {
        return Err(Error::InvalidInput(format!("a factor needs even complex dimension, got {n}")));
    }
    let u = haar_unitary(n, rng);
    let a = antisymmetric(n, log_radius, 0.05, rng);
    subspace_from_modular(&u, &a, rng)
}

/// `D` with `Dᵀ W D = [[0, 1], [−1, 0]]` for a non-degenerate antisymmetric
/// `W` (symplectic Gram–Schmidt).
pub fn darboux_basis(w: &RMat) -> Result<RMat> {
    let n = w.nrows();
    if n % 2 == 1 {
        return Err(Error::InvalidInput("odd-dimensional symplectic form".into()));
    }
    let omega = |x: &nalgebra::DVector<f64>, y: &nalgebra::DVector<f64>| x.dot(&(w * y));
    let mut pool: Vec<nalgebra::DVector<f64>> = (0..n).map(|k| RMat::identity(n, n).column(k).into_owned()).collect();
    let (mut es, mut fs) = (Vec::new(), Vec::new());
    while !pool.is_empty() {
        let e = pool.remove(0);
        let (idx, val) = pool
            .iter()
            .enumerate()
            .map(|(i, v)| (i, omega(&e, v)))
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .ok_or_else(|| Error::InvalidInput("degenerate symplectic form".into()))?;
        if val.abs() < 1e-12 * w.norm() {
            return Err(Error::NonFactor);
        }
        let f = pool.remove(idx) / val;
        for v in pool.iter_mut() {
            let (vf, ve) = (omega(v, &f), omega(v, &e));
            *v = &*v - &e * vf + &f * ve;
        }
        es.push(e);
        fs.push(f);
    }
    let cols: Vec<_> = es.into_iter().chain(fs).collect();
    Ok(RMat::from_columns(&cols))
}

fn random_symmetric<R: Rng + ?Sized>(n: usize, scale: f64, rng: &mut R) -> RMat {
    let g = random_real_matrix(n, n, rng);
    (&g + g.transpose()) * (0.5 * scale)
}

/// A random symplectic matrix for `[[0, 1], [−1, 0]]` in dimension `2h`.
pub fn random_standard_symplectic<R: Rng + ?Sized>(h: usize, scale: f64, rng: &mut R) -> RMat {
    let id = RMat::identity(h, h);
    let c = random_symmetric(h, scale, rng);
    let d = random_symmetric(h, scale, rng);
    let mut a = &id + random_real_matrix(h, h, rng) * (0.3 * scale);
    let a_it = match a.clone().try_inverse() {
        Some(inv) => inv.transpose(),
        None => {
            a = id.clone();
            id.clone()
        }
    };
    let block = |tl: &RMat, tr: &RMat, bl: &RMat, br: &RMat| {
        let mut m = RMat::zeros(2 * h, 2 * h);
        m.view_mut((0, 0), (h, h)).copy_from(tl);
        m.view_mut((0, h), (h, h)).copy_from(tr);
        m.view_mut((h, 0), (h, h)).copy_from(bl);
        m.view_mut((h, h), (h, h)).copy_from(br);
        m
    };
    let z = RMat::zeros(h, h);
    let lower = block(&id, &z, &c, &id);
    let upper = block(&id, &d, &z, &id);
    let diag = block(&a, &z, &z, &a_it);
    lower * upper * diag
}

/// A random symplectomorphism between two factor subspaces of equal dimension.
pub fn random_symplectomorphism<R: Rng + ?Sized>(
    k1: &StandardSubspace,
    k2: &StandardSubspace,
    scale: f64,
    rng: &mut R,
) -> Result<Symplectomorphism> {
    let d1 = darboux_basis(&k1.symplectic_form())?;
    let d2 = darboux_basis(&k2.symplectic_form())?;
    let s = random_standard_symplectic(k1.dim() / 2, scale, rng);
    let d1_inv = d1.try_inverse().ok_or(Error::Singular { ratio: 0.0 })?;
    Symplectomorphism::new(k1.clone(), k2.clone(), d2 * s * d1_inv)
}

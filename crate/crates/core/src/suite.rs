//! Randomized invariant suite.
//!
//! Each check returns a named residual; a check passes when the residual is at
//! most its tolerance. Everything is serial and seeded, so the summary text is
//! a deterministic function of `(seed, trials)`.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{dagger_adjoint, graph_inner, hs_norm_graph, trace_norm_graph, GraphMetric};
use crate::hilbert::{conj_mat, inner, re_inner, to_complex, CMat, CVec, HermitianEigen, RMat, C64, I};
use crate::quasifree::{
    ay_criterion, commutator_residual, factor_criterion, factorial_qdagger_q, qdagger_q, resolvent_difference,
    schatten_split, Symplectomorphism,
};
use crate::random::{
    random_complex_matrix, random_complex_vector, random_factor_subspace, random_real_matrix, random_standard_subspace,
    random_symplectomorphism, seeded,
};
use crate::subspace::StandardSubspace;
use crate::tol::rel_residual;

/// Spread of `|log λ|` for random modular operators.
pub const LOG_RADIUS: f64 = 3.0;
/// Scale of the random symplectic factors.
pub const SYMPLECTIC_SCALE: f64 = 0.5;

/// One named residual and the tolerance it must meet.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub residual: f64,
    pub tolerance: f64,
}

impl Check {
    fn new(name: &'static str, residual: f64, tolerance: f64) -> Self {
        Self { name, residual, tolerance }
    }

    pub fn passed(&self) -> bool {
        self.residual <= self.tolerance
    }
}

fn scalar_rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// `j∘L∘j` as a linear matrix.
fn conjugate_by_j(j: &CMat, l: &CMat) -> CMat {
    j * conj_mat(l) * conj_mat(j)
}

/// The modular identities of one standard subspace, at `1e-9` relative.
pub fn modular_identity_checks(k: &StandardSubspace) -> Vec<Check> {
    const TOL: f64 = 1e-9;
    let m = k.modular_data();
    let n = k.dim();
    let one = CMat::identity(n, n);
    let s = m.s.matrix();
    let j = m.j.matrix();
    let mut out = Vec::new();

    out.push(Check::new("s_involution", rel_residual(&(s * conj_mat(s)), &one), TOL));
    let sqrt_delta = m.func(|l| C64::new(l.sqrt(), 0.0));
    let recon = j * conj_mat(sqrt_delta.matrix());
    out.push(Check::new("polar_reconstruction", rel_residual(&recon, s), TOL));
    let delta_inv = m.func(|l| C64::new(1.0 / l, 0.0));
    out.push(Check::new("j_delta_j", rel_residual(&conjugate_by_j(j, m.delta.matrix()), delta_inv.matrix()), TOL));

    let basis = k.basis();
    let fixes = basis.iter().map(|b| (m.s.apply(b) - b).norm()).fold(0.0, f64::max);
    out.push(Check::new("s_fixes_k", fixes, TOL));
    let gram = RMat::from_fn(n, n, |a, b| re_inner(&basis[a], &basis[b]));
    out.push(Check::new("re_orthonormal", rel_residual(&gram, &RMat::identity(n, n)), TOL));

    // jK = K′: every j bₖ is symplectically orthogonal to K
    let jk = match k.symplectic_complement() {
        Ok(kp) => {
            let mut worst = 0.0_f64;
            for b in basis {
                for bp in kp.basis() {
                    worst = worst.max(inner(b, bp).im.abs());
                }
            }
            worst
        }
        Err(Error::IdentityCheckFailed { residual, .. }) => residual,
        Err(_) => f64::INFINITY,
    };
    out.push(Check::new("jk_is_k_prime", jk, TOL));

    // K ∩ K′ = {h ∈ K : δh = h}, and its real dimension is dim_ℂ ker(δ − 1)
    let (_, fixed) = k.is_factor();
    let mut worst = 0.0_f64;
    for f in fixed {
        worst = worst.max(k.distance(f));
        worst = worst.max((m.delta.apply(f) - f).norm());
        for b in basis {
            worst = worst.max(inner(b, f).im.abs());
        }
    }
    let band_dim = m.e_one.matrix().trace().re;
    worst = worst.max((band_dim - fixed.len() as f64).abs());
    out.push(Check::new("fixed_space", worst, TOL));

    let mut worst = 0.0_f64;
    for bi in basis {
        for bk in basis {
            worst = worst.max(scalar_rel(inner(bi, bk).im, re_inner(bi, &m.r.apply(bk))));
        }
    }
    out.push(Check::new("polariser_identity", worst, TOL));

    let cos_theta = m.func(|l| {
        let t = if (l - 1.0).abs() <= m.eig_one_tol { FRAC_PI_2 } else { 2.0 * (-0.5 * l.ln().abs()).exp().atan() };
        C64::new(t.cos(), 0.0)
    });
    let igc = m.gamma.matrix() * cos_theta.matrix() * I;
    out.push(Check::new("r_is_i_gamma_cos_theta", rel_residual(m.r.matrix(), &igc), TOL));

    let pm = m.e_plus.matrix() - m.e_minus.matrix();
    let sum = m.e_minus.matrix() + m.e_one.matrix() + m.e_plus.matrix();
    out.push(Check::new("gamma_projections", rel_residual(m.gamma.matrix(), &pm).max(rel_residual(&sum, &one)), TOL));

    let theta = HermitianEigen::new(m.theta.matrix());
    let below = (-theta.min()).max(0.0);
    let above = (theta.max() - FRAC_PI_2).max(0.0);
    out.push(Check::new("theta_spectrum", below.max(above), TOL));

    let jgj = conjugate_by_j(j, m.gamma.matrix());
    out.push(Check::new("j_gamma_j", rel_residual(&jgj, &(-m.gamma.matrix())), TOL));
    let (g, t) = (m.gamma.matrix(), m.theta.matrix());
    let gt = rel_residual(&(g * t), &(t * g));
    let jt = rel_residual(&(j * conj_mat(t)), &(t * j));
    out.push(Check::new("theta_commutes", gt.max(jt), TOL));

    // R preserves K, ‖R‖ ≤ 1, δ^{it}K = K
    let r_k = basis.iter().map(|b| k.distance(&m.r.apply(b))).fold(0.0, f64::max);
    out.push(Check::new("r_preserves_k", r_k, TOL));
    out.push(Check::new("r_norm_bound", (m.r.norm() - 1.0).max(0.0), 1e-10));
    let mut flow = 0.0_f64;
    for t in [0.3, 1.0, std::f64::consts::PI] {
        let u = m.func(|l| C64::from_polar(1.0, t * l.ln()));
        for b in basis {
            flow = flow.max(k.distance(&u.apply(b)));
        }
    }
    out.push(Check::new("modular_flow_preserves_k", flow, 1e-8));

    // eigenvalues pair as (λ, 1/λ)
    let spec = m.spectrum();
    let pairing = spec.iter().zip(spec.iter().rev()).map(|(a, b)| scalar_rel(a * b, 1.0)).fold(0.0, f64::max);
    out.push(Check::new("spectrum_pairing", pairing, 1e-8));
    out
}

/// Graph-structure identities for one subspace and one pair of vectors.
pub fn representation_checks(k: &StandardSubspace, x: &CVec, y: &CVec) -> Vec<Check> {
    const TOL: f64 = 1e-9;
    let m = k.modular_data();
    let n = k.dim();
    let half = (CMat::identity(n, n) + m.r.matrix() * I).scale(0.5);
    let lhs = graph_inner(k, x, &(&half * y));
    let rhs = inner(x, y);
    let rep = (lhs - rhs).norm() / (x.norm() * y.norm()).max(f64::MIN_POSITIVE);

    let r_k = k.polariser_k_basis();
    let op = (CMat::identity(n, n) + to_complex(&r_k) * I).scale(0.5);
    let spectrum = match GraphMetric::new(k) {
        Ok(g) => {
            let w = g.whiten(&op);
            let herm = rel_residual(&w, &w.adjoint());
            let eig = HermitianEigen::new(&w);
            let lower = 1.0 / (1.0 + m.delta_eigen.max());
            herm.max((lower - 1e-10 - eig.min()).max(0.0)).max((eig.max() - 1.0 - 1e-10).max(0.0))
        }
        Err(_) => f64::INFINITY,
    };
    vec![Check::new("representation_identity", rep, TOL), Check::new("half_one_plus_ir_spectrum", spectrum, 1e-10)]
}

/// Structural checks on one random real matrix acting on `K`.
pub fn dagger_checks<R: Rng + ?Sized>(k: &StandardSubspace, rng: &mut R) -> Vec<Check> {
    let n = k.dim();
    let t = random_real_matrix(n, n, rng);
    let involution = match dagger_adjoint(&t, k, k).and_then(|d| dagger_adjoint(&d, k, k)) {
        Ok(back) => rel_residual(&back, &t),
        Err(_) => f64::INFINITY,
    };
    let tc = to_complex(&t);
    let schatten = (hs_norm_graph(&tc) - trace_norm_graph(&tc)).max(0.0);
    vec![Check::new("dagger_involution", involution, 0.0), Check::new("hs_below_trace_norm", schatten, 1e-12)]
}

fn identity_residual<T>(r: Result<T>, pick: impl Fn(&T) -> f64) -> f64 {
    match r {
        Ok(v) => pick(&v),
        Err(Error::IdentityCheckFailed { residual, .. }) | Err(Error::MismatchWithDagger { residual }) => residual,
        Err(_) => f64::INFINITY,
    }
}

/// Criterion cross-checks for one symplectomorphism between factors.
pub fn pair_checks(q: &Symplectomorphism, lambdas: &[C64]) -> Vec<Check> {
    const TOL: f64 = 1e-8;
    let mut out = vec![Check::new("symplectic", q.symplectic_residual(), 1e-9)];

    let consistency = match (ay_criterion(q), factor_criterion(q)) {
        (Ok(a), Ok(f)) => rel_residual(&a.operator, &f.operator),
        (_, Err(Error::MismatchWithDagger { residual })) => residual,
        _ => f64::INFINITY,
    };
    out.push(Check::new("ay_equals_factor", consistency, TOL));
    let dagger = identity_residual(factorial_qdagger_q(q), |x| rel_residual(x, &qdagger_q(q)));
    out.push(Check::new("dagger_identity", dagger, TOL));

    let m1 = identity_residual(resolvent_difference(q, C64::new(-1.0, 0.0)), |r| {
        r.residual("closed_form_m1").unwrap_or(f64::INFINITY)
    });
    out.push(Check::new("resolvent_closed_form", m1, TOL));
    let mut sandwich = 0.0_f64;
    for &l in lambdas {
        sandwich = sandwich
            .max(identity_residual(resolvent_difference(q, l), |r| r.residual("sandwich").unwrap_or(f64::INFINITY)));
    }
    out.push(Check::new("resolvent_sandwich", sandwich, TOL));
    out.push(Check::new("commutator_identity", commutator_residual(q), 1e-12));
    out
}

/// `A₁(B₁−B₂) + (A₁−A₂)B₂ = A₁B₁ − A₂B₂` on random matrices.
pub fn schatten_split_check<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Check {
    let (a1, b1) = (random_complex_matrix(n, n, rng), random_complex_matrix(n, n, rng));
    let (a2, b2) = (random_complex_matrix(n, n, rng), random_complex_matrix(n, n, rng));
    let lhs = schatten_split(&a1, &b1, &a2, &b2);
    Check::new("schatten_split", rel_residual(&lhs, &(&a1 * &b1 - &a2 * &b2)), 1e-13)
}

/// Per-invariant tally.
#[derive(Debug, Clone, PartialEq)]
pub struct Tally {
    pub passed: usize,
    pub total: usize,
    pub worst: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteSummary {
    pub seed: u64,
    pub trials: usize,
    pub tallies: BTreeMap<&'static str, Tally>,
    pub errors: Vec<String>,
}

impl SuiteSummary {
    fn record(&mut self, checks: impl IntoIterator<Item = Check>) {
        for c in checks {
            let t =
                self.tallies.entry(c.name).or_insert(Tally { passed: 0, total: 0, worst: 0.0, tolerance: c.tolerance });
            t.total += 1;
            if c.passed() {
                t.passed += 1;
            }
            if !(c.residual <= t.worst) {
                t.worst = c.residual;
            }
        }
    }

    pub fn all_passed(&self) -> bool {
        self.errors.is_empty() && self.tallies.values().all(|t| t.passed == t.total)
    }
}

impl fmt::Display for SuiteSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "random invariant suite: seed {} trials {}", self.seed, self.trials)?;
        for (name, t) in &self.tallies {
            let status = if t.passed == t.total { "PASS" } else { "FAIL" };
            writeln!(
                f,
                "{status} {name:<28} {:>5}/{:<5} worst {:.3e} tol {:.0e}",
                t.passed, t.total, t.worst, t.tolerance
            )?;
        }
        for e in &self.errors {
            writeln!(f, "ERROR {e}")?;
        }
        let verdict = if self.all_passed() { "all invariants passed" } else { "invariant failures" };
        writeln!(f, "{verdict}")
    }
}

/// Runs `trials` rounds. Round `t` draws one standard subspace of dimension
/// `1 + t mod 8`, a pair of vectors, and a random factorial pair of even
/// dimension with a random symplectomorphism.
pub fn run_suite(seed: u64, trials: usize) -> Result<SuiteSummary> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    let mut rng = seeded(seed);
    let mut summary = SuiteSummary { seed, trials, tallies: BTreeMap::new(), errors: Vec::new() };
    let lambdas = [C64::new(-2.0, 0.0), C64::new(-1.0, 2.0)];
    for t in 0..trials {
        let n = 1 + t % 8;
        match random_standard_subspace(n, LOG_RADIUS, &mut rng) {
            Ok(k) => {
                summary.record(modular_identity_checks(&k));
                let x = random_complex_vector(n, &mut rng);
                let y = random_complex_vector(n, &mut rng);
                summary.record(representation_checks(&k, &x, &y));
                summary.record(dagger_checks(&k, &mut rng));
            }
            Err(e) => summary.errors.push(format!("trial {t}: subspace: {e}")),
        }
        let n2 = 2 * (1 + t % 4);
        let pair = random_factor_subspace(n2, LOG_RADIUS, &mut rng).and_then(|k1| {
            let k2 = random_factor_subspace(n2, LOG_RADIUS, &mut rng)?;
            random_symplectomorphism(&k1, &k2, SYMPLECTIC_SCALE, &mut rng)
        });
        match pair {
            Ok(q) => summary.record(pair_checks(&q, &lambdas)),
            Err(e) => summary.errors.push(format!("trial {t}: pair: {e}")),
        }
        summary.record([schatten_split_check(n, &mut rng)]);
    }
    Ok(summary)
}
